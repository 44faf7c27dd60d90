//! Exact polyhedral computation on entropy cones: Fourier–Motzkin
//! projection, redundancy removal, double-description ray enumeration and
//! conversion back to facets.
//!
//! Every cone here has its apex at the origin. Arithmetic is exact
//! throughout: rows carry 64-bit integer coefficients combined in 128-bit
//! intermediates, rays carry arbitrary-precision integers.

mod dd;
mod fm;
mod marginal;
mod porta;

pub use dd::{extreme_rays, hull, project_generators};
pub use fm::{fm_eliminate, project_onto};
pub use marginal::{marginal_cone, MarginalCone};
pub use porta::{parse_ieq, parse_poi, to_ieq, to_poi, FormatError};

use std::fmt;
use std::thread;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::cone::{ConstraintRow, ConstraintSystem, Provenance};
use crate::expr::Relation;
use crate::model::SubsetIndex;
use crate::rational::Rat;
use crate::verify::{farkas, Outcome};

/// A nonzero primitive integer direction over a coordinate index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ray {
    coordinates: Vec<BigInt>,
}

impl Ray {
    /// Divides by the gcd of the entries. Returns `None` for the zero vector.
    pub fn new(coordinates: Vec<BigInt>) -> Option<Ray> {
        let g = coordinates.iter().fold(BigInt::zero(), |g, v| g.gcd(v));
        if g.is_zero() {
            return None;
        }
        Some(Ray { coordinates: coordinates.into_iter().map(|v| v / &g).collect() })
    }

    pub fn from_ints(values: &[i64]) -> Option<Ray> {
        Ray::new(values.iter().map(|&v| BigInt::from(v)).collect())
    }

    pub fn coordinates(&self) -> &[BigInt] {
        &self.coordinates
    }

    pub fn dim(&self) -> usize {
        self.coordinates.len()
    }

    /// The same line with its first nonzero entry positive.
    pub(crate) fn oriented(self) -> Ray {
        match self.coordinates.iter().find(|v| !v.is_zero()) {
            Some(v) if v.is_negative() => Ray { coordinates: self.coordinates.into_iter().map(|v| -v).collect() },
            _ => self,
        }
    }

    /// Row value `Σ c_i r_i`.
    pub fn eval(&self, row: &ConstraintRow) -> BigInt {
        row.eval_big(&self.coordinates)
    }

    /// Whether the ray lies in the cone of `system`.
    pub fn satisfies(&self, system: &ConstraintSystem) -> bool {
        system.rows().iter().all(|r| {
            let v = self.eval(r);
            if r.is_equality() {
                v.is_zero()
            } else {
                !v.is_negative()
            }
        })
    }
}

impl fmt::Display for Ray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coordinates.iter().map(BigInt::to_string).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Generators of a cone: extreme rays of its pointed part plus a basis of
/// its lineality space (empty for pointed cones such as entropy cones).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeVRep {
    pub index: SubsetIndex,
    pub rays: Vec<Ray>,
    pub lineality: Vec<Ray>,
}

impl ConeVRep {
    /// Rays in canonical order, duplicates removed.
    pub fn new(index: SubsetIndex, mut rays: Vec<Ray>, lineality: Vec<Ray>) -> Self {
        rays.sort();
        rays.dedup();
        ConeVRep { index, rays, lineality }
    }

    pub fn is_pointed(&self) -> bool {
        self.lineality.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyhedronError {
    #[error("the zero row has no canonical form")]
    ZeroRow,
}

/// Canonical form of a rational row: integer coefficients with gcd 1, terms
/// sorted by coordinate, equalities with a positive leading coefficient.
pub fn canonicalize(
    terms: &[(usize, Rat)],
    relation: Relation,
    provenance: Provenance,
) -> Result<ConstraintRow, PolyhedronError> {
    ConstraintRow::from_rats(terms, relation, provenance).ok_or(PolyhedronError::ZeroRow)
}

/// `f1 · r1 + f2 · r2` in canonical form, or `None` if it vanishes.
pub(crate) fn combine(
    r1: &ConstraintRow,
    f1: i128,
    r2: &ConstraintRow,
    f2: i128,
    relation: Relation,
    provenance: Provenance,
) -> Option<ConstraintRow> {
    let (a, b) = (r1.terms(), r2.terms());
    let mut merged: Vec<(usize, i128)> = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j == b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i == a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            merged.push((a[i].0, f1 * a[i].1 as i128));
            i += 1;
        } else if take_b {
            merged.push((b[j].0, f2 * b[j].1 as i128));
            j += 1;
        } else {
            let v = f1 * a[i].1 as i128 + f2 * b[j].1 as i128;
            if v != 0 {
                merged.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    ConstraintRow::from_wide(merged, relation, provenance)
}

/// Whether `rows[r]` is a combination of the rows `alive` marks, itself
/// excluded.
fn implied_by_others(rows: &[ConstraintRow], alive: &[bool], r: usize) -> bool {
    let c = rows[r].rational_terms();
    let direction = matches!(farkas(rows, &|i| i != r && alive[i], &c), Outcome::Feasible(_));
    if !direction || !rows[r].is_equality() {
        return direction;
    }
    let neg: Vec<(usize, Rat)> = c.into_iter().map(|(j, v)| (j, -v)).collect();
    matches!(farkas(rows, &|i| i != r && alive[i], &neg), Outcome::Feasible(_))
}

/// Removes every row among `candidates` that the other live rows imply,
/// one at a time so that the survivors still describe the same cone.
/// Candidates are first screened in parallel against all live rows; only
/// those that pass are rechecked sequentially.
pub(crate) fn prune(rows: &[ConstraintRow], alive: &mut [bool], candidates: &[usize]) {
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(candidates.len().max(1));
    let snapshot: &[bool] = alive;
    let chunk = candidates.len().div_ceil(workers).max(1);
    let flagged: Vec<usize> = thread::scope(|scope| {
        let handles: Vec<_> = candidates
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter().copied().filter(|&r| implied_by_others(rows, snapshot, r)).collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("redundancy worker panicked")).collect()
    });
    for r in flagged {
        if implied_by_others(rows, alive, r) {
            alive[r] = false;
        }
    }
}

/// A minimal subsystem with the same cone: a row is dropped iff the
/// remaining rows imply it.
pub fn remove_redundant(system: &ConstraintSystem) -> ConstraintSystem {
    let rows = system.rows();
    let mut alive = vec![true; rows.len()];
    let all: Vec<usize> = (0..rows.len()).collect();
    prune(rows, &mut alive, &all);
    let kept = rows.iter().zip(&alive).filter(|(_, a)| **a).map(|(r, _)| r.clone()).collect();
    ConstraintSystem::new(system.index().clone(), kept).expect("rows come from a valid system")
}
