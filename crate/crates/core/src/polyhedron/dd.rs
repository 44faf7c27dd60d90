//! Double description method. Starting from the whole space (a lineality
//! basis and no rays), constraints are added one at a time; each new
//! halfspace either cuts the lineality space or splits the rays into those
//! it keeps and those it drops, and a new ray is formed from every adjacent
//! kept/dropped pair. Adjacency is decided combinatorially: two rays are
//! adjacent iff no third ray is tight on every constraint both are tight on.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::{ConeVRep, Ray};
use crate::cone::{ConstraintRow, ConstraintSystem, Provenance};
use crate::expr::Relation;
use crate::model::SubsetIndex;
use crate::rational::Rat;

type Vector = Vec<BigInt>;

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `fa · a + fb · b`, made primitive.
fn mix(fa: &BigInt, a: &[BigInt], fb: &BigInt, b: &[BigInt]) -> Vector {
    let v = a.iter().zip(b).map(|(x, y)| fa * x + fb * y).collect();
    Ray::new(v).map_or_else(|| vec![BigInt::zero(); a.len()], |r| r.coordinates)
}

#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64).max(1)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn contains(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & b == *b)
    }
}

struct Generators {
    rays: Vec<(Vector, Bits)>,
    lineality: Vec<Vector>,
}

/// Generators of `{x : a·x >= 0 for every a in constraints}` in `dim`
/// dimensions.
fn double_description(dim: usize, constraints: &[Vector]) -> Generators {
    let m = constraints.len();
    let mut g = Generators {
        rays: Vec::new(),
        lineality: (0..dim)
            .map(|i| {
                let mut e = vec![BigInt::zero(); dim];
                e[i] = BigInt::from(1);
                e
            })
            .collect(),
    };
    for (k, a) in constraints.iter().enumerate() {
        if let Some(pos) = g.lineality.iter().position(|l| !dot(a, l).is_zero()) {
            let mut l = g.lineality.remove(pos);
            let mut al = dot(a, &l);
            if al.is_negative() {
                l = l.into_iter().map(|v| -v).collect();
                al = -al;
            }
            for other in g.lineality.iter_mut() {
                let ao = dot(a, other);
                *other = mix(&al, other, &-ao, &l);
            }
            for (ray, _) in g.rays.iter_mut() {
                let ar = dot(a, ray);
                *ray = mix(&al, ray, &-ar, &l);
            }
            for (_, zero) in g.rays.iter_mut() {
                zero.set(k);
            }
            let mut zero = Bits::new(m);
            for j in 0..k {
                zero.set(j);
            }
            g.rays.push((l, zero));
            continue;
        }
        let values: Vec<BigInt> = g.rays.iter().map(|(r, _)| dot(a, r)).collect();
        let positive: Vec<usize> = (0..values.len()).filter(|&i| values[i].is_positive()).collect();
        let negative: Vec<usize> = (0..values.len()).filter(|&i| values[i].is_negative()).collect();
        let mut fresh: Vec<(Vector, Bits)> = Vec::new();
        for &p in &positive {
            for &n in &negative {
                let common = g.rays[p].1.and(&g.rays[n].1);
                let blocked = (0..g.rays.len())
                    .any(|t| t != p && t != n && g.rays[t].1.contains(&common));
                if blocked {
                    continue;
                }
                let v = mix(&values[p], &g.rays[n].0, &-&values[n], &g.rays[p].0);
                let mut zero = common;
                zero.set(k);
                fresh.push((v, zero));
            }
        }
        let mut kept: Vec<(Vector, Bits)> = Vec::with_capacity(g.rays.len() + fresh.len());
        for (i, (ray, mut zero)) in std::mem::take(&mut g.rays).into_iter().enumerate() {
            if values[i].is_negative() {
                continue;
            }
            if values[i].is_zero() {
                zero.set(k);
            }
            kept.push((ray, zero));
        }
        kept.extend(fresh);
        g.rays = kept;
    }
    g
}

fn dense_rows(system: &ConstraintSystem) -> Vec<Vector> {
    let dim = system.dim();
    let mut out = Vec::new();
    for row in system.rows() {
        let mut v = vec![BigInt::zero(); dim];
        for &(j, c) in row.terms() {
            v[j] = BigInt::from(c);
        }
        if row.is_equality() {
            out.push(v.iter().map(|x| -x).collect());
        }
        out.push(v);
    }
    out
}

/// Reduced echelon basis of the span of `vectors`, each made primitive with
/// a positive pivot.
fn echelon(vectors: Vec<Vector>) -> Vec<Ray> {
    let mut rows: Vec<Vec<Rat>> = vectors
        .into_iter()
        .map(|v| v.into_iter().map(Rat::from_bigint).collect())
        .collect();
    let dim = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..dim {
        let Some(p) = (rank..rows.len()).find(|&i| !rows[i][col].is_zero()) else { continue };
        rows.swap(rank, p);
        let inv = rows[rank][col].recip();
        for v in rows[rank].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..rows.len() {
            if i != rank && !rows[i][col].is_zero() {
                let f = rows[i][col].clone();
                for j in 0..dim {
                    let d = &f * &rows[rank][j];
                    rows[i][j] -= &d;
                }
            }
        }
        rank += 1;
    }
    rows.truncate(rank);
    rows.into_iter()
        .filter_map(|r| {
            let ints = crate::rational::primitive_integer_vector(&r);
            Ray::new(ints).map(Ray::oriented)
        })
        .collect()
}

/// Extreme rays of the cone of `system`, plus a lineality basis if the cone
/// contains a line. Rays are primitive and in canonical order.
pub fn extreme_rays(system: &ConstraintSystem) -> ConeVRep {
    let g = double_description(system.dim(), &dense_rows(system));
    let rays = g.rays.into_iter().filter_map(|(r, _)| Ray::new(r)).collect();
    ConeVRep::new(system.index().clone(), rays, echelon(g.lineality))
}

/// Facet description of the cone generated by `vrep`: one inequality per
/// facet and one equality per independent linear relation that every
/// generator satisfies.
pub fn hull(vrep: &ConeVRep) -> ConstraintSystem {
    let dim = vrep.index.len();
    let mut constraints: Vec<Vector> = vrep.rays.iter().map(|r| r.coordinates.clone()).collect();
    for l in &vrep.lineality {
        constraints.push(l.coordinates.clone());
        constraints.push(l.coordinates.iter().map(|v| -v).collect());
    }
    let g = double_description(dim, &constraints);
    let to_row = |v: &[BigInt], relation: Relation| {
        let terms: Vec<(usize, Rat)> = v
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(j, x)| (j, Rat::from_bigint(x.clone())))
            .collect();
        ConstraintRow::from_rats(&terms, relation, Provenance::Derived)
    };
    let mut rows: Vec<ConstraintRow> = g.rays.iter().filter_map(|(r, _)| to_row(r, Relation::Geq)).collect();
    rows.extend(echelon(g.lineality).iter().filter_map(|l| to_row(&l.coordinates, Relation::Eq)));
    ConstraintSystem::new(vrep.index.clone(), rows).expect("hull rows are in range")
}

/// Generators of the projection of the cone of `vrep` onto the coordinates
/// of `target`, every set of which must be a coordinate of `vrep`. The rays
/// generate the projected cone but need not all be extreme.
pub fn project_generators(vrep: &ConeVRep, target: &SubsetIndex) -> ConeVRep {
    let positions: Vec<usize> = target
        .sets()
        .iter()
        .map(|&s| vrep.index.get(s).expect("target coordinates are a subset"))
        .collect();
    let pick = |r: &Ray| Ray::new(positions.iter().map(|&j| r.coordinates[j].clone()).collect());
    let rays = vrep.rays.iter().filter_map(pick).collect();
    let lineality = echelon(vrep.lineality.iter().filter_map(pick).map(|r| r.coordinates).collect());
    ConeVRep::new(target.clone(), rays, lineality)
}

#[cfg(test)]
mod tests {
    use super::super::tests::{keys, plane, row};
    use super::*;
    use crate::sets::SysSet;

    fn shannon2() -> ConstraintSystem {
        let names = vec!["A".to_string(), "B".to_string()];
        let index = SubsetIndex::from_family(names, &[SysSet::from_indices([0, 1])]);
        let (a, b, ab) = (
            index.get(SysSet::singleton(0)).unwrap(),
            index.get(SysSet::singleton(1)).unwrap(),
            index.get(SysSet::from_indices([0, 1])).unwrap(),
        );
        let rows = vec![
            row(&[(ab, 1), (b, -1)], Relation::Geq),
            row(&[(ab, 1), (a, -1)], Relation::Geq),
            row(&[(a, 1), (b, 1), (ab, -1)], Relation::Geq),
        ];
        ConstraintSystem::new(index, rows).unwrap()
    }

    #[test]
    fn orthant_has_the_unit_rays() {
        let s = ConstraintSystem::new(plane(2), vec![row(&[(0, 1)], Relation::Geq), row(&[(1, 1)], Relation::Geq)])
            .unwrap();
        let v = extreme_rays(&s);
        assert!(v.is_pointed());
        let shown: Vec<String> = v.rays.iter().map(Ray::to_string).collect();
        assert_eq!(shown, ["0 1", "1 0"]);
    }

    #[test]
    fn two_variable_shannon_rays_are_tight_on_two_facets() {
        let s = shannon2();
        let v = extreme_rays(&s);
        assert_eq!(v.rays.len(), 3);
        for r in &v.rays {
            assert!(r.satisfies(&s));
            let tight = s.rows().iter().filter(|row| r.eval(row).is_zero()).count();
            assert_eq!(tight, 2, "ray {r}");
        }
        let back = hull(&v);
        assert_eq!(keys(back.rows()), keys(s.rows()));
    }

    #[test]
    fn halfplane_has_a_lineality_direction() {
        let s = ConstraintSystem::new(plane(2), vec![row(&[(0, 1)], Relation::Geq)]).unwrap();
        let v = extreme_rays(&s);
        assert_eq!(v.lineality.len(), 1);
        assert_eq!(v.lineality[0].to_string(), "0 1");
        assert_eq!(v.rays.len(), 1);
        assert_eq!(keys(hull(&v).rows()), keys(s.rows()));
    }

    #[test]
    fn equalities_restrict_to_a_subspace() {
        let s = ConstraintSystem::new(
            plane(3),
            vec![
                row(&[(0, 1), (1, -1)], Relation::Eq),
                row(&[(0, 1)], Relation::Geq),
                row(&[(2, 1)], Relation::Geq),
            ],
        )
        .unwrap();
        let v = extreme_rays(&s);
        let shown: Vec<String> = v.rays.iter().map(Ray::to_string).collect();
        assert_eq!(shown, ["0 0 1", "1 1 0"]);
        let back = hull(&v);
        assert!(back.contains_row(&row(&[(0, 1), (1, -1)], Relation::Eq)));
        assert_eq!(back.len(), 3);
    }
}
