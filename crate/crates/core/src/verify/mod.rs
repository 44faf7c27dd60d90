//! Exact validity checks of candidate inequalities against a constraint
//! system, with certificates that can be replayed by plain arithmetic.
//!
//! A candidate `c·h >= 0` is implied by the cone `{h : M h >= 0}` iff `c` is
//! a nonnegative combination of the rows of `M` (free multipliers on
//! equality rows). Otherwise the LP dual yields a vector `h` in the cone with
//! `c·h < 0`.

mod derive;
mod lp;
mod symmetry;

use derive::Derivations;
use symmetry::{stabilizer, Quotient};

pub(crate) use lp::{farkas, Outcome};

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::cone::{ConstraintRow, ConstraintSystem, Provenance};
use crate::expr::{ExprError, Inequality, Relation};
use crate::model::SubsetIndex;
use crate::rational::{primitive_integer_vector, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    NotImplied,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Valid => "valid",
            Verdict::NotImplied => "not_implied",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// `(row position in the system, multiplier)`; negative values only on
    /// equality rows.
    Multipliers(Vec<(usize, Rat)>),
    /// A point of the cone violating the candidate, as primitive integers
    /// over the full coordinate index.
    Ray(Vec<BigInt>),
}

/// Verdict plus one witness per checked direction: `expr >= 0` first, and
/// for equality candidates `-expr >= 0` second.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub verdict: Verdict,
    pub parts: Vec<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error("candidate does not fit the system's coordinates: {0}")]
    Dimension(#[from] ExprError),
    #[error("certificate replay failed: {0}")]
    Replay(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Systems with more rows than this are first tried on narrow slices.
const TIERED_LIMIT: usize = 20_000;

fn is_elemental(row: &ConstraintRow) -> bool {
    matches!(
        row.provenance(),
        Provenance::Submodularity | Provenance::Monotonicity | Provenance::WeakMonotonicity
    )
}

/// Largest coordinate set touched by each row.
fn row_widths(system: &ConstraintSystem) -> Vec<usize> {
    let index = system.index();
    system
        .rows()
        .iter()
        .map(|r| r.terms().iter().map(|&(j, _)| index.set(j).len()).max().unwrap_or(0))
        .collect()
}

fn combination_equals(system: &ConstraintSystem, y: &[(usize, Rat)], c: &[(usize, Rat)]) -> bool {
    let mut acc = dense(c, system.dim());
    for (p, m) in y {
        for &(j, a) in system.rows()[*p].terms() {
            acc[j] -= &(m * &Rat::from_int(a));
        }
    }
    acc.iter().all(Rat::is_zero)
}

/// Tries slices of the system: elemental rows on at most `k` systems, other
/// rows and derived lemmas on at most `k + 2`. Each slice is reduced by the
/// symmetries of the system that fix `c`, and a combination found on it is
/// expanded back to the system's own rows.
fn sliced(system: &ConstraintSystem, c: &[(usize, Rat)]) -> Option<Vec<(usize, Rat)>> {
    let widths = row_widths(system);
    let top = widths.iter().copied().max().unwrap_or(0);
    let floor = c.iter().map(|&(j, _)| system.index().set(j).len()).max().unwrap_or(0);
    let derivations = Derivations::new(system);
    let group = stabilizer(system, c);
    for k in floor.max(3)..top.saturating_sub(2) {
        let wide = k + 2;
        let (mut rows, mut origin): (Vec<ConstraintRow>, Vec<usize>) = system
            .rows()
            .iter()
            .enumerate()
            .filter(|(p, r)| widths[*p] <= if is_elemental(r) { k } else { wide })
            .map(|(p, r)| (r.clone(), p))
            .unzip();
        let base = rows.len();
        let lemmas = derivations.lemmas(wide);
        rows.extend(lemmas.iter().map(|l| l.row.clone()));
        origin.extend(0..lemmas.len());
        let quotient = Quotient::new(&rows, &group, c, system.dim());
        let Outcome::Feasible(y) = farkas(&quotient.rows, &|_| true, &quotient.c) else { continue };
        let y = quotient.lift(&y);
        let (direct, derived): (Vec<_>, Vec<_>) = y.into_iter().partition(|(r, _)| *r < base);
        let mut acc: HashMap<usize, Rat> = HashMap::new();
        for (r, m) in direct {
            *acc.entry(origin[r]).or_insert_with(Rat::zero) += &m;
        }
        let uses: Vec<(usize, Rat)> = derived.into_iter().map(|(r, m)| (origin[r], m)).collect();
        for (p, m) in derivations.flatten(&lemmas, &uses)? {
            *acc.entry(p).or_insert_with(Rat::zero) += &m;
        }
        let mut y: Vec<(usize, Rat)> = acc.into_iter().filter(|(_, m)| !m.is_zero()).collect();
        y.sort_by_key(|t| t.0);
        if combination_equals(system, &y, c) {
            return Some(y);
        }
    }
    None
}

/// Checks whether the coordinate vector `c` (meaning `c·h >= 0`) is implied.
pub fn check_coords(system: &ConstraintSystem, c: &[(usize, Rat)]) -> Witness {
    if system.len() > TIERED_LIMIT {
        if let Some(y) = sliced(system, c) {
            return Witness::Multipliers(y);
        }
    }
    match farkas(system.rows(), &|_| true, c) {
        Outcome::Feasible(y) => Witness::Multipliers(y),
        Outcome::Infeasible(pi) => {
            let mut h = vec![Rat::zero(); system.dim()];
            for (j, v) in pi {
                h[j] = -v;
            }
            Witness::Ray(primitive_integer_vector(&h))
        }
    }
}

/// Decides whether `candidate` holds on every point of the system's cone.
pub fn is_valid(system: &ConstraintSystem, candidate: &Inequality) -> Result<Certificate, VerifyError> {
    let c = candidate.expr.to_coords(system.index())?;
    let directions: Vec<Vec<(usize, Rat)>> = match candidate.relation {
        Relation::Geq => vec![c],
        Relation::Eq => {
            let neg = c.iter().map(|(j, v)| (*j, -v.clone())).collect();
            vec![c, neg]
        }
    };
    let mut parts = Vec::new();
    for d in &directions {
        let w = check_coords(system, d);
        let failed = matches!(w, Witness::Ray(_));
        parts.push(w);
        if failed {
            return Ok(Certificate { verdict: Verdict::NotImplied, parts });
        }
    }
    Ok(Certificate { verdict: Verdict::Valid, parts })
}

fn dense(c: &[(usize, Rat)], n: usize) -> Vec<Rat> {
    let mut v = vec![Rat::zero(); n];
    for (j, x) in c {
        v[*j] = x.clone();
    }
    v
}

impl Certificate {
    /// Re-checks the certificate against `system` and `candidate` using
    /// exact arithmetic only.
    pub fn replay(&self, system: &ConstraintSystem, candidate: &Inequality) -> Result<(), VerifyError> {
        let fail = |m: String| Err(VerifyError::Replay(m));
        let c = dense(&candidate.expr.to_coords(system.index())?, system.dim());
        let expected_parts = match candidate.relation {
            Relation::Geq => 1,
            Relation::Eq => 2,
        };
        match self.verdict {
            Verdict::Valid if self.parts.len() != expected_parts => {
                return fail(format!("expected {expected_parts} witnesses, found {}", self.parts.len()))
            }
            Verdict::NotImplied if self.parts.is_empty() || self.parts.len() > expected_parts => {
                return fail("wrong number of witnesses".into())
            }
            _ => {}
        }
        for (k, part) in self.parts.iter().enumerate() {
            let target: Vec<Rat> = if k == 0 { c.clone() } else { c.iter().map(|x| -x.clone()).collect() };
            let last = k + 1 == self.parts.len();
            match part {
                Witness::Multipliers(y) => {
                    if self.verdict == Verdict::NotImplied && last {
                        return fail("a refutation must end with a ray".into());
                    }
                    let mut sum = vec![Rat::zero(); system.dim()];
                    for (r, v) in y {
                        let Some(row) = system.rows().get(*r) else {
                            return fail(format!("row {r} out of range"));
                        };
                        if v.is_negative() && row.relation() != Relation::Eq {
                            return fail(format!("negative multiplier on inequality row {r}"));
                        }
                        for &(j, a) in row.terms() {
                            sum[j] += &(v * &Rat::from_int(a));
                        }
                    }
                    if sum != target {
                        return fail("multipliers do not reproduce the candidate".into());
                    }
                }
                Witness::Ray(h) => {
                    if self.verdict == Verdict::Valid || !last {
                        return fail("a ray cannot certify validity".into());
                    }
                    if h.len() != system.dim() {
                        return fail("ray has the wrong dimension".into());
                    }
                    for (r, row) in system.rows().iter().enumerate() {
                        let v = row.eval_big(h);
                        let ok = match row.relation() {
                            Relation::Geq => !v.is_negative(),
                            Relation::Eq => v.is_zero(),
                        };
                        if !ok {
                            return fail(format!("ray violates row {r}"));
                        }
                    }
                    let value: Rat = target
                        .iter()
                        .zip(h)
                        .filter(|(a, _)| !a.is_zero())
                        .map(|(a, x)| a * &Rat::from_bigint(x.clone()))
                        .sum();
                    if !value.is_negative() {
                        return fail("ray does not violate the candidate".into());
                    }
                }
            }
        }
        Ok(())
    }

    /// Line-oriented text form:
    ///
    /// ```text
    /// verdict valid
    /// part 1
    /// y <row> <rational>  # <row text>
    /// part 2
    /// h <label> <integer>
    /// ```
    pub fn to_text(&self, system: &ConstraintSystem) -> String {
        let index = system.index();
        let mut out = format!("verdict {}\n", self.verdict);
        for (k, part) in self.parts.iter().enumerate() {
            out.push_str(&format!("part {}\n", k + 1));
            match part {
                Witness::Multipliers(y) => {
                    for (r, v) in y {
                        out.push_str(&format!("y {r} {v}  # {}\n", system.rows()[*r].format(index)));
                    }
                }
                Witness::Ray(h) => {
                    for (j, x) in h.iter().enumerate() {
                        if !x.is_zero() {
                            out.push_str(&format!("h {} {x}\n", index.label(index.set(j))));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn parse_text(text: &str, system: &ConstraintSystem) -> Result<Certificate, VerifyError> {
        let index: &SubsetIndex = system.index();
        let err = |line: usize, message: &str| VerifyError::Parse { line, message: message.to_string() };
        let mut verdict = None;
        let mut parts: Vec<Witness> = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let fields: Vec<&str> = body.split_whitespace().collect();
            match fields.as_slice() {
                ["verdict", "valid"] => verdict = Some(Verdict::Valid),
                ["verdict", "not_implied"] => verdict = Some(Verdict::NotImplied),
                ["part", _] => parts.push(Witness::Multipliers(Vec::new())),
                ["y", r, v] => {
                    let r: usize = r.parse().map_err(|_| err(line, "bad row number"))?;
                    let v: Rat = v.parse().map_err(|_| err(line, "bad multiplier"))?;
                    match parts.last_mut() {
                        Some(Witness::Multipliers(y)) => y.push((r, v)),
                        _ => return Err(err(line, "multiplier outside a multiplier part")),
                    }
                }
                ["h", label, x] => {
                    let names: Vec<&str> = label.split(',').collect();
                    let set = index.set_of(&names).map_err(|n| err(line, &format!("unknown variable `{n}`")))?;
                    let j = index.get(set).ok_or_else(|| err(line, "not a coordinate"))?;
                    let x: BigInt = x.parse().map_err(|_| err(line, "bad integer"))?;
                    let last = parts.last_mut().ok_or_else(|| err(line, "ray entry before `part`"))?;
                    if let Witness::Multipliers(y) = last {
                        if !y.is_empty() {
                            return Err(err(line, "ray entry inside a multiplier part"));
                        }
                        *last = Witness::Ray(vec![BigInt::zero(); index.len()]);
                    }
                    if let Witness::Ray(h) = last {
                        h[j] = x;
                    }
                }
                _ => return Err(err(line, "unrecognized line")),
            }
        }
        let verdict = verdict.ok_or_else(|| err(0, "missing verdict"))?;
        Ok(Certificate { verdict, parts })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::elemental_inequalities;
    use crate::expr::parse_inequality;
    use crate::model::{CausalStructure, Dag, SystemKind::Classical};

    fn shannon2() -> ConstraintSystem {
        let dag = Dag::new(
            &CausalStructure::new()
                .system("A", Classical)
                .system("B", Classical)
                .prepare(["A", "B"]),
        )
        .unwrap();
        elemental_inequalities(&dag)
    }

    #[test]
    fn self_implication_has_unit_multiplier() {
        let sys = shannon2();
        let cand = parse_inequality("H(A|B) >= 0").unwrap();
        let cert = is_valid(&sys, &cand).unwrap();
        assert_eq!(cert.verdict, Verdict::Valid);
        match &cert.parts[0] {
            Witness::Multipliers(y) => {
                assert_eq!(y.len(), 1);
                assert_eq!(y[0].1, Rat::one());
            }
            other => panic!("{other:?}"),
        }
        cert.replay(&sys, &cand).unwrap();
        let again = Certificate::parse_text(&cert.to_text(&sys), &sys).unwrap();
        assert_eq!(again, cert);
    }

    #[test]
    fn correlated_bit_refutes_negative_information() {
        let sys = shannon2();
        let cand = parse_inequality("I(A:B) <= 0").unwrap();
        let cert = is_valid(&sys, &cand).unwrap();
        assert_eq!(cert.verdict, Verdict::NotImplied);
        cert.replay(&sys, &cand).unwrap();
        let Witness::Ray(h) = &cert.parts[0] else { panic!() };
        assert_eq!(h, &vec![BigInt::from(1); 3]);
        let again = Certificate::parse_text(&cert.to_text(&sys), &sys).unwrap();
        assert_eq!(again, cert);
    }

    #[test]
    fn tampered_certificate_is_rejected() {
        let sys = shannon2();
        let cand = parse_inequality("H(A,B) >= H(A)").unwrap();
        let mut cert = is_valid(&sys, &cand).unwrap();
        if let Witness::Multipliers(y) = &mut cert.parts[0] {
            y[0].1 = Rat::from_int(2);
        }
        assert!(cert.replay(&sys, &cand).is_err());
    }
}
