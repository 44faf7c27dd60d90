//! Symmetry reduction for validity checks. Permutations of the systems that
//! map the row set onto itself and fix the candidate form a group; averaging
//! any combination over the group gives another one, so it suffices to
//! search among invariant combinations, one multiplier per row orbit.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use crate::cone::{ConstraintRow, ConstraintSystem, Provenance};
use crate::rational::Rat;
use crate::sets::SysSet;

use super::derive::factorization;

/// Largest group collected.
const MAX_GROUP: usize = 5_040;
const SEARCH_LIMIT: Duration = Duration::from_secs(10);

fn map_set(perm: &[usize], s: SysSet) -> SysSet {
    SysSet::from_indices(s.iter().map(|i| perm[i]))
}

/// Permutations of the coordinates induced by the system permutations that
/// preserve `system`'s rows and the candidate `c`. The identity comes first.
pub(super) fn stabilizer(system: &ConstraintSystem, c: &[(usize, Rat)]) -> Vec<Vec<usize>> {
    let index = system.index();
    let n = index.names().len();
    let target: HashMap<usize, &Rat> = c.iter().map(|(j, v)| (*j, v)).collect();
    let coexist = |a: usize, b: usize| index.contains(SysSet::singleton(a).with(b));

    let mut color: Vec<Vec<i64>> = vec![Vec::new(); n];
    let mut containing = vec![0i64; n];
    for &s in index.sets() {
        for i in s.iter() {
            containing[i] += 1;
        }
    }
    for i in 0..n {
        let mut sig: Vec<i64> = c
            .iter()
            .filter(|(j, _)| index.set(*j).contains(i))
            .map(|(j, v)| (v.to_f64() * 1e6).round() as i64 * 64 + index.set(*j).len() as i64)
            .collect();
        sig.sort_unstable();
        color[i] = vec![containing[i], (0..n).filter(|&b| b != i && coexist(i, b)).count() as i64];
        color[i].extend(sig);
    }
    let mut together = vec![vec![0i64; n]; n];
    for &s in index.sets() {
        let members: Vec<usize> = s.iter().collect();
        for &a in &members {
            for &b in &members {
                together[a][b] += 1;
            }
        }
    }
    let mut prep_of = vec![usize::MAX; n];
    if let Some(parts) = system.rows().iter().filter_map(|r| factorization(r, system)).max_by_key(|parts| parts.len()) {
        for (k, p) in parts.iter().enumerate() {
            for i in p.iter() {
                prep_of[i] = k;
            }
        }
    }
    let pair = |a: usize, b: usize| -> (i64, bool, Vec<i64>) {
        let both = SysSet::singleton(a).with(b);
        let mut sig: Vec<i64> = c
            .iter()
            .filter(|(j, _)| both.is_subset(index.set(*j)))
            .map(|(_, v)| (v.to_f64() * 1e6).round() as i64)
            .collect();
        sig.sort_unstable();
        (together[a][b], prep_of[a] != usize::MAX && prep_of[a] == prep_of[b], sig)
    };

    let keys: HashMap<_, ()> = system.rows().iter().map(|r| (r.key(), ())).collect();
    let preserves = |perm: &[usize]| -> Option<Vec<usize>> {
        let coords: Option<Vec<usize>> = index.sets().iter().map(|&s| index.get(map_set(perm, s))).collect();
        let coords = coords?;
        for (j, v) in c {
            if target.get(&coords[*j]) != Some(&v) {
                return None;
            }
        }
        if c.len() != target.len() {
            return None;
        }
        for row in system.rows() {
            let image = ConstraintRow::from_ints(
                row.terms().iter().map(|&(j, a)| (coords[j], a)).collect(),
                row.relation(),
                Provenance::Derived,
            )?;
            if !keys.contains_key(&image.key()) {
                return None;
            }
        }
        Some(coords)
    };

    let deadline = Instant::now() + SEARCH_LIMIT;
    let class_size = |i: usize| color.iter().filter(|c| **c == color[i]).count();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (class_size(i), i));
    let mut found: Vec<Vec<usize>> = Vec::new();
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    struct Search<'s> {
        order: &'s [usize],
        color: &'s [Vec<i64>],
        pair: &'s dyn Fn(usize, usize) -> (i64, bool, Vec<i64>),
        deadline: Instant,
    }
    fn search(
        s: &Search,
        depth: usize,
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
        accept: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if Instant::now() > s.deadline {
            return false;
        }
        if depth == s.order.len() {
            return accept(perm);
        }
        let i = s.order[depth];
        for t in 0..s.order.len() {
            if used[t] || s.color[t] != s.color[i] {
                continue;
            }
            if s.order[..depth].iter().any(|&k| (s.pair)(i, k) != (s.pair)(t, perm[k])) {
                continue;
            }
            perm[i] = t;
            used[t] = true;
            let go_on = search(s, depth + 1, perm, used, accept);
            used[t] = false;
            perm[i] = usize::MAX;
            if !go_on {
                return false;
            }
        }
        true
    }
    let ctx = Search { order: &order, color: &color, pair: &pair, deadline };
    search(&ctx, 0, &mut perm, &mut used, &mut |p| {
        if let Some(coords) = preserves(p) {
            found.push(coords);
        }
        found.len() < MAX_GROUP
    });
    let identity: Vec<usize> = (0..index.len()).collect();
    found.retain(|p| *p != identity);
    found.insert(0, identity);
    found
}

/// Rows of the quotient problem, one per orbit of `rows`, over coordinate
/// orbits, together with the data needed to lift a solution back.
pub(super) struct Quotient {
    pub rows: Vec<ConstraintRow>,
    pub c: Vec<(usize, Rat)>,
    /// per quotient row: `(factor, members)`; a multiplier `y` on the
    /// quotient row becomes `y * factor * sign` on each member row
    lift: Vec<(Rat, Vec<(usize, i64)>)>,
}

impl Quotient {
    pub fn new(rows: &[ConstraintRow], group: &[Vec<usize>], c: &[(usize, Rat)], dim: usize) -> Self {
        let mut orbit_of = vec![usize::MAX; dim];
        let mut reps: Vec<usize> = Vec::new();
        for j in 0..dim {
            if orbit_of[j] != usize::MAX {
                continue;
            }
            for g in group {
                orbit_of[g[j]] = reps.len();
            }
            reps.push(j);
        }
        let positions: HashMap<_, usize> = rows.iter().enumerate().map(|(p, r)| (r.key(), p)).collect();
        let mut seen = vec![false; rows.len()];
        let mut out = Quotient { rows: Vec::new(), c: Vec::new(), lift: Vec::new() };
        for (p, row) in rows.iter().enumerate() {
            if seen[p] {
                continue;
            }
            let mut sum: HashMap<usize, i64> = HashMap::new();
            let mut members: Vec<(usize, i64)> = Vec::new();
            for g in group {
                let raw: Vec<(usize, i64)> = row.terms().iter().map(|&(j, a)| (g[j], a)).collect();
                let Some(image) = ConstraintRow::from_ints(raw.clone(), row.relation(), row.provenance()) else {
                    continue;
                };
                let Some(&q) = positions.get(&image.key()) else { continue };
                seen[q] = true;
                let (j0, a0) = image.terms()[0];
                let raw0 = raw.iter().find(|t| t.0 == j0).map_or(0, |t| t.1);
                members.push((q, raw0 / a0));
                for (j, a) in raw {
                    *sum.entry(j).or_insert(0) += a;
                }
            }
            let raw: Vec<(usize, i64)> =
                sum.iter().filter(|(j, _)| reps[orbit_of[**j]] == **j).map(|(j, a)| (orbit_of[*j], *a)).collect();
            let Some(q_row) = ConstraintRow::from_ints(raw.clone(), row.relation(), row.provenance()) else {
                continue;
            };
            let (k0, b0) = q_row.terms()[0];
            let raw0 = raw.iter().find(|t| t.0 == k0).map_or(0, |t| t.1);
            out.lift.push((Rat::new(b0, raw0), members));
            out.rows.push(q_row);
        }
        out.c = c.iter().filter(|(j, _)| reps[orbit_of[*j]] == *j).map(|(j, v)| (orbit_of[*j], v.clone())).collect();
        out
    }

    /// Multipliers on the original rows from multipliers on quotient rows.
    pub fn lift(&self, y: &[(usize, Rat)]) -> Vec<(usize, Rat)> {
        let mut acc: HashMap<usize, Rat> = HashMap::new();
        for (q, m) in y {
            let (factor, members) = &self.lift[*q];
            let scaled = m * factor;
            for &(p, sign) in members {
                let v = if sign < 0 { -scaled.clone() } else { scaled.clone() };
                *acc.entry(p).or_insert_with(|| Rat::from_int(0)) += &v;
            }
        }
        acc.into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::assemble;
    use crate::model::{CausalStructure, Dag, SystemKind::*};
    use crate::scenarios::NamedInequality;
    use crate::verify::lp::{farkas, Outcome};

    fn triangle() -> ConstraintSystem {
        let structure = CausalStructure::new()
            .system("A1", Quantum)
            .system("A2", Quantum)
            .system("B1", Quantum)
            .system("B2", Quantum)
            .system("C1", Quantum)
            .system("C2", Quantum)
            .system("A", Classical)
            .system("B", Classical)
            .system("C", Classical)
            .prepare(["A1", "B1"])
            .prepare(["A2", "C1"])
            .prepare(["B2", "C2"])
            .op("a", ["A1", "A2"], ["A"])
            .op("b", ["B1", "B2"], ["B"])
            .op("c", ["C1", "C2"], ["C"]);
        assemble(&Dag::new(&structure).unwrap(), Vec::new()).unwrap()
    }

    #[test]
    fn stabilizer_of_monogamy_swaps_the_partners() {
        let system = triangle();
        let c = NamedInequality::Triangle(1).inequality().expr.to_coords(system.index()).unwrap();
        let group = stabilizer(&system, &c);
        assert_eq!(group.len(), 2);
        let identity: Vec<usize> = (0..system.dim()).collect();
        assert_eq!(group[0], identity);
        let index = system.index();
        let b = index.get(index.set_of(&["B"]).unwrap()).unwrap();
        let cc = index.get(index.set_of(&["C"]).unwrap()).unwrap();
        assert_eq!(group[1][b], cc);
    }

    #[test]
    fn quotient_solutions_lift_to_combinations() {
        let system = triangle();
        let c = NamedInequality::Triangle(1).inequality().expr.to_coords(system.index()).unwrap();
        let group = stabilizer(&system, &c);
        let quotient = Quotient::new(system.rows(), &group, &c, system.dim());
        assert!(quotient.rows.len() < system.len());
        let Outcome::Feasible(y) = farkas(&quotient.rows, &|_| true, &quotient.c) else {
            panic!("monogamy holds on the quantum triangle");
        };
        let y = quotient.lift(&y);
        let mut acc = vec![Rat::zero(); system.dim()];
        for (p, m) in &y {
            assert!(!m.is_negative() || system.rows()[*p].is_equality());
            for &(j, a) in system.rows()[*p].terms() {
                acc[j] += &(m * &Rat::from_int(a));
            }
        }
        let mut expected = vec![Rat::zero(); system.dim()];
        for (j, v) in &c {
            expected[*j] = v.clone();
        }
        assert_eq!(acc, expected);
    }
}
