//! Fourier–Motzkin projection.
//!
//! Equalities that touch a dropped coordinate are used first to substitute
//! it away. The remaining dropped coordinates are then eliminated one at a
//! time, always the one with the fewest positive × negative row pairs, and
//! after each elimination the new rows are checked for redundancy against
//! all others by exact LP.

use std::collections::{HashMap, HashSet};

use super::{combine, prune};
use crate::cone::{ConstraintRow, ConstraintSystem, Provenance};
use crate::expr::Relation;
use crate::model::SubsetIndex;

/// Removes `x` from `row` using the equality `pivot`, keeping the
/// orientation of inequalities.
fn substitute(row: &ConstraintRow, pivot: &ConstraintRow, x: usize) -> Option<ConstraintRow> {
    let a = row.coefficient(x) as i128;
    let b = pivot.coefficient(x) as i128;
    combine(row, b.abs(), pivot, -a * b.signum(), row.relation(), Provenance::Derived)
}

/// Splits `rows` into equalities free of dropped coordinates and
/// inequalities, after substituting dropped coordinates out through
/// equalities wherever possible.
fn gaussian(rows: &[ConstraintRow], dropped: &[bool]) -> (Vec<ConstraintRow>, Vec<ConstraintRow>) {
    let (mut equalities, mut inequalities): (Vec<ConstraintRow>, Vec<ConstraintRow>) =
        rows.iter().cloned().partition(ConstraintRow::is_equality);
    loop {
        let choice = equalities
            .iter()
            .enumerate()
            .flat_map(|(e, row)| {
                row.terms().iter().filter(|t| dropped[t.0]).map(move |&(x, c)| ((c.abs(), row.terms().len(), x), e))
            })
            .min();
        let Some(((_, _, x), e)) = choice else { break };
        let pivot = equalities.swap_remove(e);
        let apply = |list: Vec<ConstraintRow>| -> Vec<ConstraintRow> {
            list.into_iter()
                .filter_map(|r| if r.coefficient(x) == 0 { Some(r) } else { substitute(&r, &pivot, x) })
                .collect()
        };
        equalities = apply(equalities);
        inequalities = apply(inequalities);
    }
    let mut seen = HashSet::new();
    equalities.retain(|r| seen.insert(r.terms().to_vec()));
    (equalities, inequalities)
}

struct Elimination<'a> {
    dropped: &'a [bool],
    equalities: Vec<ConstraintRow>,
    rows: Vec<ConstraintRow>,
}

impl Elimination<'_> {
    /// The dropped coordinate with the fewest positive × negative pairs.
    fn next(&self) -> Option<usize> {
        let mut counts: HashMap<usize, (usize, usize)> = HashMap::new();
        for row in &self.rows {
            for &(j, c) in row.terms() {
                if self.dropped[j] {
                    let e = counts.entry(j).or_insert((0, 0));
                    if c > 0 {
                        e.0 += 1;
                    } else {
                        e.1 += 1;
                    }
                }
            }
        }
        counts.into_iter().min_by_key(|&(j, (p, n))| (p * n, p + n, j)).map(|(j, _)| j)
    }

    fn step(&mut self, x: usize) {
        let (mut pos, mut neg, mut rows) = (Vec::new(), Vec::new(), Vec::new());
        for row in std::mem::take(&mut self.rows) {
            match row.coefficient(x).signum() {
                1 => pos.push(row),
                -1 => neg.push(row),
                _ => rows.push(row),
            }
        }
        let mut seen: HashSet<Vec<(usize, i64)>> = rows.iter().map(|r| r.terms().to_vec()).collect();
        let old = rows.len();
        for p in &pos {
            for n in &neg {
                let (a, b) = (p.coefficient(x) as i128, -n.coefficient(x) as i128);
                if let Some(row) = combine(p, b, n, a, Relation::Geq, Provenance::Derived) {
                    if seen.insert(row.terms().to_vec()) {
                        rows.push(row);
                    }
                }
            }
        }
        self.rows = pruned(&self.equalities, rows, old);
    }
}

/// `rows` without the redundant ones among `rows[from..]`, judged together
/// with `equalities`.
fn pruned(equalities: &[ConstraintRow], rows: Vec<ConstraintRow>, from: usize) -> Vec<ConstraintRow> {
    let base = equalities.len();
    let mut all = equalities.to_vec();
    all.extend(rows.iter().cloned());
    let mut alive = vec![true; all.len()];
    let candidates: Vec<usize> = (base + from..all.len()).collect();
    prune(&all, &mut alive, &candidates);
    rows.into_iter().zip(&alive[base..]).filter(|(_, a)| **a).map(|(r, _)| r).collect()
}

/// Projection of the cone of `system` onto the coordinates not listed in
/// `drop`. The result lives on the restricted index, is free of redundant
/// rows and is canonically ordered.
pub fn fm_eliminate(system: &ConstraintSystem, drop: &[usize]) -> ConstraintSystem {
    let index = system.index();
    let mut dropped = vec![false; index.len()];
    for &j in drop {
        dropped[j] = true;
    }
    let (kept, back) = index.restrict(|s| !dropped[index.get(s).expect("own coordinate")]);
    let mut forward = vec![None; index.len()];
    for (new, &old) in back.iter().enumerate() {
        forward[old] = Some(new);
    }
    let (equalities, inequalities) = gaussian(system.rows(), &dropped);

    let mut seen = HashSet::new();
    let unique: Vec<ConstraintRow> = inequalities.into_iter().filter(|r| seen.insert(r.terms().to_vec())).collect();
    let rows = pruned(&equalities, unique, 0);
    let mut work = Elimination { dropped: &dropped, equalities, rows };
    while let Some(x) = work.next() {
        work.step(x);
    }
    let mut out: Vec<ConstraintRow> = work.equalities.iter().filter_map(|r| r.remap(&forward)).collect();
    out.extend(work.rows.iter().filter_map(|r| r.remap(&forward)));
    ConstraintSystem::new(kept, out).expect("remapped rows are in range")
}

/// Projection onto the coordinates of `target`, whose sets must all be
/// coordinates of `system`. The result is re-indexed over `target`.
pub fn project_onto(system: &ConstraintSystem, target: &SubsetIndex) -> ConstraintSystem {
    let index = system.index();
    let drop: Vec<usize> = (0..index.len()).filter(|&j| !target.contains(index.set(j))).collect();
    let projected = fm_eliminate(system, &drop);
    let map: Vec<Option<usize>> = projected.index().sets().iter().map(|&s| target.get(s)).collect();
    let rows = projected.rows().iter().filter_map(|r| r.remap(&map)).collect();
    ConstraintSystem::new(target.clone(), rows).expect("target contains every kept coordinate")
}
