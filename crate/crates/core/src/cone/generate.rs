//! Row generators: elemental Shannon/von Neumann inequalities, conditional
//! independencies and data processing inequalities.

use super::{sort_dedup, ConstraintRow, ConstraintSystem, Provenance, SystemError};
use crate::expr::Relation;
use crate::model::{Dag, SubsetIndex, SystemKind};
use crate::sets::SysSet;

/// Builds rows from `(set, coefficient)` lists; `H(∅)` terms are dropped.
struct Rows<'a> {
    index: &'a SubsetIndex,
    out: Vec<ConstraintRow>,
}

impl<'a> Rows<'a> {
    fn new(index: &'a SubsetIndex) -> Self {
        Rows { index, out: Vec::new() }
    }

    fn push(&mut self, items: &[(SysSet, i64)], relation: Relation, provenance: Provenance) {
        let terms: Vec<(usize, i64)> = items
            .iter()
            .filter(|(s, _)| !s.is_empty())
            .map(|&(s, c)| {
                let i = self
                    .index
                    .get(s)
                    .unwrap_or_else(|| panic!("generated term {:?} is not a coordinate", s));
                (i, c)
            })
            .collect();
        if let Some(row) = ConstraintRow::from_ints(terms, relation, provenance) {
            self.out.push(row);
        }
    }

    /// `I(a:b|c) >= 0` or `= 0`
    fn mutual_information(&mut self, a: SysSet, b: SysSet, c: SysSet, relation: Relation, provenance: Provenance) {
        let items = [
            (a.union(c), 1),
            (b.union(c), 1),
            (a.union(b).union(c), -1),
            (c, -1),
        ];
        self.push(&items, relation, provenance);
    }

    fn finish(mut self) -> ConstraintSystem {
        sort_dedup(&mut self.out);
        ConstraintSystem::from_sorted(self.index.clone(), self.out)
    }
}

fn elemental_rows(family: &[SysSet], kind: &dyn Fn(usize) -> SystemKind, rows: &mut Rows) {
    for &t in family {
        let members: Vec<usize> = t.iter().collect();
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                let rest = t.without(i).without(j);
                for k in rest.subsets() {
                    rows.mutual_information(
                        SysSet::singleton(i),
                        SysSet::singleton(j),
                        k,
                        Relation::Geq,
                        Provenance::Submodularity,
                    );
                }
            }
        }
        for &q in &members {
            let rest = t.without(q);
            let single = SysSet::singleton(q);
            match kind(q) {
                SystemKind::Classical => {
                    rows.push(&[(t, 1), (rest, -1)], Relation::Geq, Provenance::Monotonicity);
                }
                SystemKind::Quantum => {
                    // unordered bipartitions {W, W'} of the rest, W holding the
                    // lowest member so each pair appears once
                    let anchor = rest.first();
                    for w in rest.subsets() {
                        if let Some(a) = anchor {
                            if !w.contains(a) {
                                continue;
                            }
                        }
                        let w2 = rest.difference(w);
                        rows.push(
                            &[(single.union(w), 1), (single.union(w2), 1), (w, -1), (w2, -1)],
                            Relation::Geq,
                            Provenance::WeakMonotonicity,
                        );
                    }
                }
            }
        }
    }
}

/// Elemental inequalities of every maximal coexisting set: submodularity,
/// monotonicity for classical members and weak monotonicity for quantum
/// members.
pub fn elemental_inequalities(dag: &Dag) -> ConstraintSystem {
    let index = dag.subset_coordinates();
    let mut rows = Rows::new(&index);
    elemental_rows(dag.maximal_sets(), &|i| dag.kind(i), &mut rows);
    rows.finish()
}

/// Elemental inequalities of classical variables jointly distributed on each
/// member of `family`, over `index` (which must contain every subset of every
/// member).
pub fn shannon_inequalities(index: &SubsetIndex, family: &[SysSet]) -> ConstraintSystem {
    let mut rows = Rows::new(index);
    elemental_rows(family, &|_| SystemKind::Classical, &mut rows);
    rows.finish()
}

fn ci_rows(dag: &Dag, rows: &mut Rows) {
    let all = dag.all();
    for op in dag.operations() {
        let below = op.outputs.union(dag.descendants_of(op.outputs));
        let nd = all.difference(below).difference(op.inputs);
        if nd.is_empty() {
            continue;
        }
        if dag.is_coexisting(op.outputs.union(nd).union(op.inputs)) {
            rows.mutual_information(op.outputs, nd, op.inputs, Relation::Eq, Provenance::ConditionalIndependence);
        }
    }
    let preps = dag.preparations();
    let roots = dag.roots();
    if preps.len() >= 2 && dag.is_coexisting(roots) {
        let mut items = vec![(roots, 1)];
        items.extend(preps.iter().map(|&p| (p, -1)));
        rows.push(&items, Relation::Eq, Provenance::ConditionalIndependence);
    }
}

/// Local Markov conditions of the operation vertices and mutual independence
/// of the preparations, restricted to statements whose support coexists.
pub fn conditional_independencies(dag: &Dag) -> ConstraintSystem {
    let index = dag.subset_coordinates();
    let mut rows = Rows::new(&index);
    ci_rows(dag, &mut rows);
    rows.finish()
}

fn dp_rows(dag: &Dag, rows: &mut Rows) {
    for op in dag.operations() {
        let (p, o) = (op.inputs, op.outputs);
        for &t in dag.maximal_sets() {
            if !o.is_subset(t) {
                continue;
            }
            let rest = t.difference(o).difference(dag.descendants_of(o));
            if !dag.is_coexisting(rest.union(p)) {
                continue;
            }
            for w in rest.subsets().filter(|w| !w.is_empty()) {
                for z in rest.difference(w).subsets() {
                    // I(W : P∪Z) - I(W : O∪Z) >= 0
                    let items = [
                        (p.union(z), 1),
                        (w.union(p).union(z), -1),
                        (o.union(z), -1),
                        (w.union(o).union(z), 1),
                    ];
                    rows.push(&items, Relation::Geq, Provenance::DataProcessing);
                }
            }
        }
    }
}

/// `I(W : O∪Z) <= I(W : P∪Z)` for every operation `P → O` and disjoint
/// `W, Z` drawn from a maximal coexisting set around `O`, avoiding the
/// descendants of `O`.
pub fn data_processing_inequalities(dag: &Dag) -> ConstraintSystem {
    let index = dag.subset_coordinates();
    let mut rows = Rows::new(&index);
    dp_rows(dag, &mut rows);
    rows.finish()
}

/// Elemental, CI and DP rows together with `extra` user rows, canonicalized
/// and deduplicated.
pub fn assemble(dag: &Dag, extra: Vec<ConstraintRow>) -> Result<ConstraintSystem, SystemError> {
    let index = dag.subset_coordinates();
    for (r, row) in extra.iter().enumerate() {
        if let Some(&(i, _)) = row.terms().iter().find(|t| t.0 >= index.len()) {
            return Err(SystemError::BadCoordinate { row: r, coordinate: i });
        }
    }
    let mut rows = Rows::new(&index);
    elemental_rows(dag.maximal_sets(), &|i| dag.kind(i), &mut rows);
    ci_rows(dag, &mut rows);
    dp_rows(dag, &mut rows);
    rows.out.extend(extra);
    Ok(rows.finish())
}
