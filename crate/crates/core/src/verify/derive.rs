//! Shannon-type consequences of a constraint system, each paired with its
//! expansion as a nonnegative combination of the system's own rows.
//!
//! Large systems state some facts only through wide rows: monotonicity only
//! on maximal coexisting sets, independence only for whole preparations.
//! Narrow restatements of those facts let a validity check work on a small
//! slice of the system, and expanding them afterwards turns the result back
//! into an ordinary certificate.

use std::collections::HashMap;

use crate::cone::{ConstraintRow, ConstraintSystem, Provenance};
use crate::expr::Relation;
use crate::rational::Rat;
use crate::sets::SysSet;

/// Upper bound on generated independence lemmas per width.
const MAX_LEMMAS: usize = 50_000;

#[derive(Debug, Clone)]
enum Recipe {
    /// `H(U) - Σ H(S_i) >= 0` for parts taken from distinct preparations
    ProductLower(Vec<SysSet>),
    /// `Σ H(S_i) - H(U) >= 0`
    ProductUpper(Vec<SysSet>),
    /// `H(x | K) >= 0` for a classical `x`
    Conditional(usize, SysSet),
}

pub(super) struct Lemma {
    pub row: ConstraintRow,
    recipe: Recipe,
}

pub(super) struct Derivations<'a> {
    system: &'a ConstraintSystem,
    positions: HashMap<(Relation, &'a [(usize, i64)]), usize>,
    maximal: Vec<SysSet>,
    classical: SysSet,
    /// Preparations and the factorization row relating them.
    preparations: Option<(Vec<SysSet>, usize)>,
}

impl<'a> Derivations<'a> {
    pub fn new(system: &'a ConstraintSystem) -> Self {
        let index = system.index();
        let positions = system.rows().iter().enumerate().map(|(p, r)| (r.key(), p)).collect();
        let mut sets: Vec<SysSet> = index.sets().to_vec();
        sets.sort_by_key(|s| std::cmp::Reverse(s.len()));
        let mut maximal: Vec<SysSet> = Vec::new();
        for s in sets {
            if !maximal.iter().any(|m| s.is_subset(*m)) {
                maximal.push(s);
            }
        }
        let mut classical = SysSet::default();
        let mut preparations = None;
        for (p, row) in system.rows().iter().enumerate() {
            let terms = row.terms();
            match row.provenance() {
                Provenance::Monotonicity if terms.len() == 2 => {
                    let (a, b) = (index.set(terms[0].0), index.set(terms[1].0));
                    let (big, small) = if a.len() > b.len() { (a, b) } else { (b, a) };
                    classical = classical.union(big.difference(small));
                }
                Provenance::ConditionalIndependence => {
                    if let Some(parts) = factorization(row, system) {
                        if preparations.as_ref().is_none_or(|(old, _): &(Vec<SysSet>, usize)| parts.len() > old.len()) {
                            preparations = Some((parts, p));
                        }
                    }
                }
                _ => {}
            }
        }
        Derivations { system, positions, maximal, classical, preparations }
    }

    fn coordinate_terms(&self, items: &[(SysSet, i64)]) -> Option<Vec<(usize, i64)>> {
        items
            .iter()
            .filter(|(s, _)| !s.is_empty())
            .map(|&(s, c)| self.system.index().get(s).map(|i| (i, c)))
            .collect()
    }

    /// Multiplier of the system row equal to a positive multiple of `items`
    /// (any nonzero multiple for equalities).
    fn express(&self, items: &[(SysSet, i64)], relation: Relation) -> Option<Vec<(usize, Rat)>> {
        let terms = self.coordinate_terms(items)?;
        let Some(row) = ConstraintRow::from_ints(terms.clone(), relation, Provenance::Derived) else {
            return Some(Vec::new());
        };
        let &pos = self.positions.get(&row.key())?;
        let (j, c) = row.terms()[0];
        let original: i64 = terms.iter().filter(|t| t.0 == j).map(|t| t.1).sum();
        Some(vec![(pos, Rat::new(original, c))])
    }

    /// `I(X:Y|Z) >= 0` as a sum of elemental rows.
    fn mutual_information(&self, x: SysSet, y: SysSet, z: SysSet) -> Option<Vec<(usize, Rat)>> {
        let mut out = Vec::new();
        let mut seen_x = z;
        for a in x.iter() {
            let mut cond = seen_x;
            for b in y.iter() {
                let items = [
                    (cond.with(a), 1),
                    (cond.with(b), 1),
                    (cond.with(a).with(b), -1),
                    (cond, -1),
                ];
                out.extend(self.express(&items, Relation::Geq)?);
                cond = cond.with(b);
            }
            seen_x = seen_x.with(a);
        }
        Some(out)
    }

    fn expand(&self, recipe: &Recipe) -> Option<Vec<(usize, Rat)>> {
        match recipe {
            Recipe::Conditional(x, k) => {
                let whole = k.with(*x);
                let t = *self.maximal.iter().find(|m| whole.is_subset(**m))?;
                let mut out = self.express(&[(t, 1), (t.without(*x), -1)], Relation::Geq)?;
                out.extend(self.mutual_information(SysSet::singleton(*x), t.difference(whole), *k)?);
                Some(out)
            }
            Recipe::ProductUpper(parts) => {
                let mut out = Vec::new();
                let mut seen = SysSet::default();
                for (i, &s) in parts.iter().enumerate() {
                    if i > 0 {
                        out.extend(self.mutual_information(seen, s, SysSet::default())?);
                    }
                    seen = seen.union(s);
                }
                Some(out)
            }
            Recipe::ProductLower(parts) => {
                // Total correlation grows as systems are added, and vanishes
                // once every preparation is complete.
                let (preps, global) = self.preparations.as_ref()?;
                let mut current: Vec<SysSet> = preps
                    .iter()
                    .map(|p| parts.iter().copied().find(|s| s.is_subset(*p)).unwrap_or_default())
                    .collect();
                let mut out = Vec::new();
                for (i, p) in preps.iter().enumerate() {
                    for x in p.difference(current[i]).iter() {
                        let union = current.iter().fold(SysSet::default(), |acc, s| acc.union(*s));
                        let others = union.difference(current[i]);
                        if !others.is_empty() {
                            out.extend(self.mutual_information(SysSet::singleton(x), others, current[i])?);
                        }
                        current[i] = current[i].with(x);
                    }
                }
                let mut items = vec![(preps.iter().fold(SysSet::default(), |acc, s| acc.union(*s)), 1)];
                items.extend(preps.iter().map(|&p| (p, -1)));
                let g = self.express(&items, Relation::Eq)?;
                debug_assert_eq!(g.first().map(|t| t.0), Some(*global));
                out.extend(g);
                Some(out)
            }
        }
    }

    fn lemma(&self, items: &[(SysSet, i64)], recipe: Recipe) -> Option<Lemma> {
        let terms = self.coordinate_terms(items)?;
        let row = ConstraintRow::from_ints(terms.clone(), Relation::Geq, Provenance::Derived)?;
        let mut sorted = terms;
        sorted.sort_unstable();
        (row.terms() == sorted.as_slice()).then_some(Lemma { row, recipe })
    }

    /// Lemmas whose coordinate sets have at most `width` systems.
    pub fn lemmas(&self, width: usize) -> Vec<Lemma> {
        let mut out = Vec::new();
        let index = self.system.index();
        for x in self.classical.iter() {
            for &u in index.sets() {
                if u.contains(x) && u.len() >= 2 && u.len() <= width && index.contains(u.without(x)) {
                    out.extend(self.lemma(&[(u, 1), (u.without(x), -1)], Recipe::Conditional(x, u.without(x))));
                }
            }
        }
        if let Some((preps, _)) = &self.preparations {
            let mut choices = Vec::new();
            collect_parts(preps, width, &mut Vec::new(), 0, &mut choices);
            for parts in choices {
                let union = parts.iter().fold(SysSet::default(), |acc, s| acc.union(*s));
                let mut lower = vec![(union, 1)];
                lower.extend(parts.iter().map(|&s| (s, -1)));
                let upper: Vec<(SysSet, i64)> = lower.iter().map(|&(s, c)| (s, -c)).collect();
                out.extend(self.lemma(&lower, Recipe::ProductLower(parts.clone())));
                out.extend(self.lemma(&upper, Recipe::ProductUpper(parts)));
            }
        }
        out
    }

    /// Rewrites multipliers on `lemmas` as multipliers on system rows.
    pub fn flatten(&self, lemmas: &[Lemma], uses: &[(usize, Rat)]) -> Option<Vec<(usize, Rat)>> {
        let mut acc: HashMap<usize, Rat> = HashMap::new();
        for (l, y) in uses {
            for (pos, f) in self.expand(&lemmas[*l].recipe)? {
                *acc.entry(pos).or_insert_with(Rat::zero) += &(y * &f);
            }
        }
        Some(acc.into_iter().collect())
    }
}

/// Nonempty parts of distinct preparations, at least two of them, with at
/// most `width` systems in total.
fn collect_parts(preps: &[SysSet], width: usize, current: &mut Vec<SysSet>, from: usize, out: &mut Vec<Vec<SysSet>>) {
    if out.len() >= MAX_LEMMAS {
        return;
    }
    if current.len() >= 2 {
        out.push(current.clone());
    }
    let used: usize = current.iter().map(|s| s.len()).sum();
    for (i, p) in preps.iter().enumerate().skip(from) {
        for s in p.subsets().filter(|s| !s.is_empty() && used + s.len() <= width) {
            current.push(s);
            collect_parts(preps, width, current, i + 1, out);
            current.pop();
        }
    }
}

/// Parts `P_i` of a row stating `H(∪ P_i) = Σ H(P_i)` for disjoint `P_i`.
pub(super) fn factorization(row: &ConstraintRow, system: &ConstraintSystem) -> Option<Vec<SysSet>> {
    let index = system.index();
    let terms = row.terms();
    if terms.len() < 3 || terms.iter().any(|t| t.1.abs() != 1) {
        return None;
    }
    let positive: Vec<_> = terms.iter().filter(|t| t.1 > 0).collect();
    let negative: Vec<_> = terms.iter().filter(|t| t.1 < 0).collect();
    let (whole, parts) = match (positive.len(), negative.len()) {
        (1, n) if n >= 2 => (positive[0].0, negative),
        (n, 1) if n >= 2 => (negative[0].0, positive),
        _ => return None,
    };
    let parts: Vec<SysSet> = parts.iter().map(|t| index.set(t.0)).collect();
    let mut union = SysSet::default();
    for &p in &parts {
        if !union.is_disjoint(p) {
            return None;
        }
        union = union.union(p);
    }
    (union == index.set(whole)).then_some(parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::assemble;
    use crate::model::{CausalStructure, Dag, SystemKind::*};

    fn combination(system: &ConstraintSystem, y: &[(usize, Rat)]) -> Vec<Rat> {
        let mut v = vec![Rat::zero(); system.dim()];
        for (p, m) in y {
            for &(j, c) in system.rows()[*p].terms() {
                v[j] += &(m * &Rat::from_int(c));
            }
        }
        v
    }

    #[test]
    fn lemmas_expand_to_their_rows() {
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
        let system = assemble(&Dag::new(&structure).unwrap(), Vec::new()).unwrap();
        let d = Derivations::new(&system);
        assert_eq!(d.preparations.as_ref().map(|p| p.0.len()), Some(3));
        assert_eq!(d.classical.len(), 3);
        let lemmas = d.lemmas(4);
        assert!(lemmas.iter().any(|l| matches!(l.recipe, Recipe::ProductLower(_))));
        assert!(lemmas.iter().any(|l| matches!(l.recipe, Recipe::Conditional(..))));
        for (l, lemma) in lemmas.iter().enumerate() {
            let y = d.flatten(&lemmas, &[(l, Rat::one())]).unwrap();
            assert!(y.iter().all(|(p, m)| !m.is_negative() || system.rows()[*p].is_equality()));
            let mut expected = vec![Rat::zero(); system.dim()];
            for &(j, c) in lemma.row.terms() {
                expected[j] = Rat::from_int(c);
            }
            assert_eq!(combination(&system, &y), expected, "lemma {}", lemma.row.format(system.index()));
        }
    }
}
