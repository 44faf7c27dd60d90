//! Linear constraint systems over entropy coordinates, and their generation
//! from a causal structure.

mod dsep;
mod generate;

pub use dsep::{d_separated, DsepError};
pub use generate::{
    assemble, conditional_independencies, data_processing_inequalities, elemental_inequalities,
    shannon_inequalities,
};

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::expr::{parse_inequality, ExprError, Inequality, LinearExpression, Relation};
use crate::model::SubsetIndex;
use crate::rational::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Provenance {
    Submodularity,
    Monotonicity,
    WeakMonotonicity,
    ConditionalIndependence,
    DataProcessing,
    User,
    /// Produced by projection.
    Derived,
}

impl Provenance {
    pub const ALL: [Provenance; 7] = [
        Provenance::Submodularity,
        Provenance::Monotonicity,
        Provenance::WeakMonotonicity,
        Provenance::ConditionalIndependence,
        Provenance::DataProcessing,
        Provenance::User,
        Provenance::Derived,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Submodularity => "submodularity",
            Provenance::Monotonicity => "monotonicity",
            Provenance::WeakMonotonicity => "weak_monotonicity",
            Provenance::ConditionalIndependence => "conditional_independence",
            Provenance::DataProcessing => "data_processing",
            Provenance::User => "user",
            Provenance::Derived => "derived",
        }
    }

    pub fn parse(s: &str) -> Option<Provenance> {
        Self::ALL.into_iter().find(|p| p.as_str() == s)
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One row `Σ c_i h_i >= 0` (or `= 0`) in canonical form: integer
/// coefficients with gcd 1, indices strictly increasing, no zero entries,
/// and for equalities a positive first coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConstraintRow {
    terms: Vec<(usize, i64)>,
    relation: Relation,
    provenance: Provenance,
}

fn overflow() -> ! {
    panic!("constraint coefficient exceeds the 64-bit range")
}

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl ConstraintRow {
    /// Canonical row from integer coefficients (duplicates summed). Returns
    /// `None` for the zero row.
    pub fn from_ints(mut terms: Vec<(usize, i64)>, relation: Relation, provenance: Provenance) -> Option<Self> {
        terms.sort_unstable_by_key(|t| t.0);
        let mut merged: Vec<(usize, i128)> = Vec::with_capacity(terms.len());
        for (i, c) in terms {
            match merged.last_mut() {
                Some((j, acc)) if *j == i => *acc += c as i128,
                _ => merged.push((i, c as i128)),
            }
        }
        Self::from_wide(merged, relation, provenance)
    }

    /// Canonical row from already sorted, duplicate-free wide coefficients.
    pub(crate) fn from_wide(merged: Vec<(usize, i128)>, relation: Relation, provenance: Provenance) -> Option<Self> {
        let mut g = 0i128;
        for &(_, c) in &merged {
            g = gcd_i128(g, c);
        }
        if g == 0 {
            return None;
        }
        if relation == Relation::Eq && merged.iter().find(|t| t.1 != 0).is_some_and(|t| t.1 < 0) {
            g = -g;
        }
        let terms = merged
            .into_iter()
            .filter(|t| t.1 != 0)
            .map(|(i, c)| (i, i64::try_from(c / g).unwrap_or_else(|_| overflow())))
            .collect();
        Some(ConstraintRow { terms, relation, provenance })
    }

    /// Canonical row from rational coefficients. Returns `None` for the zero row.
    pub fn from_rats(terms: &[(usize, Rat)], relation: Relation, provenance: Provenance) -> Option<Self> {
        let mut lcm = BigInt::from(1);
        for (_, c) in terms {
            lcm = lcm.lcm(&c.denom());
        }
        let mut ints: Vec<(usize, BigInt)> = terms
            .iter()
            .map(|(i, c)| (*i, c.numer() * (&lcm / c.denom())))
            .collect();
        ints.sort_by_key(|t| t.0);
        let mut merged: Vec<(usize, BigInt)> = Vec::new();
        for (i, c) in ints {
            match merged.last_mut() {
                Some((j, acc)) if *j == i => *acc += c,
                _ => merged.push((i, c)),
            }
        }
        merged.retain(|t| !t.1.is_zero());
        let mut g = BigInt::zero();
        for (_, c) in &merged {
            g = g.gcd(c);
        }
        if g.is_zero() {
            return None;
        }
        if relation == Relation::Eq && merged[0].1.is_negative() {
            g = -g;
        }
        let terms = merged
            .into_iter()
            .map(|(i, c)| (i, (c / &g).to_i64().unwrap_or_else(|| overflow())))
            .collect();
        Some(ConstraintRow { terms, relation, provenance })
    }

    /// Expands an inequality over `index`.
    pub fn from_inequality(
        ineq: &Inequality,
        index: &SubsetIndex,
        provenance: Provenance,
    ) -> Result<Option<Self>, ExprError> {
        let coords = ineq.expr.to_coords(index)?;
        Ok(Self::from_rats(&coords, ineq.relation, provenance))
    }

    pub fn terms(&self) -> &[(usize, i64)] {
        &self.terms
    }

    pub fn relation(&self) -> Relation {
        self.relation
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn is_equality(&self) -> bool {
        self.relation == Relation::Eq
    }

    pub fn coefficient(&self, i: usize) -> i64 {
        match self.terms.binary_search_by_key(&i, |t| t.0) {
            Ok(k) => self.terms[k].1,
            Err(_) => 0,
        }
    }

    /// Key identifying the row up to provenance.
    pub fn key(&self) -> (Relation, &[(usize, i64)]) {
        (self.relation, &self.terms)
    }

    pub fn rational_terms(&self) -> Vec<(usize, Rat)> {
        self.terms.iter().map(|&(i, c)| (i, Rat::from_int(c))).collect()
    }

    pub fn to_inequality(&self, index: &SubsetIndex) -> Inequality {
        Inequality {
            expr: LinearExpression::from_coords(index, &self.rational_terms()),
            relation: self.relation,
        }
    }

    /// Row value on a floating-point coordinate vector.
    pub fn eval_f64(&self, h: &[f64]) -> f64 {
        self.terms.iter().map(|&(i, c)| c as f64 * h[i]).sum()
    }

    /// Exact row value on an integer coordinate vector.
    pub fn eval_big(&self, h: &[BigInt]) -> BigInt {
        self.terms.iter().map(|&(i, c)| BigInt::from(c) * &h[i]).sum()
    }

    /// Exact row value on a rational coordinate vector.
    pub fn eval_rat(&self, h: &[Rat]) -> Rat {
        self.terms.iter().map(|&(i, c)| &h[i] * &Rat::from_int(c)).sum()
    }

    /// `<expr> >= 0` with terms in index order.
    pub fn format(&self, index: &SubsetIndex) -> String {
        let items: Vec<(String, Rat)> = self
            .terms
            .iter()
            .map(|&(i, c)| (index.label(index.set(i)), Rat::from_int(c)))
            .collect();
        let rel = match self.relation {
            Relation::Geq => ">=",
            Relation::Eq => "=",
        };
        format!("{} {} 0", crate::expr::format_terms(&items), rel)
    }

    /// Remaps coordinates through `map` (old position → new position).
    pub fn remap(&self, map: &[Option<usize>]) -> Option<Self> {
        let terms: Option<Vec<(usize, i64)>> = self.terms.iter().map(|&(i, c)| map[i].map(|j| (j, c))).collect();
        terms.and_then(|t| Self::from_ints(t, self.relation, self.provenance))
    }
}

/// Sorts rows canonically and removes duplicates, keeping the first
/// provenance in enum order. The final order groups rows by provenance.
pub fn sort_dedup(rows: &mut Vec<ConstraintRow>) {
    rows.sort_by(|a, b| (a.key(), a.provenance).cmp(&(b.key(), b.provenance)));
    rows.dedup_by(|a, b| a.key() == b.key());
    rows.sort_by(|a, b| (a.provenance, a.key()).cmp(&(b.provenance, b.key())));
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SystemError {
    #[error("row {row}: coordinate {coordinate} is out of range")]
    BadCoordinate { row: usize, coordinate: usize },
    #[error("line {line}: {source}")]
    Parse { line: usize, source: ExprError },
    #[error("line {line}: unknown provenance `{name}`")]
    Provenance { line: usize, name: String },
}

/// A cone `{h : row(h) >= 0 or = 0 for every row}` over a coordinate index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSystem {
    index: SubsetIndex,
    rows: Vec<ConstraintRow>,
}

impl ConstraintSystem {
    /// Canonicalizes the row list (sorted, deduplicated).
    pub fn new(index: SubsetIndex, mut rows: Vec<ConstraintRow>) -> Result<Self, SystemError> {
        for (r, row) in rows.iter().enumerate() {
            if let Some(&(i, _)) = row.terms.iter().find(|t| t.0 >= index.len()) {
                return Err(SystemError::BadCoordinate { row: r, coordinate: i });
            }
        }
        sort_dedup(&mut rows);
        Ok(ConstraintSystem { index, rows })
    }

    pub(crate) fn from_sorted(index: SubsetIndex, rows: Vec<ConstraintRow>) -> Self {
        ConstraintSystem { index, rows }
    }

    pub fn index(&self) -> &SubsetIndex {
        &self.index
    }

    pub fn rows(&self) -> &[ConstraintRow] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<ConstraintRow> {
        self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.index.len()
    }

    pub fn count(&self, provenance: Provenance) -> usize {
        self.rows.iter().filter(|r| r.provenance == provenance).count()
    }

    pub fn contains_row(&self, row: &ConstraintRow) -> bool {
        self.rows.iter().any(|r| r.key() == row.key())
    }

    /// Adds the rows of `other`, which must share the same index.
    pub fn merged(&self, extra: Vec<ConstraintRow>) -> Result<Self, SystemError> {
        let mut rows = self.rows.clone();
        rows.extend(extra);
        Self::new(self.index.clone(), rows)
    }

    /// One row per line, `<expr> >= 0  # provenance`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            out.push_str(&format!("{}  # {}\n", row.format(&self.index), row.provenance));
        }
        out
    }

    /// Reads rows in the [`to_text`](Self::to_text) format. Lines without a
    /// provenance comment are `user` rows; blank lines and lines starting
    /// with `#` are skipped.
    pub fn parse_text(index: SubsetIndex, text: &str) -> Result<Self, SystemError> {
        let mut rows = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (body, prov) = match trimmed.split_once('#') {
                Some((b, p)) => {
                    let name = p.trim();
                    let prov = Provenance::parse(name)
                        .ok_or_else(|| SystemError::Provenance { line: k + 1, name: name.to_string() })?;
                    (b, prov)
                }
                None => (trimmed, Provenance::User),
            };
            let ineq = parse_inequality(body).map_err(|e| SystemError::Parse { line: k + 1, source: e })?;
            let row = ConstraintRow::from_inequality(&ineq, &index, prov)
                .map_err(|e| SystemError::Parse { line: k + 1, source: e })?;
            rows.extend(row);
        }
        Self::new(index, rows)
    }
}
