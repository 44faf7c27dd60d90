//! Exact Farkas feasibility: find `y` with `Σ y_r · row_r = c`, `y_r >= 0` on
//! inequality rows and free on equality rows, or a dual vector proving that
//! no such `y` exists.
//!
//! Phase-I simplex on a dense rational tableau. Only a working subset of the
//! rows is loaded as columns; the remaining rows are priced against the
//! current duals and the most attractive ones are added until none prices
//! out (column generation). Coordinates enter the tableau as constraint rows
//! the first time a loaded column touches them.

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::cone::ConstraintRow;
use crate::expr::Relation;
use crate::rational::Rat;

/// Result of a feasibility check.
#[derive(Debug, Clone)]
pub(crate) enum Outcome {
    /// Signed multipliers per row position (negative only on equalities).
    Feasible(Vec<(usize, Rat)>),
    /// Dual vector `π` (sparse, by coordinate) with `π·row <= 0` for every
    /// inequality row, `π·row = 0` for every equality row and `π·c > 0`.
    Infeasible(Vec<(usize, Rat)>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Var {
    Art(usize),
    St(usize),
}

struct Tableau {
    coord: Vec<usize>,
    row_of: HashMap<usize, usize>,
    sign: Vec<i64>,
    st: Vec<Vec<Rat>>,
    art: Vec<Vec<Rat>>,
    rhs: Vec<Rat>,
    basis: Vec<Var>,
    d_st: Vec<Rat>,
    d_art: Vec<Rat>,
    z: Rat,
    /// (row position, sign) of each structural column
    cols: Vec<(usize, i64)>,
}

impl Tableau {
    fn new(c: &[(usize, Rat)]) -> Self {
        let mut t = Tableau {
            coord: Vec::new(),
            row_of: HashMap::new(),
            sign: Vec::new(),
            st: Vec::new(),
            art: Vec::new(),
            rhs: Vec::new(),
            basis: Vec::new(),
            d_st: Vec::new(),
            d_art: Vec::new(),
            z: Rat::zero(),
            cols: Vec::new(),
        };
        for (j, v) in c {
            t.add_coordinate(*j, v);
        }
        t
    }

    fn m(&self) -> usize {
        self.coord.len()
    }

    fn add_coordinate(&mut self, j: usize, value: &Rat) {
        if self.row_of.contains_key(&j) {
            return;
        }
        let i = self.m();
        self.row_of.insert(j, i);
        self.coord.push(j);
        let s = if value.is_negative() { -1 } else { 1 };
        self.sign.push(s);
        for row in &mut self.art {
            row.push(Rat::zero());
        }
        let mut art = vec![Rat::zero(); i + 1];
        art[i] = Rat::one();
        self.art.push(art);
        self.st.push(vec![Rat::zero(); self.cols.len()]);
        let v = value.abs();
        self.z += &v;
        self.rhs.push(v);
        self.basis.push(Var::Art(i));
        self.d_art.push(Rat::zero());
    }

    /// Loads `sigma * row` as a new structural column.
    fn add_column(&mut self, pos: usize, sigma: i64, row: &ConstraintRow) {
        for &(j, _) in row.terms() {
            self.add_coordinate(j, &Rat::zero());
        }
        // tableau column = B^{-1} D a
        let sparse: Vec<(usize, Rat)> = row
            .terms()
            .iter()
            .map(|&(j, c)| {
                let k = self.row_of[&j];
                (k, Rat::from_int(self.sign[k] * sigma * c))
            })
            .collect();
        let mut d = Rat::zero();
        for i in 0..self.m() {
            let mut v = Rat::zero();
            for (k, a) in &sparse {
                let b = &self.art[i][*k];
                if !b.is_zero() {
                    v += &(b * a);
                }
            }
            if matches!(self.basis[i], Var::Art(_)) {
                d -= &v;
            }
            self.st[i].push(v);
        }
        self.d_st.push(d);
        self.cols.push((pos, sigma));
    }

    /// Most negative reduced cost.
    fn entering(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (j, d) in self.d_st.iter().enumerate() {
            if !d.is_negative() {
                continue;
            }
            match best {
                Some(b) if self.d_st[b] <= *d => {}
                _ => best = Some(j),
            }
        }
        best
    }

    /// Minimum ratio test with lexicographic tie-breaking on the rows of
    /// `B^{-1}`, which rules out cycling under any pricing rule.
    fn leaving(&self, q: usize) -> Option<usize> {
        let mut best: Option<usize> = None;
        for i in 0..self.m() {
            let a = &self.st[i][q];
            if !a.is_positive() {
                continue;
            }
            best = match best {
                None => Some(i),
                Some(b) => {
                    let ab = &self.st[b][q];
                    let ord = (&self.rhs[i] * ab).cmp(&(&self.rhs[b] * a)).then_with(|| {
                        (0..self.m())
                            .map(|k| (&self.art[i][k] * ab).cmp(&(&self.art[b][k] * a)))
                            .find(|o| o.is_ne())
                            .unwrap_or(std::cmp::Ordering::Equal)
                    });
                    if ord.is_lt() {
                        Some(i)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        best
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let piv = self.st[p][q].clone();
        if !piv.is_one() {
            let inv = piv.recip();
            for v in self.st[p].iter_mut().chain(self.art[p].iter_mut()) {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
            self.rhs[p] *= &inv;
        }
        let nz_st: Vec<usize> = (0..self.st[p].len()).filter(|&j| !self.st[p][j].is_zero()).collect();
        let nz_art: Vec<usize> = (0..self.art[p].len()).filter(|&k| !self.art[p][k].is_zero()).collect();
        let prow_st: Vec<(usize, Rat)> = nz_st.iter().map(|&j| (j, self.st[p][j].clone())).collect();
        let prow_art: Vec<(usize, Rat)> = nz_art.iter().map(|&k| (k, self.art[p][k].clone())).collect();
        let prhs = self.rhs[p].clone();
        for i in 0..self.m() {
            if i == p || self.st[i][q].is_zero() {
                continue;
            }
            let f = self.st[i][q].clone();
            for (j, v) in &prow_st {
                self.st[i][*j] -= &(&f * v);
            }
            for (k, v) in &prow_art {
                self.art[i][*k] -= &(&f * v);
            }
            if !prhs.is_zero() {
                self.rhs[i] -= &(&f * &prhs);
            }
        }
        let f = self.d_st[q].clone();
        if !f.is_zero() {
            for (j, v) in &prow_st {
                self.d_st[*j] -= &(&f * v);
            }
            for (k, v) in &prow_art {
                self.d_art[*k] -= &(&f * v);
            }
            self.z += &(&f * &prhs);
        }
        self.basis[p] = Var::St(q);
    }

    /// Runs the simplex to optimality on the loaded columns.
    fn optimize(&mut self) {
        loop {
            let Some(q) = self.entering() else { return };
            let p = self
                .leaving(q)
                .expect("phase-I objective is bounded below, so some row limits the step");
            self.pivot(p, q);
        }
    }

    /// Duals on the original (unscaled) coordinates.
    fn duals(&self) -> Vec<(usize, Rat)> {
        (0..self.m())
            .map(|k| {
                let pi = Rat::one() - &self.d_art[k];
                let pi = if self.sign[k] < 0 { -pi } else { pi };
                (self.coord[k], pi)
            })
            .filter(|(_, v)| !v.is_zero())
            .collect()
    }

    fn multipliers(&self) -> Vec<(usize, Rat)> {
        let mut acc: HashMap<usize, Rat> = HashMap::new();
        for (i, v) in self.basis.iter().enumerate() {
            if let Var::St(j) = v {
                if !self.rhs[i].is_zero() {
                    let (pos, sigma) = self.cols[*j];
                    let val = if sigma < 0 { -self.rhs[i].clone() } else { self.rhs[i].clone() };
                    *acc.entry(pos).or_insert_with(Rat::zero) += val;
                }
            }
        }
        let mut out: Vec<(usize, Rat)> = acc.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        out.sort_by_key(|t| t.0);
        out
    }
}

/// Dual vector scaled to integers for fast pricing.
enum Pricer {
    Small(HashMap<usize, i64>),
    Big(HashMap<usize, BigInt>),
}

impl Pricer {
    fn new(pi: &[(usize, Rat)]) -> Self {
        let mut l = BigInt::one();
        for (_, v) in pi {
            l = l.lcm(&v.denom());
        }
        let big: HashMap<usize, BigInt> = pi.iter().map(|(j, v)| (*j, v.numer() * (&l / v.denom()))).collect();
        let small: Option<HashMap<usize, i64>> = big.iter().map(|(j, v)| v.to_i64().map(|x| (*j, x))).collect();
        match small {
            Some(s) if s.values().all(|v| v.unsigned_abs() < 1 << 40) => Pricer::Small(s),
            _ => Pricer::Big(big),
        }
    }

    /// Sign of `π·row` and a magnitude for ranking.
    fn price(&self, row: &ConstraintRow) -> (i32, f64) {
        match self {
            Pricer::Small(pi) => {
                let mut acc: i128 = 0;
                for &(j, c) in row.terms() {
                    if let Some(p) = pi.get(&j) {
                        acc += *p as i128 * c as i128;
                    }
                }
                (acc.signum() as i32, acc.unsigned_abs() as f64)
            }
            Pricer::Big(pi) => {
                let mut acc = BigInt::zero();
                for &(j, c) in row.terms() {
                    if let Some(p) = pi.get(&j) {
                        acc += p * c;
                    }
                }
                let s = if acc.is_zero() {
                    0
                } else if acc > BigInt::zero() {
                    1
                } else {
                    -1
                };
                (s, acc.to_f64().map(f64::abs).unwrap_or(f64::MAX))
            }
        }
    }
}

/// Rows at or below this count are all loaded up front.
const DIRECT_LIMIT: usize = 400;

/// Decides whether `c` is a combination of the usable rows.
pub(crate) fn farkas(rows: &[ConstraintRow], usable: &dyn Fn(usize) -> bool, c: &[(usize, Rat)]) -> Outcome {
    let mut t = Tableau::new(c);
    let candidates: Vec<usize> = (0..rows.len()).filter(|&r| usable(r)).collect();
    let mut loaded: HashSet<(usize, i64)> = HashSet::new();
    if candidates.len() <= DIRECT_LIMIT {
        for &r in &candidates {
            let signs: &[i64] = if rows[r].relation() == Relation::Eq { &[1, -1] } else { &[1] };
            for &s in signs {
                t.add_column(r, s, &rows[r]);
                loaded.insert((r, s));
            }
        }
        t.optimize();
        if t.z.is_zero() {
            return Outcome::Feasible(t.multipliers());
        }
        return Outcome::Infeasible(t.duals());
    }

    loop {
        t.optimize();
        if t.z.is_zero() {
            return Outcome::Feasible(t.multipliers());
        }
        let pi = t.duals();
        let pricer = Pricer::new(&pi);
        let mut violators: Vec<(f64, usize, i64)> = Vec::new();
        for &r in &candidates {
            let (s, mag) = pricer.price(&rows[r]);
            let sigma = match (s, rows[r].relation()) {
                (1, _) => 1,
                (-1, Relation::Eq) => -1,
                _ => continue,
            };
            if !loaded.contains(&(r, sigma)) {
                let norm = rows[r].terms().iter().map(|t| (t.1 as f64).powi(2)).sum::<f64>().sqrt();
                violators.push((mag / norm, r, sigma));
            }
        }
        if violators.is_empty() {
            return Outcome::Infeasible(pi);
        }
        violators.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let k = violators.len().min((t.cols.len() / 2).max(40));
        for &(_, r, sigma) in &violators[..k] {
            t.add_column(r, sigma, &rows[r]);
            loaded.insert((r, sigma));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::Provenance;

    fn geq(terms: &[(usize, i64)]) -> ConstraintRow {
        ConstraintRow::from_ints(terms.to_vec(), Relation::Geq, Provenance::User).unwrap()
    }

    #[test]
    fn small_feasible_and_infeasible() {
        // x >= 0, y >= 0 ; c = x + 2y
        let rows = vec![geq(&[(0, 1)]), geq(&[(1, 1)])];
        match farkas(&rows, &|_| true, &[(0, Rat::one()), (1, Rat::from_int(2))]) {
            Outcome::Feasible(y) => assert_eq!(y, vec![(0, Rat::one()), (1, Rat::from_int(2))]),
            other => panic!("{other:?}"),
        }
        match farkas(&rows, &|_| true, &[(0, Rat::one()), (1, Rat::from_int(-1))]) {
            Outcome::Infeasible(pi) => {
                let get = |j| pi.iter().find(|t| t.0 == j).map(|t| t.1.clone()).unwrap_or_else(Rat::zero);
                assert!(!get(0).is_positive() && !get(1).is_positive());
                assert!((get(0) - get(1)).is_positive());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_duplicates_terminate() {
        let mut rows = Vec::new();
        for _ in 0..5 {
            rows.push(geq(&[(0, 1), (1, -1)]));
            rows.push(geq(&[(1, 1), (2, -1)]));
            rows.push(geq(&[(2, 1)]));
        }
        match farkas(&rows, &|_| true, &[(0, Rat::one())]) {
            Outcome::Feasible(_) => {}
            other => panic!("{other:?}"),
        }
    }
}
