//! Linear combinations of entropy terms and their text syntax.
//!
//! ```text
//! ineq  := side REL side              REL := '<=' | '>=' | '='
//! side  := ['+'|'-'] item { ('+'|'-') item }
//! item  := coef | [coef ['*']] atom
//! coef  := INT [ '/' INT ] | '(' INT [ '/' INT ] ')'
//! atom  := 'H' '(' list [ '|' list ] ')'
//!        | 'I' '(' list ':' list { ':' list } [ '|' list ] ')'
//! list  := IDENT { ',' IDENT }
//! ```
//!
//! The only constant allowed is `0`, since entropy cones are homogeneous.
//! `H(S|T) = H(ST) - H(T)` and
//! `I(X1:...:Xk|U) = sum over nonempty S of (-1)^(|S|+1) H(X_S U) - H(U)`,
//! which for `k = 2` is the conditional mutual information.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::model::SubsetIndex;
use crate::rational::Rat;
use crate::sets::SysSet;

/// A set of variable names.
pub type NameSet = BTreeSet<String>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExprError {
    #[error("column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("non-coexisting subset {{{}}}", .0.join(", "))]
    NonCoexisting(Vec<String>),
    #[error("the expression is identically zero")]
    Trivial,
}

/// Σ coefficient · H(set). The empty set never appears (H(∅) = 0).
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct LinearExpression {
    terms: BTreeMap<NameSet, Rat>,
}

fn name_set<I, S>(names: I) -> NameSet
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    names.into_iter().map(Into::into).collect()
}

impl LinearExpression {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `H(names)`
    pub fn h<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut e = Self::zero();
        e.add_term(name_set(names), Rat::one());
        e
    }

    /// `H(a|b)`
    pub fn cond_h(a: &[&str], b: &[&str]) -> Self {
        Self::h(a.iter().chain(b).copied()) - Self::h(b.iter().copied())
    }

    /// `I(a:b|c)`
    pub fn mi(a: &[&str], b: &[&str], c: &[&str]) -> Self {
        Self::h(a.iter().chain(c).copied()) + Self::h(b.iter().chain(c).copied())
            - Self::h(a.iter().chain(b).chain(c).copied())
            - Self::h(c.iter().copied())
    }

    pub fn add_term(&mut self, set: NameSet, coef: Rat) {
        if set.is_empty() || coef.is_zero() {
            return;
        }
        match self.terms.entry(set) {
            Entry::Vacant(v) => {
                v.insert(coef);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coef;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, k: &Rat) -> Self {
        let mut out = Self::zero();
        for (s, c) in &self.terms {
            out.add_term(s.clone(), c * k);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&NameSet, &Rat)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient<S: AsRef<str>>(&self, names: &[S]) -> Rat {
        let key: NameSet = names.iter().map(|s| s.as_ref().to_string()).collect();
        self.terms.get(&key).cloned().unwrap_or_else(Rat::zero)
    }

    /// All variable names mentioned.
    pub fn variables(&self) -> NameSet {
        self.terms.keys().flatten().cloned().collect()
    }

    /// Renames variables; terms that collide are summed.
    pub fn rename(&self, map: &dyn Fn(&str) -> String) -> Self {
        let mut out = Self::zero();
        for (s, c) in &self.terms {
            out.add_term(s.iter().map(|n| map(n)).collect(), c.clone());
        }
        out
    }

    /// Sparse coordinate vector over `index`, sorted by position.
    pub fn to_coords(&self, index: &SubsetIndex) -> Result<Vec<(usize, Rat)>, ExprError> {
        let mut out = Vec::with_capacity(self.terms.len());
        for (names, c) in &self.terms {
            let set = index.set_of(&names.iter().collect::<Vec<_>>()).map_err(ExprError::UnknownVariable)?;
            let pos = index.get(set).ok_or_else(|| {
                ExprError::NonCoexisting(set.iter().map(|i| index.names()[i].clone()).collect())
            })?;
            out.push((pos, c.clone()));
        }
        out.sort_by_key(|(i, _)| *i);
        Ok(out)
    }

    /// Rebuilds an expression from coordinates.
    pub fn from_coords(index: &SubsetIndex, coords: &[(usize, Rat)]) -> Self {
        let mut e = Self::zero();
        for (i, c) in coords {
            e.add_term(set_names(index, index.set(*i)), c.clone());
        }
        e
    }

    /// Evaluates with `h` giving the value of `H` on each named set.
    pub fn eval_with(&self, h: &mut dyn FnMut(&NameSet) -> f64) -> f64 {
        self.terms.iter().map(|(s, c)| c.to_f64() * h(s)).sum()
    }

    /// Formats terms in the order of `index` with names in declaration order.
    pub fn format_with(&self, index: &SubsetIndex) -> String {
        match self.to_coords(index) {
            Ok(coords) => {
                let items: Vec<(String, Rat)> = coords
                    .iter()
                    .map(|(i, c)| (index.label(index.set(*i)), c.clone()))
                    .collect();
                format_terms(&items)
            }
            Err(_) => self.to_string(),
        }
    }
}

fn set_names(index: &SubsetIndex, set: SysSet) -> NameSet {
    set.iter().map(|i| index.names()[i].clone()).collect()
}

/// `2 H(A,B) - H(A) + (1/2) H(C)`; an empty list prints `0`.
pub(crate) fn format_terms(items: &[(String, Rat)]) -> String {
    if items.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (k, (label, c)) in items.iter().enumerate() {
        let mag = c.abs();
        if k == 0 {
            if c.is_negative() {
                out.push('-');
            }
        } else {
            out.push_str(if c.is_negative() { " - " } else { " + " });
        }
        if !mag.is_one() {
            out.push_str(&format!("{mag} "));
        }
        out.push_str(&format!("H({label})"));
    }
    out
}

impl fmt::Display for LinearExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut items: Vec<(&NameSet, &Rat)> = self.terms.iter().collect();
        items.sort_by(|a, b| (a.0.len(), a.0).cmp(&(b.0.len(), b.0)));
        let items: Vec<(String, Rat)> = items
            .into_iter()
            .map(|(s, c)| (s.iter().cloned().collect::<Vec<_>>().join(","), c.clone()))
            .collect();
        f.write_str(&format_terms(&items))
    }
}

impl std::ops::Add for LinearExpression {
    type Output = LinearExpression;
    fn add(mut self, rhs: LinearExpression) -> LinearExpression {
        for (s, c) in rhs.terms {
            self.add_term(s, c);
        }
        self
    }
}

impl std::ops::Sub for LinearExpression {
    type Output = LinearExpression;
    fn sub(mut self, rhs: LinearExpression) -> LinearExpression {
        for (s, c) in rhs.terms {
            self.add_term(s, -c);
        }
        self
    }
}

impl std::ops::Neg for LinearExpression {
    type Output = LinearExpression;
    fn neg(self) -> LinearExpression {
        self.scale(&-Rat::one())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    /// `expr >= 0`
    Geq,
    /// `expr = 0`
    Eq,
}

/// A candidate entropic constraint `expr >= 0` (or `= 0`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inequality {
    pub expr: LinearExpression,
    pub relation: Relation,
}

impl Inequality {
    pub fn geq(expr: LinearExpression) -> Self {
        Inequality { expr, relation: Relation::Geq }
    }

    /// `lhs <= rhs`
    pub fn le(lhs: LinearExpression, rhs: LinearExpression) -> Self {
        Self::geq(rhs - lhs)
    }

    /// The amount by which the inequality is violated: `-expr`, so that a
    /// positive slack means violation.
    pub fn slack_with(&self, h: &mut dyn FnMut(&NameSet) -> f64) -> f64 {
        -self.expr.eval_with(h)
    }

    pub fn format_with(&self, index: &SubsetIndex) -> String {
        format!("{} {} 0", self.expr.format_with(index), rel_str(self.relation))
    }
}

fn rel_str(r: Relation) -> &'static str {
    match r {
        Relation::Geq => ">=",
        Relation::Eq => "=",
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} 0", self.expr, rel_str(self.relation))
    }
}

impl std::str::FromStr for Inequality {
    type Err = ExprError;
    fn from_str(s: &str) -> Result<Self, ExprError> {
        parse_inequality(s)
    }
}

/// Parses `lhs REL rhs` into `expr >= 0` / `expr = 0`.
pub fn parse_inequality(text: &str) -> Result<Inequality, ExprError> {
    let mut p = Parser::new(text);
    let lhs = p.side()?;
    p.skip_ws();
    let col = p.col();
    let rel = if p.eat_str("<=") {
        "<="
    } else if p.eat_str(">=") {
        ">="
    } else if p.eat_str("=") {
        "="
    } else {
        return Err(p.error(col, "expected `<=`, `>=` or `=`"));
    };
    let rhs = p.side()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error(p.col(), "unexpected trailing input"));
    }
    let out = match rel {
        "<=" => Inequality::le(lhs, rhs),
        ">=" => Inequality::geq(lhs - rhs),
        _ => Inequality { expr: lhs - rhs, relation: Relation::Eq },
    };
    if out.expr.is_zero() {
        return Err(ExprError::Trivial);
    }
    Ok(out)
}

/// Parses a bare linear expression such as `I(A:B) - H(C)`.
pub fn parse_expression(text: &str) -> Result<LinearExpression, ExprError> {
    let mut p = Parser::new(text);
    let e = p.side()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error(p.col(), "unexpected trailing input"));
    }
    Ok(e)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> Self {
        Parser { chars: src.chars().collect(), pos: 0 }
    }

    fn col(&self) -> usize {
        self.pos + 1
    }

    fn error(&self, column: usize, message: &str) -> ExprError {
        ExprError::Syntax { column, message: message.to_string() }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_str(&mut self, s: &str) -> bool {
        let n = s.chars().count();
        if self.chars.len() >= self.pos + n && self.chars[self.pos..self.pos + n].iter().copied().eq(s.chars()) {
            self.pos += n;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(self.col(), &format!("expected `{c}`")))
        }
    }

    fn side(&mut self) -> Result<LinearExpression, ExprError> {
        let mut total = LinearExpression::zero();
        let mut first = true;
        loop {
            self.skip_ws();
            let sign = if self.eat('+') {
                Rat::one()
            } else if self.eat('-') {
                -Rat::one()
            } else if first {
                Rat::one()
            } else {
                return Ok(total);
            };
            first = false;
            let item = self.item()?;
            total = total + item.scale(&sign);
        }
    }

    fn item(&mut self) -> Result<LinearExpression, ExprError> {
        self.skip_ws();
        let col = self.col();
        let coef = self.coefficient()?;
        self.skip_ws();
        if coef.is_some() {
            self.eat('*');
            self.skip_ws();
        }
        match self.peek() {
            Some('H') | Some('I') => {
                let atom = self.atom()?;
                Ok(match coef {
                    Some(c) => atom.scale(&c),
                    None => atom,
                })
            }
            _ => match coef {
                Some(c) if c.is_zero() => Ok(LinearExpression::zero()),
                Some(_) => Err(self.error(col, "constant terms other than 0 are not allowed")),
                None => Err(self.error(col, "expected a term such as `H(A)` or `I(A:B)`")),
            },
        }
    }

    fn integer(&mut self) -> Option<i64> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return None;
        }
        self.chars[start..self.pos].iter().collect::<String>().parse().ok()
    }

    fn fraction(&mut self) -> Result<Option<Rat>, ExprError> {
        let col = self.col();
        let Some(num) = self.integer() else { return Ok(None) };
        let save = self.pos;
        if self.eat('/') {
            match self.integer() {
                Some(0) => Err(self.error(col, "zero denominator")),
                Some(den) => Ok(Some(Rat::new(num, den))),
                None => {
                    self.pos = save;
                    Err(self.error(self.col(), "expected a denominator"))
                }
            }
        } else {
            Ok(Some(Rat::from_int(num)))
        }
    }

    fn coefficient(&mut self) -> Result<Option<Rat>, ExprError> {
        self.skip_ws();
        if self.peek() == Some('(') {
            self.pos += 1;
            let col = self.col();
            let Some(r) = self.fraction()? else {
                return Err(self.error(col, "expected a rational coefficient"));
            };
            self.expect(')')?;
            return Ok(Some(r));
        }
        self.fraction()
    }

    fn ident(&mut self) -> Result<String, ExprError> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.peek(), Some(c) if c.is_ascii_alphabetic() || c == '_') {
            while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                self.pos += 1;
            }
        }
        if start == self.pos {
            return Err(self.error(self.col(), "expected a variable name"));
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn list(&mut self) -> Result<NameSet, ExprError> {
        let mut out = NameSet::new();
        out.insert(self.ident()?);
        while self.eat(',') {
            out.insert(self.ident()?);
        }
        Ok(out)
    }

    fn atom(&mut self) -> Result<LinearExpression, ExprError> {
        let col = self.col();
        let head = self.peek();
        self.pos += 1;
        self.expect('(')?;
        let mut parts = vec![self.list()?];
        if head == Some('I') {
            while self.eat(':') {
                parts.push(self.list()?);
            }
            if parts.len() < 2 {
                return Err(self.error(self.col(), "expected `:`"));
            }
        }
        let cond = if self.eat('|') { self.list()? } else { NameSet::new() };
        self.expect(')')?;
        let union = |a: &NameSet, b: &NameSet| -> NameSet { a.union(b).cloned().collect() };
        let mut e = LinearExpression::zero();
        if head == Some('H') {
            e.add_term(union(&parts[0], &cond), Rat::one());
            e.add_term(cond, -Rat::one());
            return Ok(e);
        }
        let k = parts.len();
        if k > 16 {
            return Err(self.error(col, "too many arguments"));
        }
        for mask in 1u32..(1 << k) {
            let mut set = cond.clone();
            for (j, part) in parts.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    set = union(&set, part);
                }
            }
            let sign = if mask.count_ones() % 2 == 1 { Rat::one() } else { -Rat::one() };
            e.add_term(set, sign);
        }
        e.add_term(cond, -Rat::one());
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mutual_information_expansion() {
        let ineq = parse_inequality("I(A:B) <= H(A)").unwrap();
        // H(A) - I(A:B) = H(A,B) - H(B)
        assert_eq!(ineq.expr, LinearExpression::h(["A", "B"]) - LinearExpression::h(["B"]));
        let e = parse_expression("I(A:B|C)").unwrap();
        assert_eq!(e, LinearExpression::mi(&["A"], &["B"], &["C"]));
        assert_eq!(e.len(), 4);
    }

    #[test]
    fn coefficients_in_all_spellings() {
        for text in ["2 H(M) >= 0", "2*H(M) >= 0", "(2)H(M) >= 0", "4/2 H(M) >= 0", "0 <= 2H(M)"] {
            let ineq = parse_inequality(text).unwrap();
            assert_eq!(ineq.expr.coefficient(&["M"]), Rat::from_int(2), "{text}");
        }
        let half = parse_expression("(1/2)H(A) - 1/2 H(A)").unwrap();
        assert!(half.is_zero());
    }

    #[test]
    fn conditional_entropy_and_triple_information() {
        let e = parse_expression("H(A|B,C)").unwrap();
        assert_eq!(e, LinearExpression::h(["A", "B", "C"]) - LinearExpression::h(["B", "C"]));
        // I(A:B:C) = I(A:B) - I(A:B|C)
        let t = parse_expression("I(A:B:C)").unwrap();
        let expected = LinearExpression::mi(&["A"], &["B"], &[]) - LinearExpression::mi(&["A"], &["B"], &["C"]);
        assert_eq!(t, expected);
    }

    #[test]
    fn syntax_errors_carry_columns() {
        match parse_inequality("H(A) >> 0") {
            Err(ExprError::Syntax { column, .. }) => assert_eq!(column, 6),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_inequality("H(A) + 3 >= 0"), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse_inequality("H(A) >= H(A)"), Err(ExprError::Trivial)));
        assert!(matches!(parse_inequality("I(A) >= 0"), Err(ExprError::Syntax { .. })));
    }

    #[test]
    fn display_roundtrip() {
        let ineq = parse_inequality("I(X1:Y1) + I(X2:Y2) <= H(M)").unwrap();
        let again = parse_inequality(&ineq.to_string()).unwrap();
        assert_eq!(ineq, again);
    }

    #[test]
    fn coordinates_report_non_coexisting_sets() {
        let names: Vec<String> = ["A", "B"].iter().map(|s| s.to_string()).collect();
        let idx = SubsetIndex::from_sets(names, vec![SysSet::from_indices([0]), SysSet::from_indices([1])]);
        let e = parse_expression("H(A,B)").unwrap();
        assert_eq!(e.to_coords(&idx), Err(ExprError::NonCoexisting(vec!["A".into(), "B".into()])));
        let e = parse_expression("H(Z)").unwrap();
        assert_eq!(e.to_coords(&idx), Err(ExprError::UnknownVariable("Z".into())));
    }
}
