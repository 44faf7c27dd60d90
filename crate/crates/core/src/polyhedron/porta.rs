//! PORTA-style text formats.
//!
//! Coordinates are numbered `x1..xd` in index order; a comment block maps
//! each to its entropy term. `.ieq` files hold one homogeneous row per line,
//!
//! ```text
//! # x1 = H(C)
//! DIM = 3
//!
//! INEQUALITIES_SECTION
//! (  1) +x1 +x2 -x3 >= 0
//! (  2) +x1 -x2 == 0
//! END
//! ```
//!
//! with relations `>=`, `<=` and `==`. `.poi` files list integer generators,
//!
//! ```text
//! DIM = 3
//!
//! CONE_SECTION
//! (  1) 1 1 2
//! END
//! ```
//!
//! plus an optional `LINEALITY_SECTION` of the same shape. Lines starting
//! with `#` and blank lines are ignored.

use num_bigint::BigInt;

use super::{ConeVRep, Ray};
use crate::cone::{ConstraintRow, ConstraintSystem, Provenance};
use crate::expr::Relation;
use crate::model::SubsetIndex;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

fn error(line: usize, message: impl Into<String>) -> FormatError {
    FormatError { line, message: message.into() }
}

fn legend(index: &SubsetIndex) -> String {
    let mut out = String::new();
    for (j, &s) in index.sets().iter().enumerate() {
        out.push_str(&format!("# x{} = H({})\n", j + 1, index.label(s)));
    }
    out
}

/// Writes the rows of `system`.
pub fn to_ieq(system: &ConstraintSystem) -> String {
    let mut out = legend(system.index());
    out.push_str(&format!("DIM = {}\n\nINEQUALITIES_SECTION\n", system.dim()));
    for (k, row) in system.rows().iter().enumerate() {
        let terms: Vec<String> = row
            .terms()
            .iter()
            .map(|&(j, c)| match c {
                1 => format!("+x{}", j + 1),
                -1 => format!("-x{}", j + 1),
                _ => format!("{:+}x{}", c, j + 1),
            })
            .collect();
        let rel = if row.is_equality() { "==" } else { ">=" };
        out.push_str(&format!("({:>3}) {} {} 0\n", k + 1, terms.join(" "), rel));
    }
    out.push_str("END\n");
    out
}

/// Writes the generators of `vrep`.
pub fn to_poi(vrep: &ConeVRep) -> String {
    let mut out = legend(&vrep.index);
    out.push_str(&format!("DIM = {}\n\nCONE_SECTION\n", vrep.index.len()));
    for (k, r) in vrep.rays.iter().enumerate() {
        out.push_str(&format!("({:>3}) {}\n", k + 1, r));
    }
    out.push_str("END\n");
    if !vrep.lineality.is_empty() {
        out.push_str("\nLINEALITY_SECTION\n");
        for (k, r) in vrep.lineality.iter().enumerate() {
            out.push_str(&format!("({:>3}) {}\n", k + 1, r));
        }
        out.push_str("END\n");
    }
    out
}

/// Content lines with their 1-based numbers, comments and blanks removed,
/// after checking the `DIM` header against `dim`.
fn body(text: &str, dim: usize) -> Result<Vec<(usize, &str)>, FormatError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (k, header) = lines.next().ok_or_else(|| error(1, "missing DIM header"))?;
    let value = header
        .strip_prefix("DIM")
        .and_then(|r| r.trim().strip_prefix('='))
        .ok_or_else(|| error(k, "expected `DIM = <n>`"))?;
    let d: usize = value.trim().parse().map_err(|_| error(k, "DIM is not a number"))?;
    if d != dim {
        return Err(error(k, format!("DIM = {d} but the index has {dim} coordinates")));
    }
    Ok(lines.collect())
}

fn strip_label(line: &str) -> &str {
    match line.strip_prefix('(').and_then(|r| r.split_once(')')) {
        Some((_, rest)) => rest.trim(),
        None => line,
    }
}

fn parse_terms(text: &str, dim: usize, line: usize) -> Result<Vec<(usize, i64)>, FormatError> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let mut terms = Vec::new();
    let mut rest = compact.as_str();
    while !rest.is_empty() {
        let (sign, after) = match rest.as_bytes()[0] {
            b'+' => (1, &rest[1..]),
            b'-' => (-1, &rest[1..]),
            _ if terms.is_empty() => (1, rest),
            _ => return Err(error(line, format!("expected `+` or `-` before `{rest}`"))),
        };
        let x = after.find('x').ok_or_else(|| error(line, format!("missing variable in `{after}`")))?;
        let coefficient: i64 = if x == 0 {
            1
        } else {
            after[..x].parse().map_err(|_| error(line, format!("bad coefficient `{}`", &after[..x])))?
        };
        let digits = after[x + 1..].bytes().take_while(u8::is_ascii_digit).count();
        let j: usize = after[x + 1..x + 1 + digits]
            .parse()
            .map_err(|_| error(line, "missing variable number"))?;
        if j == 0 || j > dim {
            return Err(error(line, format!("x{j} is out of range 1..{dim}")));
        }
        terms.push((j - 1, sign * coefficient));
        rest = &after[x + 1 + digits..];
    }
    Ok(terms)
}

/// Reads an `.ieq` file over `index`.
pub fn parse_ieq(text: &str, index: &SubsetIndex) -> Result<ConstraintSystem, FormatError> {
    let mut rows = Vec::new();
    let mut inside = false;
    for (k, line) in body(text, index.len())? {
        match line {
            "INEQUALITIES_SECTION" => inside = true,
            "END" => inside = false,
            _ if !inside => return Err(error(k, format!("unexpected `{line}` outside a section"))),
            _ => {
                let line_body = strip_label(line);
                let (lhs, rel, rhs) = ["==", ">=", "<="]
                    .iter()
                    .find_map(|op| line_body.split_once(op).map(|(l, r)| (l, *op, r)))
                    .ok_or_else(|| error(k, "missing relation"))?;
                if rhs.trim() != "0" {
                    return Err(error(k, "right-hand side must be 0"));
                }
                let mut terms = parse_terms(lhs, index.len(), k)?;
                if rel == "<=" {
                    terms.iter_mut().for_each(|t| t.1 = -t.1);
                }
                let relation = if rel == "==" { Relation::Eq } else { Relation::Geq };
                let row = ConstraintRow::from_ints(terms, relation, Provenance::User)
                    .ok_or_else(|| error(k, "zero row"))?;
                rows.push(row);
            }
        }
    }
    Ok(ConstraintSystem::new(index.clone(), rows).expect("terms were range-checked"))
}

/// Reads a `.poi` file over `index`.
pub fn parse_poi(text: &str, index: &SubsetIndex) -> Result<ConeVRep, FormatError> {
    let (mut rays, mut lineality) = (Vec::new(), Vec::new());
    let mut section: Option<&mut Vec<Ray>> = None;
    for (k, line) in body(text, index.len())? {
        match line {
            "CONE_SECTION" => section = Some(&mut rays),
            "LINEALITY_SECTION" => section = Some(&mut lineality),
            "END" => section = None,
            _ => {
                let target = section.as_mut().ok_or_else(|| error(k, format!("unexpected `{line}` outside a section")))?;
                let values: Result<Vec<BigInt>, _> = strip_label(line).split_whitespace().map(str::parse).collect();
                let values = values.map_err(|_| error(k, "expected integers"))?;
                if values.len() != index.len() {
                    return Err(error(k, format!("expected {} entries, found {}", index.len(), values.len())));
                }
                target.push(Ray::new(values).ok_or_else(|| error(k, "zero generator"))?);
            }
        }
    }
    let lineality = lineality.into_iter().map(Ray::oriented).collect();
    Ok(ConeVRep::new(index.clone(), rays, lineality))
}
