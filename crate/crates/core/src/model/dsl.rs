//! Line-oriented text format for causal structures.
//!
//! ```text
//! file  := { line NEWLINE }
//! line  := [ stmt ] [ '#' any-text ]
//! stmt  := 'system' IDENT ( 'classical' | 'quantum' )
//!        | 'prepare' set
//!        | 'op' IDENT 'in' set 'out' set
//!        | 'exclusive' set
//!        | 'marginal' set
//! set   := '{' [ IDENT { ',' IDENT } ] '}'
//! IDENT := [A-Za-z_][A-Za-z0-9_]*
//! ```
//!
//! Whitespace (spaces and tabs) may separate any two tokens. Keywords are
//! case-sensitive. Columns are 1-based and count characters.

use std::fmt;

use super::{CausalStructure, SystemKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {message}")]
pub struct DslError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Open,
    Close,
    Comma,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Open => f.write_str("`{`"),
            Tok::Close => f.write_str("`}`"),
            Tok::Comma => f.write_str("`,`"),
        }
    }
}

struct Line {
    no: usize,
    toks: Vec<(usize, Tok)>,
    end_col: usize,
    pos: usize,
}

impl Line {
    fn lex(no: usize, text: &str) -> Result<Line, DslError> {
        let chars: Vec<char> = text.chars().collect();
        let mut toks = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            match c {
                '#' => break,
                ' ' | '\t' | '\r' => i += 1,
                '{' => {
                    toks.push((col, Tok::Open));
                    i += 1;
                }
                '}' => {
                    toks.push((col, Tok::Close));
                    i += 1;
                }
                ',' => {
                    toks.push((col, Tok::Comma));
                    i += 1;
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let start = i;
                    while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                        i += 1;
                    }
                    toks.push((col, Tok::Ident(chars[start..i].iter().collect())));
                }
                other => {
                    return Err(DslError {
                        line: no,
                        column: col,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            }
        }
        let end_col = text.trim_end().chars().count() + 1;
        Ok(Line { no, toks, end_col, pos: 0 })
    }

    fn err(&self, column: usize, message: impl Into<String>) -> DslError {
        DslError { line: self.no, column, message: message.into() }
    }

    fn next(&mut self, what: &str) -> Result<(usize, Tok), DslError> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => Err(self.err(self.end_col, format!("expected {what}, found end of line"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<(usize, String), DslError> {
        match self.next(what)? {
            (col, Tok::Ident(s)) => Ok((col, s)),
            (col, t) => Err(self.err(col, format!("expected {what}, found {t}"))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), DslError> {
        let (col, s) = self.ident(&format!("`{kw}`"))?;
        if s == kw {
            Ok(())
        } else {
            Err(self.err(col, format!("expected `{kw}`, found `{s}`")))
        }
    }

    fn set(&mut self) -> Result<Vec<String>, DslError> {
        match self.next("`{`")? {
            (_, Tok::Open) => {}
            (col, t) => return Err(self.err(col, format!("expected `{{`, found {t}"))),
        }
        let mut out = Vec::new();
        if let Some((_, Tok::Close)) = self.toks.get(self.pos) {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            let (_, name) = self.ident("a system or operation name")?;
            out.push(name);
            match self.next("`,` or `}`")? {
                (_, Tok::Comma) => {}
                (_, Tok::Close) => return Ok(out),
                (col, t) => return Err(self.err(col, format!("expected `,` or `}}`, found {t}"))),
            }
        }
    }

    fn finish(&self) -> Result<(), DslError> {
        match self.toks.get(self.pos) {
            None => Ok(()),
            Some((col, t)) => Err(self.err(*col, format!("unexpected {t} after statement"))),
        }
    }
}

/// Parses the structure DSL. Only syntax is checked here; use
/// [`CausalStructure::validate`] for the structural rules.
pub fn parse_structure(text: &str) -> Result<CausalStructure, DslError> {
    let mut s = CausalStructure::new();
    for (k, raw) in text.lines().enumerate() {
        let mut line = Line::lex(k + 1, raw)?;
        if line.toks.is_empty() {
            continue;
        }
        let (col, head) = line.ident("a statement keyword")?;
        match head.as_str() {
            "system" => {
                let (_, name) = line.ident("a system name")?;
                let (kcol, kind) = line.ident("`classical` or `quantum`")?;
                let kind = match kind.as_str() {
                    "classical" => SystemKind::Classical,
                    "quantum" => SystemKind::Quantum,
                    other => {
                        return Err(line.err(kcol, format!("expected `classical` or `quantum`, found `{other}`")))
                    }
                };
                s = s.system(name, kind);
            }
            "prepare" => {
                let set = line.set()?;
                s = s.prepare(set);
            }
            "op" => {
                let (_, name) = line.ident("an operation name")?;
                line.keyword("in")?;
                let inputs = line.set()?;
                line.keyword("out")?;
                let outputs = line.set()?;
                s = s.op(name, inputs, outputs);
            }
            "exclusive" => {
                let set = line.set()?;
                s = s.exclusive(set);
            }
            "marginal" => {
                let set = line.set()?;
                s = s.marginal(set);
            }
            other => return Err(line.err(col, format!("unknown statement `{other}`"))),
        }
        line.finish()?;
    }
    Ok(s)
}

fn braces(list: &[String]) -> String {
    format!("{{{}}}", list.join(", "))
}

pub(super) fn emit(s: &CausalStructure) -> String {
    let mut out = String::new();
    for sys in &s.systems {
        out.push_str(&format!("system {} {}\n", sys.name, sys.kind));
    }
    for p in &s.preparations {
        out.push_str(&format!("prepare {}\n", braces(&p.systems)));
    }
    for op in &s.operations {
        out.push_str(&format!("op {} in {} out {}\n", op.name, braces(&op.inputs), braces(&op.outputs)));
    }
    for g in &s.exclusivity_groups {
        out.push_str(&format!("exclusive {}\n", braces(&g.operations)));
    }
    for c in &s.marginal.contexts {
        out.push_str(&format!("marginal {}\n", braces(c)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# bipartite source
system L classical
system A classical   # Alice
system B classical
prepare {L}
op fa in {L} out {A}
op fb in { L } out {B}
marginal {A,B}
";

    #[test]
    fn parses_and_roundtrips() {
        let s = parse_structure(SAMPLE).unwrap();
        assert_eq!(s.systems.len(), 3);
        assert_eq!(s.operations[1].inputs, vec!["L".to_string()]);
        assert!(s.validate().is_ok());
        let again = parse_structure(&s.to_dsl()).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn reports_line_and_column() {
        let err = parse_structure("system A classical\nop f in {A out {B}\n").unwrap_err();
        assert_eq!((err.line, err.column), (2, 12));
        let err = parse_structure("system A clasical").unwrap_err();
        assert_eq!((err.line, err.column), (1, 10));
        let err = parse_structure("prepare {A}\nfoo {A}").unwrap_err();
        assert_eq!((err.line, err.column), (2, 1));
        let err = parse_structure("prepare {A,").unwrap_err();
        assert_eq!((err.line, err.column), (1, 12));
        let err = parse_structure("prepare {A} x").unwrap_err();
        assert_eq!((err.line, err.column), (1, 13));
        let err = parse_structure("system A$ classical").unwrap_err();
        assert_eq!((err.line, err.column), (1, 9));
    }
}
