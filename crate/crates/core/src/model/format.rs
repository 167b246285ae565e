//! Line-oriented model files.
//!
//! ```text
//! # comment
//! randvar <name> <label1> <label2> ...
//! factor <name> <rv1> <rv2> ... | <v1> <v2> ... <vk>
//! factor <name> <rv1> <rv2> ... | unknown
//! evidence <rv> <label>
//! ```
//!
//! Tables are row-major with the last argument varying fastest.

use std::fmt::{self, Write as _};

use thiserror::Error;

use super::{validate, FactorContent, FactorGraph, PotentialTable, Violation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("reference to undeclared variable `{0}`")]
    UndeclaredRv(String),
    #[error("table length mismatch: expected {expected} entries, found {found}")]
    TableLengthMismatch { expected: usize, found: usize },
    #[error("non-positive potential {0}")]
    NonPositivePotential(f64),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("variable `{rv}` has no value `{label}`")]
    UnknownLabel { rv: String, label: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("line {line}: {kind}")]
    Line { line: usize, kind: ParseErrorKind },
    #[error("invalid model: {}", join(.0))]
    Invalid(Vec<Violation>),
}

fn join(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty() && !s.contains(['|', '#'])
}

/// Parses and validates a model file.
pub fn parse_model(text: &str) -> Result<FactorGraph, ParseError> {
    let mut g = FactorGraph::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |kind| ParseError::Line { line, kind };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut words = content.split_whitespace();
        let keyword = words.next().unwrap_or_default();
        match keyword {
            "randvar" => {
                let name = words
                    .next()
                    .ok_or_else(|| err(ParseErrorKind::Syntax("randvar needs a name".into())))?;
                check_identifier(name).map_err(err)?;
                if g.rv_by_name(name).is_some() {
                    return Err(err(ParseErrorKind::DuplicateName(name.into())));
                }
                let labels: Vec<&str> = words.collect();
                if labels.len() < 2 {
                    return Err(err(ParseErrorKind::Syntax(format!(
                        "variable `{name}` needs at least two values"
                    ))));
                }
                for (k, l) in labels.iter().enumerate() {
                    check_identifier(l).map_err(err)?;
                    if labels[..k].contains(l) {
                        return Err(err(ParseErrorKind::Syntax(format!(
                            "variable `{name}` repeats value `{l}`"
                        ))));
                    }
                }
                g.add_rv(name, labels);
            }
            "factor" => {
                let (head, tail) = content["factor".len()..]
                    .split_once('|')
                    .ok_or_else(|| err(ParseErrorKind::Syntax("factor needs `|`".into())))?;
                let mut head = head.split_whitespace();
                let name = head
                    .next()
                    .ok_or_else(|| err(ParseErrorKind::Syntax("factor needs a name".into())))?;
                check_identifier(name).map_err(err)?;
                if g.factor_by_name(name).is_some() {
                    return Err(err(ParseErrorKind::DuplicateName(name.into())));
                }
                let mut args = Vec::new();
                for a in head {
                    let id = g
                        .rv_by_name(a)
                        .ok_or_else(|| err(ParseErrorKind::UndeclaredRv(a.into())))?;
                    if args.contains(&id) {
                        return Err(err(ParseErrorKind::Syntax(format!(
                            "factor `{name}` repeats argument `{a}`"
                        ))));
                    }
                    args.push(id);
                }
                if args.is_empty() {
                    return Err(err(ParseErrorKind::Syntax(format!(
                        "factor `{name}` has no arguments"
                    ))));
                }
                let tail: Vec<&str> = tail.split_whitespace().collect();
                let content = if tail == ["unknown"] {
                    FactorContent::Unknown
                } else {
                    let values = tail
                        .iter()
                        .map(|v| {
                            let x: f64 = v.parse().map_err(|_| {
                                err(ParseErrorKind::Syntax(format!("bad number `{v}`")))
                            })?;
                            if x <= 0.0 || !x.is_finite() {
                                return Err(err(ParseErrorKind::NonPositivePotential(x)));
                            }
                            Ok(x)
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    let sizes = args.iter().map(|&a| g.range_size(a)).collect();
                    let table = PotentialTable::new(sizes, values).map_err(|e| {
                        err(ParseErrorKind::TableLengthMismatch {
                            expected: e.expected,
                            found: e.found,
                        })
                    })?;
                    FactorContent::Known(table)
                };
                g.add_factor(name, args, content);
            }
            "evidence" => {
                let (rv, label) = match (words.next(), words.next(), words.next()) {
                    (Some(rv), Some(label), None) => (rv, label),
                    _ => {
                        return Err(err(ParseErrorKind::Syntax(
                            "evidence takes <rv> <label>".into(),
                        )))
                    }
                };
                let id = g
                    .rv_by_name(rv)
                    .ok_or_else(|| err(ParseErrorKind::UndeclaredRv(rv.into())))?;
                let idx = g
                    .rv(id)
                    .range
                    .iter()
                    .position(|l| l == label)
                    .ok_or_else(|| {
                        err(ParseErrorKind::UnknownLabel {
                            rv: rv.into(),
                            label: label.into(),
                        })
                    })?;
                g.set_evidence(id, Some(idx));
            }
            other => {
                return Err(err(ParseErrorKind::Syntax(format!(
                    "unknown statement `{other}`"
                ))));
            }
        }
    }
    let violations = validate(&g);
    if violations.is_empty() {
        Ok(g)
    } else {
        Err(ParseError::Invalid(violations))
    }
}

fn check_identifier(s: &str) -> Result<(), ParseErrorKind> {
    if is_identifier(s) {
        Ok(())
    } else {
        Err(ParseErrorKind::Syntax(format!("bad identifier `{s}`")))
    }
}

/// Writes `g` in the model file format. Values use the shortest decimal form
/// that parses back to the same `f64`.
pub fn serialize_model(g: &FactorGraph) -> String {
    let mut out = String::new();
    write_model(&mut out, g).expect("writing to a String cannot fail");
    out
}

fn write_model(out: &mut String, g: &FactorGraph) -> fmt::Result {
    for rv in g.rvs() {
        write!(out, "randvar {}", rv.name)?;
        for l in &rv.range {
            write!(out, " {l}")?;
        }
        out.push('\n');
    }
    for f in g.factors() {
        write!(out, "factor {}", f.name)?;
        for a in &f.args {
            write!(out, " {}", g.rv(*a).name)?;
        }
        out.push_str(" |");
        match &f.content {
            FactorContent::Unknown => out.push_str(" unknown"),
            FactorContent::Known(t) => {
                for v in t.values() {
                    write!(out, " {v:?}")?;
                }
            }
        }
        out.push('\n');
    }
    for rv in g.rvs() {
        if let Some(e) = rv.evidence {
            writeln!(out, "evidence {} {}", rv.name, rv.range[e])?;
        }
    }
    Ok(())
}
