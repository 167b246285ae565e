use std::collections::HashSet;
use std::fmt;

use super::{FactorContent, FactorGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    EmptyGraph,
    DuplicateRvName,
    DuplicateFactorName,
    RangeTooSmall,
    DuplicateLabel,
    EvidenceOutOfRange,
    DuplicateArgument,
    TableShapeMismatch,
    NonPositivePotential,
    IsolatedRv,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::EmptyGraph => "empty graph",
            ViolationKind::DuplicateRvName => "duplicate variable name",
            ViolationKind::DuplicateFactorName => "duplicate factor name",
            ViolationKind::RangeTooSmall => "range too small",
            ViolationKind::DuplicateLabel => "duplicate range label",
            ViolationKind::EvidenceOutOfRange => "evidence out of range",
            ViolationKind::DuplicateArgument => "duplicate argument",
            ViolationKind::TableShapeMismatch => "table shape mismatch",
            ViolationKind::NonPositivePotential => "non-positive potential",
            ViolationKind::IsolatedRv => "isolated variable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Name of the offending node, if any.
    pub subject: Option<String>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.subject {
            Some(s) => write!(f, "{}: {}", self.kind.as_str(), s),
            None => f.write_str(self.kind.as_str()),
        }
    }
}

/// Checks every structural invariant of `g`. An empty result means valid.
pub fn validate(g: &FactorGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |kind, subject: &str| {
        out.push(Violation {
            kind,
            subject: Some(subject.to_owned()),
        })
    };

    let mut names = HashSet::new();
    for rv in g.rvs() {
        if !names.insert(rv.name.as_str()) {
            push(ViolationKind::DuplicateRvName, &rv.name);
        }
        if rv.range.len() < 2 {
            push(ViolationKind::RangeTooSmall, &rv.name);
        }
        let labels: HashSet<_> = rv.range.iter().collect();
        if labels.len() != rv.range.len() {
            push(ViolationKind::DuplicateLabel, &rv.name);
        }
        if rv.evidence.is_some_and(|e| e >= rv.range.len()) {
            push(ViolationKind::EvidenceOutOfRange, &rv.name);
        }
    }

    let mut names = HashSet::new();
    for f in g.factors() {
        if !names.insert(f.name.as_str()) {
            push(ViolationKind::DuplicateFactorName, &f.name);
        }
        let distinct: HashSet<_> = f.args.iter().collect();
        if distinct.len() != f.args.len() {
            push(ViolationKind::DuplicateArgument, &f.name);
        }
        if let FactorContent::Known(t) = &f.content {
            let sizes: Vec<usize> = f.args.iter().map(|&a| g.range_size(a)).collect();
            if t.range_sizes() != sizes.as_slice() {
                push(ViolationKind::TableShapeMismatch, &f.name);
            }
            if t.values().iter().any(|v| *v <= 0.0 || !v.is_finite()) {
                push(ViolationKind::NonPositivePotential, &f.name);
            }
        }
    }

    for id in g.rv_ids() {
        if g.degree(id) == 0 {
            push(ViolationKind::IsolatedRv, &g.rv(id).name);
        }
    }

    if g.num_rvs() == 0 && g.num_factors() == 0 {
        out.push(Violation {
            kind: ViolationKind::EmptyGraph,
            subject: None,
        });
    }
    out
}
