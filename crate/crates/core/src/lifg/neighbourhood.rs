use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{FactorGraph, FactorId, RvId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0} is not a factor of this graph")]
pub struct NoSuchFactor(pub FactorId);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Rv(RvId),
    Factor(FactorId),
}

/// Arguments of `f` together with every factor adjacent to one of them
/// (including `f` itself).
pub fn two_step_neighbourhood(
    g: &FactorGraph,
    f: FactorId,
) -> Result<BTreeSet<Node>, NoSuchFactor> {
    if !g.contains_factor(f) {
        return Err(NoSuchFactor(f));
    }
    let mut out = BTreeSet::new();
    for &r in &g.factor(f).args {
        out.insert(Node::Rv(r));
        out.extend(g.neighbours(r).iter().map(|&h| Node::Factor(h)));
    }
    Ok(out)
}

/// What a neighbouring variable looks like from a factor: evidence, range and degree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RvSignature {
    pub evidence: Option<usize>,
    pub range: Vec<String>,
    pub degree: usize,
}

impl RvSignature {
    pub fn of(g: &FactorGraph, r: RvId) -> Self {
        let rv = g.rv(r);
        RvSignature {
            evidence: rv.evidence,
            range: rv.range.clone(),
            degree: g.degree(r),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NeighbourhoodSignature {
    pub factor_degree: usize,
    /// Sorted multiset, one entry per argument.
    pub rv_signatures: Vec<RvSignature>,
}

pub fn neighbourhood_signature(g: &FactorGraph, f: FactorId) -> NeighbourhoodSignature {
    let args = &g.factor(f).args;
    let mut rv_signatures: Vec<RvSignature> = args.iter().map(|&r| RvSignature::of(g, r)).collect();
    rv_signatures.sort();
    NeighbourhoodSignature {
        factor_degree: args.len(),
        rv_signatures,
    }
}

/// Equal degree and a bijection between the arguments that preserves
/// evidence, range and degree. Two sorted multisets are equal exactly when
/// such a bijection exists.
pub fn symmetric_neighbourhoods(g: &FactorGraph, fi: FactorId, fj: FactorId) -> bool {
    neighbourhood_signature(g, fi) == neighbourhood_signature(g, fj)
}

/// Symmetric neighbourhoods, and either one side is unknown or both tables agree.
pub fn possibly_identical(g: &FactorGraph, fi: FactorId, fj: FactorId, tolerance: f64) -> bool {
    if !symmetric_neighbourhoods(g, fi, fj) {
        return false;
    }
    match (g.factor(fi).table(), g.factor(fj).table()) {
        (Some(a), Some(b)) => a.approx_eq(b, tolerance),
        _ => true,
    }
}
