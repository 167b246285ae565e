//! Inference engines.
//!
//! [`joint_enumeration`] is the brute-force oracle; [`variable_elimination`]
//! is the exact engine used for ground truth; [`loopy_bp`] and
//! [`counting_bp`] run the same synchronous sum-product schedule on the
//! ground graph and on a [`LiftedModel`](crate::LiftedModel) respectively.

mod bp;
mod cbp;
mod exact;
mod logspace;

use std::str::FromStr;

use thiserror::Error;

use crate::model::RvId;

pub use bp::loopy_bp;
pub use cbp::counting_bp;
pub use exact::{joint_enumeration, variable_elimination, DEFAULT_STATE_CAP};

pub const DEFAULT_BP_ITERS: usize = 50;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error("factor `{0}` has unknown potentials")]
    UnknownFactor(String),
    #[error("state space of {size} assignments exceeds the cap of {cap}")]
    StateSpaceTooLarge { size: u128, cap: u128 },
    #[error("superfactor `{0}` uses one supervariable in several argument slots")]
    RepeatedSupervar(String),
    #[error("distributions have different lengths ({0} vs {1})")]
    RangeMismatch(usize, usize),
    #[error("reference distribution has a zero entry where the other does not")]
    ZeroReference,
}

/// Distribution of one variable over its range.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    pub rv: RvId,
    pub probs: Vec<f64>,
}

impl Marginal {
    pub fn max_abs_diff(&self, other: &Marginal) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Which argument of the KL divergence is the ground-truth marginal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KlDirection {
    /// D(truth || lifted)
    #[default]
    Pq,
    /// D(lifted || truth)
    Qp,
}

impl FromStr for KlDirection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pq" => Ok(KlDirection::Pq),
            "qp" => Ok(KlDirection::Qp),
            other => Err(format!("unknown KL direction `{other}` (expected pq|qp)")),
        }
    }
}

impl KlDirection {
    pub fn divergence(self, truth: &Marginal, lifted: &Marginal) -> Result<f64, InferenceError> {
        match self {
            KlDirection::Pq => kl_divergence(&truth.probs, &lifted.probs),
            KlDirection::Qp => kl_divergence(&lifted.probs, &truth.probs),
        }
    }
}

/// `sum_x p(x) ln(p(x) / q(x))` with `0 ln(0 / q) = 0`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64, InferenceError> {
    if p.len() != q.len() {
        return Err(InferenceError::RangeMismatch(p.len(), q.len()));
    }
    let mut d = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Err(InferenceError::ZeroReference);
        }
        d += pi * (pi / qi).ln();
    }
    // rounding can dip marginally below zero for identical inputs
    Ok(d.max(0.0))
}
