//! Lifting propositional factor graphs that may contain factors with unknown
//! potentials.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: factor graphs, potential tables and the text file format.
//! * [`cp`]: colour passing: colour refinement to a stable partition and
//!   compression into a [`LiftedModel`].
//! * [`lifg`]: grouping of unknown factors with possibly identical known
//!   factors, potential transfer, then colour passing on the result.
//! * [`inference`]: enumeration, variable elimination, loopy belief
//!   propagation, counting belief propagation and KL divergence.
//! * [`benchgen`]: synthetic cohort-structured instances and the benchmark
//!   runner.

pub mod benchgen;
pub mod cp;
pub mod inference;
pub mod lifg;
pub mod model;

pub use cp::{
    compress, run_cp, ColourAssignment, CompressError, CpOptions, LiftedModel, Partition,
    PositionMode, Superfactor, Supervar,
};
pub use inference::{InferenceError, Marginal};
pub use lifg::{run_lifg, LiftOutcome, LiftReport};
pub use model::{
    parse_model, serialize_model, validate, Factor, FactorContent, FactorGraph, FactorId,
    ParseError, PotentialTable, RandomVariable, RvId, Violation,
};
