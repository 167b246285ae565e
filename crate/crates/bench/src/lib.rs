//! Fixtures shared by the criterion benches.

use liftfg::benchgen::{generate_instance, instance_seed, remove_potentials, GenParams};
use liftfg::{run_lifg, CpOptions, FactorGraph, LiftedModel};

/// Fully known ground-truth graph for size `d`.
pub fn truth(d: usize, seed: u64) -> FactorGraph {
    generate_instance(&GenParams::new(d, instance_seed(seed, d, 0)))
        .expect("generator parameters are valid")
        .graph
}

/// The same graph with a fraction of its factors marked unknown.
pub fn incomplete(d: usize, seed: u64) -> FactorGraph {
    let params = GenParams::new(d, instance_seed(seed, d, 0));
    let g = generate_instance(&params)
        .expect("generator parameters are valid")
        .graph;
    remove_potentials(&g, &params).graph
}

/// Lifted model of the completed instance.
pub fn lifted(d: usize, seed: u64) -> (FactorGraph, LiftedModel) {
    let out = run_lifg(&incomplete(d, seed), 0.0, &CpOptions::default()).expect("valid threshold");
    let m = out.lifted.expect("generated instances lift completely");
    (out.completed, m)
}
