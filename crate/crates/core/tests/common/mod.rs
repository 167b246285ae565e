#![allow(dead_code)]

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use liftfg::model::for_each_assignment;
use liftfg::{FactorContent, FactorGraph, PotentialTable, RvId};

pub const TWIN_PAIR_TABLE: [f64; 4] = [2.0, 3.0, 3.0, 5.0];

pub fn twin_pair() -> FactorGraph {
    let mut g = FactorGraph::new();
    let a = g.add_bool("A");
    let b = g.add_bool("B");
    let c = g.add_bool("C");
    g.add_known("phi1", vec![a, b], TWIN_PAIR_TABLE.to_vec());
    g.add_known("phi2", vec![c, b], TWIN_PAIR_TABLE.to_vec());
    g
}

/// Ground epidemic model for individuals alice, bob and medications m1, m2,
/// one shared table per template factor.
pub fn epidemic() -> FactorGraph {
    let f0 = vec![0.7, 1.3];
    let f1 = vec![1.0, 0.4, 1.8, 0.9, 0.6, 1.5, 2.0, 1.1];
    let f2 = vec![0.8, 1.9, 1.2, 0.5, 1.7, 0.3, 1.4, 1.6];
    let mut g = FactorGraph::new();
    let epid = g.add_bool("Epid");
    g.add_known("f0", vec![epid], f0);
    for x in ["alice", "bob"] {
        let travel = g.add_bool(format!("Travel.{x}"));
        let sick = g.add_bool(format!("Sick.{x}"));
        g.add_known(format!("f1.{x}"), vec![travel, sick, epid], f1.clone());
        for m in ["m1", "m2"] {
            let treat = g.add_bool(format!("Treat.{x}.{m}"));
            g.add_known(format!("f2.{x}.{m}"), vec![treat, sick, epid], f2.clone());
        }
    }
    g
}

/// Random graph over `2..=max_rvs` variables with factors of arity 1 to 3.
/// Every variable is covered; about one in five variables is observed when `evidence` is set.
pub fn random_graph(seed: u64, max_rvs: usize, max_range: usize, evidence: bool) -> FactorGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_rvs);
    let mut g = FactorGraph::new();
    let ids: Vec<RvId> = (0..n)
        .map(|i| {
            let size = rng.gen_range(2..=max_range);
            g.add_rv(format!("x{i:02}"), (0..size).map(|v| format!("v{v}")))
        })
        .collect();
    let m = rng.gen_range(n / 2..=2 * n);
    let mut covered = vec![false; n];
    for j in 0..m {
        let arity = rng.gen_range(1..=3.min(n));
        let args: Vec<RvId> = sample(&mut rng, n, arity)
            .into_iter()
            .map(|i| ids[i])
            .collect();
        for a in &args {
            covered[a.0] = true;
        }
        let len: usize = args.iter().map(|&a| g.range_size(a)).product();
        let values = (0..len).map(|_| rng.gen_range(0.1..3.0)).collect();
        g.add_known(format!("f{j:02}"), args, values);
    }
    for i in 0..n {
        if !covered[i] {
            let len = g.range_size(ids[i]);
            let values = (0..len).map(|_| rng.gen_range(0.1..3.0)).collect();
            g.add_known(format!("u{i:02}"), vec![ids[i]], values);
        }
    }
    if evidence {
        for &r in &ids {
            if rng.gen_bool(0.2) {
                let v = rng.gen_range(0..g.range_size(r));
                g.set_evidence(r, Some(v));
            }
        }
    }
    g
}

/// Copy of `g` without the observed variable `rv`: every factor on `rv` is
/// replaced by its slice at the observed value; factors left without
/// arguments are dropped. Returns the new graph and the id map.
pub fn slice_out(g: &FactorGraph, rv: RvId) -> (FactorGraph, Vec<Option<RvId>>) {
    let value = g.rv(rv).evidence.expect("observed");
    let mut out = FactorGraph::new();
    let mut map = vec![None; g.num_rvs()];
    for r in g.rv_ids().filter(|&r| r != rv) {
        let v = g.rv(r);
        let id = out.add_rv(v.name.clone(), v.range.clone());
        out.set_evidence(id, v.evidence);
        map[r.0] = Some(id);
    }
    for f in g.factors() {
        let t = f.table().expect("known");
        let keep: Vec<usize> = (0..f.args.len()).filter(|&p| f.args[p] != rv).collect();
        if keep.is_empty() {
            continue;
        }
        let sizes: Vec<usize> = keep.iter().map(|&p| t.range_sizes()[p]).collect();
        let mut full = vec![0; f.args.len()];
        if let Some(p) = f.args.iter().position(|&a| a == rv) {
            full[p] = value;
        }
        let mut values = Vec::new();
        for_each_assignment(&sizes, |a| {
            for (&p, &x) in keep.iter().zip(a) {
                full[p] = x;
            }
            values.push(t.value(&full));
        });
        let args = keep
            .iter()
            .map(|&p| map[f.args[p].0].expect("kept"))
            .collect();
        let table = PotentialTable::new(sizes, values).expect("shape");
        out.add_factor(f.name.clone(), args, FactorContent::Known(table));
    }
    (out, map)
}
