//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::hint::black_box;
use std::time::{Duration, Instant};

use liftfg::benchgen::{
    format_csv, generate_instance, instance_seed, remove_potentials, run_benchmark, BenchConfig,
    GenParams,
};
use liftfg::inference::{
    counting_bp, joint_enumeration, loopy_bp, variable_elimination, DEFAULT_BP_ITERS,
    DEFAULT_STATE_CAP,
};
use liftfg::{compress, run_cp, run_lifg, serialize_model, CpOptions, Partition};

const TWIN_PAIR_MAX_TIME: Duration = Duration::from_millis(1);
const PROPERTY_GRAPHS: usize = 210;
const KL_DS: [usize; 5] = [2, 4, 8, 16, 32];
const KL_INSTANCES: usize = 10;
const KL_MEAN_MAX: f64 = 0.01;
const KL_MAX_MAX: f64 = 0.05;
const KL_TIME_BUDGET: Duration = Duration::from_secs(600);
const ORACLE_GRAPHS: u64 = 150;
const ORACLE_TOL: f64 = 1e-10;
const CBP_INSTANCES: usize = 120;
const CBP_TOL: f64 = 1e-9;
const SPEEDUP_DS: [usize; 3] = [64, 128, 256];
const SPEEDUP_INSTANCES: usize = 10;
const SPEEDUP_SHARE: f64 = 0.8;

type Check = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn named(g: &liftfg::FactorGraph, p: &Partition) -> (Vec<Vec<String>>, Vec<Vec<String>>) {
    let (mut rvs, mut fs) = p.named(g);
    rvs.sort();
    fs.sort();
    (rvs, fs)
}

fn strings(groups: &[&[&str]]) -> Vec<Vec<String>> {
    let mut v: Vec<Vec<String>> = groups
        .iter()
        .map(|g| {
            let mut b: Vec<String> = g.iter().map(|s| s.to_string()).collect();
            b.sort();
            b
        })
        .collect();
    v.sort();
    v
}

fn twin_pair_reproduction() -> Outcome {
    let g = common::twin_pair();
    let opts = CpOptions::default();
    let mut times = Vec::new();
    let mut p = run_cp(&g, &opts);
    for _ in 0..5 {
        let start = Instant::now();
        p = black_box(run_cp(black_box(&g), &opts));
        times.push(start.elapsed());
    }
    times.sort();
    let t = times[times.len() / 2];
    let (rvs, fs) = named(&g, &p);
    let ok = rvs == strings(&[&["A", "C"], &["B"]]) && fs == strings(&[&["phi1", "phi2"]]);
    outcome(
        ok && t < TWIN_PAIR_MAX_TIME,
        format!("rv groups {rvs:?}, factor groups {fs:?}, median {t:?}"),
    )
}

fn epidemic_reproduction() -> Outcome {
    let g = common::epidemic();
    let p = run_cp(&g, &CpOptions::default());
    let (rvs, fs) = named(&g, &p);
    let want_rvs = strings(&[
        &["Epid"],
        &["Sick.alice", "Sick.bob"],
        &["Travel.alice", "Travel.bob"],
        &[
            "Treat.alice.m1",
            "Treat.alice.m2",
            "Treat.bob.m1",
            "Treat.bob.m2",
        ],
    ]);
    let want_fs = strings(&[
        &["f0"],
        &["f1.alice", "f1.bob"],
        &["f2.alice.m1", "f2.alice.m2", "f2.bob.m1", "f2.bob.m2"],
    ]);
    outcome(
        rvs == want_rvs && fs == want_fs,
        format!("{} rv groups, {} factor groups", rvs.len(), fs.len()),
    )
}

fn known_graph_lifting() -> Outcome {
    let opts = CpOptions::default();
    let mut mismatches = 0;
    let mut total = 0;
    for i in 0..PROPERTY_GRAPHS {
        let d = [2, 4, 8][i % 3];
        let g = generate_instance(&GenParams::new(d, instance_seed(2, d, i)))
            .unwrap()
            .graph;
        let lifted = run_lifg(&g, 0.0, &opts).unwrap();
        total += 1;
        if lifted.partition != run_cp(&g, &opts) {
            mismatches += 1;
        }
    }
    outcome(
        mismatches == 0,
        format!("{mismatches} mismatches over {total} fully known graphs"),
    )
}

fn unknowns_filled() -> Outcome {
    let opts = CpOptions::default();
    let mut failures = 0;
    let mut total = 0;
    let mut removed = 0;
    let mut shortfalls = 0;
    for i in 0..PROPERTY_GRAPHS {
        let d = [2, 4, 8, 16][i % 4];
        let params = GenParams::new(d, instance_seed(1, d, i));
        let g = generate_instance(&params).unwrap().graph;
        let r = remove_potentials(&g, &params);
        removed += r.removed.len();
        shortfalls += usize::from(r.shortfall);
        let out = run_lifg(&r.graph, 0.0, &opts).unwrap();
        total += 1;
        if out.completed.num_unknown() != 0 || !out.is_complete() {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!("{failures} failures over {total} instances ({removed} unknown factors, {shortfalls} removal shortfalls)"),
    )
}

fn kl_reproduction() -> Outcome {
    let cfg = BenchConfig {
        ds: KL_DS.to_vec(),
        instances: KL_INSTANCES,
        seed: 0,
        repetitions: 0,
        ..BenchConfig::default()
    };
    let start = Instant::now();
    let result = run_benchmark(&cfg).unwrap();
    let elapsed = start.elapsed();
    let mut pass = elapsed <= KL_TIME_BUDGET;
    let mut parts = Vec::new();
    for a in &result.aggregates {
        let mean = a.kl_mean.unwrap_or(f64::NAN);
        let max = a.kl_max.unwrap_or(f64::NAN);
        let ok = a.complete == a.instances && mean <= KL_MEAN_MAX && max <= KL_MAX_MAX;
        pass &= ok;
        parts.push(format!(
            "d={} mean {mean:.2e} max {max:.2e}{}",
            a.d,
            if ok { "" } else { " (over)" }
        ));
    }
    outcome(pass, format!("{}; {elapsed:.1?}", parts.join(", ")))
}

fn oracle_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut queries = 0;
    for seed in 0..ORACLE_GRAPHS {
        let g = common::random_graph(seed, 12, 2, seed % 2 == 1);
        for q in g.rv_ids() {
            let e = joint_enumeration(&g, q, DEFAULT_STATE_CAP).unwrap();
            let v = variable_elimination(&g, q).unwrap();
            worst = worst.max(e.max_abs_diff(&v));
            queries += 1;
        }
    }
    outcome(
        worst <= ORACLE_TOL,
        format!("max |dp| {worst:.2e} over {ORACLE_GRAPHS} graphs, {queries} queries"),
    )
}

fn lifted_exactness() -> Outcome {
    let opts = CpOptions::default();
    let mut worst: f64 = 0.0;
    let mut bit_identical = true;
    for i in 0..CBP_INSTANCES {
        let d = [2, 4, 8, 16, 32, 64][i % 6];
        let params = GenParams::new(d, instance_seed(3, d, i));
        let g = generate_instance(&params).unwrap().graph;
        let out = run_lifg(&remove_potentials(&g, &params).graph, 0.0, &opts).unwrap();
        let m = out.lifted.as_ref().unwrap();
        let ground = loopy_bp(&out.completed, DEFAULT_BP_ITERS).unwrap();
        let lifted = counting_bp(m, DEFAULT_BP_ITERS).unwrap();
        for r in out.completed.rv_ids() {
            worst = worst.max(lifted[m.supervar_of(r)].max_abs_diff(&ground[r.0]));
        }

        let singletons = Partition {
            rv_groups: g.rv_ids().map(|r| vec![r]).collect(),
            factor_groups: g.factor_ids().map(|f| vec![f]).collect(),
        };
        let flat = compress(&out.completed, &singletons, &opts).unwrap();
        for iters in [1, 3, DEFAULT_BP_ITERS] {
            let a = loopy_bp(&out.completed, iters).unwrap();
            let b = counting_bp(&flat, iters).unwrap();
            bit_identical &= a
                .iter()
                .zip(&b)
                .all(|(x, y)| x.rv == y.rv && x.probs == y.probs);
        }
    }
    outcome(
        worst <= CBP_TOL && bit_identical,
        format!("max |dp| {worst:.2e} over {CBP_INSTANCES} instances; unit counts bit-identical: {bit_identical}"),
    )
}

fn median_time(mut run: impl FnMut()) -> Duration {
    run();
    let mut t: Vec<Duration> = (0..3)
        .map(|_| {
            let start = Instant::now();
            run();
            start.elapsed()
        })
        .collect();
    t.sort();
    t[1]
}

fn speedup_trend() -> Outcome {
    let opts = CpOptions::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for d in SPEEDUP_DS {
        let mut faster = 0;
        for i in 0..SPEEDUP_INSTANCES {
            let params = GenParams::new(d, instance_seed(4, d, i));
            let g = generate_instance(&params).unwrap().graph;
            let out = run_lifg(&remove_potentials(&g, &params).graph, 0.0, &opts).unwrap();
            let m = out.lifted.as_ref().unwrap();
            let ground = median_time(|| {
                black_box(loopy_bp(&out.completed, DEFAULT_BP_ITERS).unwrap());
            });
            let lifted = median_time(|| {
                black_box(counting_bp(m, DEFAULT_BP_ITERS).unwrap());
            });
            faster += usize::from(lifted < ground);
        }
        let share = faster as f64 / SPEEDUP_INSTANCES as f64;
        pass &= share >= SPEEDUP_SHARE;
        parts.push(format!("d={d} {faster}/{SPEEDUP_INSTANCES}"));
    }
    outcome(pass, format!("counting BP faster in {}", parts.join(", ")))
}

fn determinism() -> Outcome {
    let cfg = BenchConfig {
        ds: vec![2, 4, 8],
        instances: 4,
        seed: 11,
        repetitions: 1,
        threads: Some(1),
        ..BenchConfig::default()
    };
    let a = format_csv(&run_benchmark(&cfg).unwrap(), cfg.seed, false);
    let b = format_csv(
        &run_benchmark(&BenchConfig {
            threads: Some(4),
            ..cfg.clone()
        })
        .unwrap(),
        cfg.seed,
        false,
    );

    let params = GenParams::new(16, 5);
    let lift_text = || {
        let g = generate_instance(&params).unwrap().graph;
        let out = run_lifg(
            &remove_potentials(&g, &params).graph,
            0.0,
            &CpOptions::default(),
        )
        .unwrap();
        format!(
            "{}{}{}",
            out.report,
            serialize_model(&out.completed),
            out.lifted.map(|m| m.to_text()).unwrap_or_default()
        )
    };
    let same = a == b && lift_text() == lift_text();
    outcome(
        same,
        format!(
            "bench CSV {} bytes, lift output identical across runs: {same}",
            a.len()
        ),
    )
}

fn main() {
    let criteria: [Check; 9] = [
        ("twin pair colour passing groups", twin_pair_reproduction),
        ("epidemic colour passing groups", epidemic_reproduction),
        (
            "lifting a fully known graph equals colour passing",
            known_graph_lifting,
        ),
        ("lifting fills every unknown factor", unknowns_filled),
        ("KL divergence of lifted marginals", kl_reproduction),
        (
            "variable elimination equals enumeration",
            oracle_equivalence,
        ),
        ("counting BP equals ground BP", lifted_exactness),
        ("counting BP faster than ground BP", speedup_trend),
        ("deterministic outputs", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {} {name}: {verdict} ({})",
            i + 1,
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
