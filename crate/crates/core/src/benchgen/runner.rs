use std::fmt::Write as _;
use std::hint::black_box;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use super::{generate_instance, remove_potentials, select_queries, GenError, GenParams};
use crate::cp::CpOptions;
use crate::inference::{
    counting_bp, variable_elimination, InferenceError, KlDirection, DEFAULT_BP_ITERS,
};
use crate::lifg::{run_lifg, LiftError};

pub const CSV_HEADER: &str =
    "d,seed,instance,n_rvs,n_factors,n_unknown,n_rv_groups,n_factor_groups,kl_mean,kl_max,t_exact_ns,t_lifted_ns,complete";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub ds: Vec<usize>,
    pub instances: usize,
    pub seed: u64,
    pub theta: f64,
    pub kl_direction: KlDirection,
    pub iters: usize,
    /// KL is only computed for `d` up to this value.
    pub exact_limit: usize,
    /// Timed repetitions per engine, after one discarded warm-up. Zero disables timing.
    pub repetitions: usize,
    /// Worker count; `None` reads `LIFTFG_THREADS`, then falls back to rayon's default.
    pub threads: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            ds: vec![2, 4, 8, 16, 32],
            instances: 10,
            seed: 0,
            theta: 0.0,
            kl_direction: KlDirection::Pq,
            iters: DEFAULT_BP_ITERS,
            exact_limit: 32,
            repetitions: 5,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchError {
    #[error("d={d}: {source}")]
    Generate { d: usize, source: GenError },
    #[error(transparent)]
    Lift(#[from] LiftError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error("worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub d: usize,
    pub seed: u64,
    pub instance: usize,
    pub n_rvs: usize,
    pub n_factors: usize,
    pub n_unknown: usize,
    pub removal_shortfall: bool,
    pub n_rv_groups: usize,
    pub n_factor_groups: usize,
    pub max_group_size: usize,
    /// One value per query; empty when the lift is incomplete or `d` exceeds the exact limit.
    pub kl: Vec<f64>,
    /// Largest |CBP - VE| on the completed graph over the queries.
    pub cbp_check: Option<f64>,
    pub t_exact_ns: Option<u128>,
    pub t_lifted_ns: Option<u128>,
    pub complete: bool,
}

impl BenchRecord {
    pub fn kl_mean(&self) -> Option<f64> {
        (!self.kl.is_empty()).then(|| self.kl.iter().sum::<f64>() / self.kl.len() as f64)
    }

    pub fn kl_max(&self) -> Option<f64> {
        self.kl.iter().copied().reduce(f64::max)
    }
}

/// Summary over all instances of one `d`. KL statistics pool every query of every complete instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub d: usize,
    pub instances: usize,
    pub complete: usize,
    pub mean_rvs: f64,
    pub mean_factors: f64,
    pub mean_unknown: f64,
    pub mean_rv_groups: f64,
    pub mean_factor_groups: f64,
    pub max_group_size: usize,
    pub kl_mean: Option<f64>,
    pub kl_std: Option<f64>,
    pub kl_max: Option<f64>,
    pub t_exact_ns: Option<f64>,
    pub t_lifted_ns: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    /// Ordered by `d` as given, then instance id.
    pub records: Vec<BenchRecord>,
    pub aggregates: Vec<Aggregate>,
}

/// Seed of instance `i` at size `d`, derived from the base seed.
pub fn instance_seed(base: u64, d: usize, i: usize) -> u64 {
    let mut z = base
        ^ (d as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (i as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    // splitmix64 finalizer
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn median_ns(repetitions: usize, mut run: impl FnMut()) -> Option<u128> {
    if repetitions == 0 {
        return None;
    }
    run();
    let mut samples: Vec<u128> = (0..repetitions)
        .map(|_| {
            let start = Instant::now();
            run();
            start.elapsed().as_nanos().max(1)
        })
        .collect();
    samples.sort_unstable();
    Some(samples[samples.len() / 2])
}

fn run_instance(cfg: &BenchConfig, d: usize, instance: usize) -> Result<BenchRecord, BenchError> {
    let mut params = GenParams::new(d, instance_seed(cfg.seed, d, instance));
    params.theta = cfg.theta;
    let truth = generate_instance(&params)
        .map_err(|source| BenchError::Generate { d, source })?
        .graph;
    let removal = remove_potentials(&truth, &params);
    let opts = CpOptions::default();
    let outcome = run_lifg(&removal.graph, params.theta, &opts)?;
    let queries = select_queries(&truth, &params, d);

    let mut record = BenchRecord {
        d,
        seed: params.seed,
        instance,
        n_rvs: truth.num_rvs(),
        n_factors: truth.num_factors(),
        n_unknown: removal.removed.len(),
        removal_shortfall: removal.shortfall,
        n_rv_groups: outcome.partition.rv_groups.len(),
        n_factor_groups: outcome.partition.factor_groups.len(),
        max_group_size: outcome
            .partition
            .rv_groups
            .iter()
            .map(Vec::len)
            .max()
            .unwrap_or(0),
        kl: Vec::new(),
        cbp_check: None,
        t_exact_ns: None,
        t_lifted_ns: None,
        complete: outcome.is_complete(),
    };
    let Some(lifted) = &outcome.lifted else {
        return Ok(record);
    };

    let beliefs = counting_bp(lifted, cfg.iters)?;
    if d <= cfg.exact_limit {
        let mut check: f64 = 0.0;
        for &q in &queries {
            let p = variable_elimination(&truth, q)?;
            let l = variable_elimination(&outcome.completed, q)?;
            record.kl.push(cfg.kl_direction.divergence(&p, &l)?);
            let c = &beliefs[lifted.supervar_of(q)];
            check = check.max(c.max_abs_diff(&l));
        }
        record.cbp_check = Some(check);
    }

    record.t_exact_ns = median_ns(cfg.repetitions, || {
        for &q in &queries {
            black_box(variable_elimination(&truth, q).expect("checked above"));
        }
    });
    record.t_lifted_ns = median_ns(cfg.repetitions, || {
        black_box(counting_bp(lifted, cfg.iters).expect("checked above"));
    });
    Ok(record)
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

fn aggregate(d: usize, records: &[BenchRecord]) -> Aggregate {
    let kl: Vec<f64> = records.iter().flat_map(|r| r.kl.iter().copied()).collect();
    let kl_mean = mean(kl.iter().copied());
    let kl_std = kl_mean
        .map(|m| (kl.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / kl.len() as f64).sqrt());
    let stat =
        |f: fn(&BenchRecord) -> usize| mean(records.iter().map(|r| f(r) as f64)).unwrap_or(0.0);
    Aggregate {
        d,
        instances: records.len(),
        complete: records.iter().filter(|r| r.complete).count(),
        mean_rvs: stat(|r| r.n_rvs),
        mean_factors: stat(|r| r.n_factors),
        mean_unknown: stat(|r| r.n_unknown),
        mean_rv_groups: stat(|r| r.n_rv_groups),
        mean_factor_groups: stat(|r| r.n_factor_groups),
        max_group_size: records.iter().map(|r| r.max_group_size).max().unwrap_or(0),
        kl_mean,
        kl_std,
        kl_max: kl.iter().copied().reduce(f64::max),
        t_exact_ns: mean(
            records
                .iter()
                .filter_map(|r| r.t_exact_ns)
                .map(|t| t as f64),
        ),
        t_lifted_ns: mean(
            records
                .iter()
                .filter_map(|r| r.t_lifted_ns)
                .map(|t| t as f64),
        ),
    }
}

fn pool_size(cfg: &BenchConfig) -> Option<usize> {
    cfg.threads.or_else(|| {
        std::env::var("LIFTFG_THREADS")
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .filter(|&n| n > 0)
    })
}

/// Runs every instance of the battery. Output order does not depend on the worker count.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchResult, BenchError> {
    let jobs: Vec<(usize, usize)> = cfg
        .ds
        .iter()
        .flat_map(|&d| (0..cfg.instances).map(move |i| (d, i)))
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = pool_size(cfg) {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| BenchError::Pool(e.to_string()))?;
    let records: Vec<BenchRecord> = pool.install(|| {
        jobs.par_iter()
            .map(|&(d, i)| run_instance(cfg, d, i))
            .collect::<Result<_, _>>()
    })?;
    let aggregates = cfg
        .ds
        .iter()
        .map(|&d| {
            let rs: Vec<BenchRecord> = records.iter().filter(|r| r.d == d).cloned().collect();
            aggregate(d, &rs)
        })
        .collect();
    Ok(BenchResult {
        records,
        aggregates,
    })
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per instance, then one `aggregate` row per `d`. With `timing` off the time columns stay empty.
pub fn format_csv(result: &BenchResult, base_seed: u64, timing: bool) -> String {
    let time = |t: Option<String>| {
        if timing {
            t.unwrap_or_default()
        } else {
            String::new()
        }
    };
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &result.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.d,
            r.seed,
            r.instance,
            r.n_rvs,
            r.n_factors,
            r.n_unknown,
            r.n_rv_groups,
            r.n_factor_groups,
            opt(r.kl_mean()),
            opt(r.kl_max()),
            time(r.t_exact_ns.map(|t| t.to_string())),
            time(r.t_lifted_ns.map(|t| t.to_string())),
            r.complete
        );
    }
    for a in &result.aggregates {
        let _ = writeln!(
            out,
            "{},{},aggregate,{},{},{},{},{},{},{},{},{},{}/{}",
            a.d,
            base_seed,
            a.mean_rvs,
            a.mean_factors,
            a.mean_unknown,
            a.mean_rv_groups,
            a.mean_factor_groups,
            opt(a.kl_mean),
            opt(a.kl_max),
            time(a.t_exact_ns.map(|t| format!("{t:.0}"))),
            time(a.t_lifted_ns.map(|t| format!("{t:.0}"))),
            a.complete,
            a.instances
        );
    }
    out
}

/// Human-readable table of the aggregates.
pub fn format_summary(result: &BenchResult, timing: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>5} {:>9} {:>8} {:>9} {:>9} {:>10} {:>11} {:>11} {:>11} {:>13} {:>13}",
        "d",
        "complete",
        "rvs",
        "rv_grp",
        "fac_grp",
        "max_group",
        "kl_mean",
        "kl_std",
        "kl_max",
        "t_exact_ms",
        "t_lifted_ms"
    );
    let sci = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.3e}"));
    let ms = |v: Option<f64>| match v {
        Some(t) if timing => format!("{:.3}", t / 1e6),
        _ => "-".to_string(),
    };
    for a in &result.aggregates {
        let _ = writeln!(
            out,
            "{:>5} {:>9} {:>8.1} {:>9.1} {:>9.1} {:>10} {:>11} {:>11} {:>11} {:>13} {:>13}",
            a.d,
            format!("{}/{}", a.complete, a.instances),
            a.mean_rvs,
            a.mean_rv_groups,
            a.mean_factor_groups,
            a.max_group_size,
            sci(a.kl_mean),
            sci(a.kl_std),
            sci(a.kl_max),
            ms(a.t_exact_ns),
            ms(a.t_lifted_ns)
        );
    }
    out
}
