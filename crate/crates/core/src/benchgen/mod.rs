//! Synthetic cohort-structured instances and the benchmark runner.
//!
//! An instance has `k` cohorts of Boolean variables. Each cohort owns one
//! unary anchor table applied to every member, and each edge of a random tree
//! over the cohorts owns one binary table. Every member of a child cohort is
//! linked to one member of its parent cohort, assigned round-robin, so the
//! ground graph is a forest with `n` anchors plus one link per non-root
//! member.
//!
//! Cohort sizes are random, so an exactly regular linkage between two
//! cohorts would generally need far more than `n` links. Round-robin linkage
//! instead splits every cohort into a handful of intervals and colour passing
//! recovers a refinement of the cohort partition.

mod runner;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cp::{initial_colours, CpOptions, Partition};
use crate::lifg::neighbourhood_signature;
use crate::model::{FactorContent, FactorGraph, FactorId, RvId};

pub use runner::{
    format_csv, format_summary, instance_seed, run_benchmark, Aggregate, BenchConfig, BenchError,
    BenchRecord, BenchResult, CSV_HEADER,
};

/// Attempts at drawing `(k, n)` with `n >= 2k` before giving up.
const MAX_DRAWS: usize = 256;

/// Range potentials are drawn from.
pub const POTENTIAL_RANGE: (f64, f64) = (0.5, 2.0);

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub d: usize,
    pub seed: u64,
    /// Inclusive.
    pub cohort_count_range: (usize, usize),
    /// Inclusive.
    pub rv_count_range: (usize, usize),
    pub unknown_fraction_range: (f64, f64),
    pub theta: f64,
}

impl GenParams {
    pub fn new(d: usize, seed: u64) -> Self {
        GenParams {
            d,
            seed,
            cohort_count_range: (3, 5),
            rv_count_range: (2 * d, 3 * d),
            unknown_fraction_range: (0.05, 0.10),
            theta: 0.0,
        }
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

const GENERATE_STREAM: u64 = 0;
const REMOVE_STREAM: u64 = 1;
const QUERY_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("cannot host {min_cohorts} cohorts with at most {max_rvs} variables (need two variables per cohort)")]
    TooSmall { min_cohorts: usize, max_rvs: usize },
    #[error("invalid parameter range: {0}")]
    BadRange(&'static str),
}

/// A generated ground-truth graph and the cohort of each variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub graph: FactorGraph,
    /// Cohort index per variable id. Cohort 0 is the large one.
    pub cohorts: Vec<usize>,
    /// Parent of each cohort in the cohort tree (`None` for cohort 0).
    pub parents: Vec<Option<usize>>,
}

impl Instance {
    pub fn num_cohorts(&self) -> usize {
        self.parents.len()
    }

    pub fn cohort_partition(&self) -> Vec<Vec<RvId>> {
        let mut blocks = vec![Vec::new(); self.num_cohorts()];
        for (i, &c) in self.cohorts.iter().enumerate() {
            blocks[c].push(RvId(i));
        }
        blocks
    }

    /// True when every block of `p` lies inside one cohort.
    pub fn respects_cohorts(&self, p: &Partition) -> bool {
        p.rv_groups.iter().all(|block| {
            block
                .iter()
                .all(|r| self.cohorts[r.0] == self.cohorts[block[0].0])
        })
    }
}

fn draw_table(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    let (lo, hi) = POTENTIAL_RANGE;
    (0..len).map(|_| rng.gen_range(lo..=hi)).collect()
}

fn draw_sizes(p: &GenParams, rng: &mut impl Rng) -> Result<Vec<usize>, GenError> {
    let (kmin, kmax) = p.cohort_count_range;
    let (nmin, nmax) = p.rv_count_range;
    if kmin == 0 || kmin > kmax {
        return Err(GenError::BadRange("cohort count"));
    }
    if nmin > nmax {
        return Err(GenError::BadRange("variable count"));
    }
    if nmax < 2 * kmin {
        return Err(GenError::TooSmall {
            min_cohorts: kmin,
            max_rvs: nmax,
        });
    }
    for _ in 0..MAX_DRAWS {
        let k = rng.gen_range(kmin..=kmax);
        let n = rng.gen_range(nmin..=nmax);
        if n < 2 * k {
            continue;
        }
        let mut sizes = vec![1; k];
        sizes[0] = n.div_ceil(2);
        for _ in 0..(n - sizes[0] - (k - 1)) {
            sizes[rng.gen_range(1..k)] += 1;
        }
        return Ok(sizes);
    }
    Err(GenError::TooSmall {
        min_cohorts: kmin,
        max_rvs: nmax,
    })
}

/// Draws a ground-truth instance. Identical parameters give identical graphs.
pub fn generate_instance(p: &GenParams) -> Result<Instance, GenError> {
    let mut rng = p.rng(GENERATE_STREAM);
    let sizes = draw_sizes(p, &mut rng)?;
    let k = sizes.len();
    let parents: Vec<Option<usize>> = (0..k)
        .map(|c| (c > 0).then(|| rng.gen_range(0..c)))
        .collect();
    let anchors: Vec<Vec<f64>> = (0..k).map(|_| draw_table(&mut rng, 2)).collect();
    let links: Vec<Vec<f64>> = (0..k).map(|_| draw_table(&mut rng, 4)).collect();

    let mut g = FactorGraph::new();
    let mut members: Vec<Vec<RvId>> = Vec::with_capacity(k);
    let mut cohorts = Vec::new();
    for (c, &size) in sizes.iter().enumerate() {
        members.push(
            (0..size)
                .map(|j| g.add_bool(format!("c{c}_{j:03}")))
                .collect(),
        );
        cohorts.extend(std::iter::repeat_n(c, size));
    }
    for c in 0..k {
        for (j, &r) in members[c].iter().enumerate() {
            g.add_known(format!("anchor{c}_{j:03}"), vec![r], anchors[c].clone());
        }
    }
    for c in 1..k {
        let parent = &members[parents[c].expect("non-root")];
        for (j, &r) in members[c].iter().enumerate() {
            g.add_known(
                format!("link{c}_{j:03}"),
                vec![parent[j % parent.len()], r],
                links[c].clone(),
            );
        }
    }
    Ok(Instance {
        graph: g,
        cohorts,
        parents,
    })
}

/// Outcome of [`remove_potentials`].
#[derive(Debug, Clone, PartialEq)]
pub struct Removal {
    pub graph: FactorGraph,
    /// In selection order.
    pub removed: Vec<FactorId>,
    pub target: usize,
    /// Fewer than `target` factors could be removed under the constraint.
    pub shortfall: bool,
}

/// Marks a random fraction of the factors of `g` as unknown.
///
/// Factors are drawn one at a time in random order. A draw is kept only if
/// afterwards every removed factor still has a known factor that was
/// possibly identical to it in `g`, i.e. one with a symmetric neighbourhood
/// and an equal table.
pub fn remove_potentials(g: &FactorGraph, p: &GenParams) -> Removal {
    let mut rng = p.rng(REMOVE_STREAM);
    let (lo, hi) = p.unknown_fraction_range;
    let u = if lo < hi { rng.gen_range(lo..=hi) } else { lo };
    let target = ((u * g.num_factors() as f64).ceil() as usize).min(g.num_factors());

    // removal never alters ranges, evidence or degrees, so peers can be
    // counted per (signature, table class) once up front
    let opts = CpOptions::default();
    let tables = initial_colours(g, &opts);
    let keys: Vec<_> = g
        .factor_ids()
        .map(|f| (neighbourhood_signature(g, f), tables.factor[f.0]))
        .collect();
    let mut sorted: Vec<&_> = keys.iter().collect();
    sorted.sort();
    sorted.dedup();
    let class: Vec<usize> = keys
        .iter()
        .map(|k| sorted.binary_search(&k).expect("present"))
        .collect();
    let mut known = vec![0usize; sorted.len()];
    for &c in &class {
        known[c] += 1;
    }

    let mut order: Vec<FactorId> = g
        .factor_ids()
        .filter(|f| !g.factor(*f).is_unknown())
        .collect();
    order.shuffle(&mut rng);
    let mut out = g.clone();
    let mut removed = Vec::with_capacity(target);
    for f in order {
        if removed.len() == target {
            break;
        }
        if known[class[f.0]] >= 2 {
            known[class[f.0]] -= 1;
            out.set_content(f, FactorContent::Unknown);
            removed.push(f);
        }
    }
    Removal {
        graph: out,
        shortfall: removed.len() < target,
        removed,
        target,
    }
}

/// `count` distinct variables drawn uniformly without replacement, sorted by id.
pub fn select_queries(g: &FactorGraph, p: &GenParams, count: usize) -> Vec<RvId> {
    let mut rng = p.rng(QUERY_STREAM);
    let mut ids: Vec<RvId> =
        rand::seq::index::sample(&mut rng, g.num_rvs(), count.min(g.num_rvs()))
            .into_iter()
            .map(RvId)
            .collect();
    ids.sort();
    ids
}
