use super::logspace::{evidence_log, normalize_log, to_probs, LogSum};
use super::{InferenceError, Marginal};
use crate::model::{for_each_assignment, FactorGraph, PotentialTable, RvId};

/// Messages stop updating once no entry moves by more than this.
const CONVERGED: f64 = 1e-14;

/// One argument slot of a factor as seen from its variable.
#[derive(Debug, Clone, Copy)]
pub(super) struct Edge {
    pub factor: usize,
    pub position: usize,
    /// How many ground factors of this kind each ground variable touches.
    pub count: usize,
}

#[derive(Debug, Clone)]
pub(super) struct Node {
    pub size: usize,
    pub evidence: Option<usize>,
    /// Ordered by factor index.
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone)]
pub(super) struct FactorNode {
    pub sizes: Vec<usize>,
    pub log_values: Vec<f64>,
    pub args: Vec<usize>,
}

impl FactorNode {
    pub fn new(table: &PotentialTable, args: Vec<usize>) -> Self {
        FactorNode {
            sizes: table.range_sizes().to_vec(),
            log_values: table.values().iter().map(|v| v.ln()).collect(),
            args,
        }
    }
}

/// Synchronous sum-product in log space over a (possibly counted) factor graph.
///
/// A variable sends to edge `e` its evidence plus `count' * m` for every
/// other edge and `(count_e - 1) * m_e` for `e` itself. With all counts 1
/// this is plain loopy belief propagation.
#[derive(Debug, Clone)]
pub(super) struct Schedule {
    pub nodes: Vec<Node>,
    pub factors: Vec<FactorNode>,
}

impl Schedule {
    /// Beliefs (normalized probabilities) per node after at most `iters` rounds.
    pub fn run(&self, iters: usize) -> Vec<Vec<f64>> {
        // to_factor[f][p] and to_var[f][p] indexed by factor slot
        let mut to_factor: Vec<Vec<Vec<f64>>> = self
            .factors
            .iter()
            .map(|f| {
                f.args
                    .iter()
                    .map(|&x| {
                        let mut m = evidence_log(self.nodes[x].size, self.nodes[x].evidence);
                        normalize_log(&mut m);
                        m
                    })
                    .collect()
            })
            .collect();
        let mut to_var: Vec<Vec<Vec<f64>>> = self
            .factors
            .iter()
            .map(|f| {
                f.args
                    .iter()
                    .map(|&x| vec![0.0; self.nodes[x].size])
                    .collect()
            })
            .collect();

        for _ in 0..iters {
            let fresh: Vec<Vec<Vec<f64>>> = self
                .factors
                .iter()
                .zip(&to_factor)
                .map(|(f, incoming)| factor_messages(f, incoming))
                .collect();
            let delta = max_delta(&to_var, &fresh);
            to_var = fresh;
            for (x, node) in self.nodes.iter().enumerate() {
                for (k, e) in node.edges.iter().enumerate() {
                    let mut m = self.gather(x, &to_var, Some(k));
                    normalize_log(&mut m);
                    debug_assert_eq!(self.factors[e.factor].args[e.position], x);
                    to_factor[e.factor][e.position] = m;
                }
            }
            if delta <= CONVERGED {
                break;
            }
        }

        (0..self.nodes.len())
            .map(|x| to_probs(&self.gather(x, &to_var, None)))
            .collect()
    }

    /// Evidence plus counted incoming messages, leaving out one copy of edge `skip`.
    fn gather(&self, x: usize, to_var: &[Vec<Vec<f64>>], skip: Option<usize>) -> Vec<f64> {
        let node = &self.nodes[x];
        let mut acc = evidence_log(node.size, node.evidence);
        for (k, e) in node.edges.iter().enumerate() {
            let c = if skip == Some(k) {
                e.count - 1
            } else {
                e.count
            };
            if c == 0 {
                continue;
            }
            let c = c as f64;
            for (a, m) in acc.iter_mut().zip(&to_var[e.factor][e.position]) {
                *a += c * m;
            }
        }
        acc
    }
}

fn factor_messages(f: &FactorNode, incoming: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut acc: Vec<Vec<LogSum>> = f.sizes.iter().map(|&s| vec![LogSum::new(); s]).collect();
    let mut idx = 0;
    for_each_assignment(&f.sizes, |a| {
        let base = f.log_values[idx];
        idx += 1;
        for p in 0..a.len() {
            let mut w = base;
            for (q, &aq) in a.iter().enumerate() {
                if q != p {
                    w += incoming[q][aq];
                }
            }
            acc[p][a[p]].add(w);
        }
    });
    acc.into_iter()
        .map(|sums| {
            let mut m: Vec<f64> = sums.iter().map(LogSum::value).collect();
            normalize_log(&mut m);
            m
        })
        .collect()
}

fn max_delta(old: &[Vec<Vec<f64>>], new: &[Vec<Vec<f64>>]) -> f64 {
    let mut d: f64 = 0.0;
    for (a, b) in old.iter().flatten().zip(new.iter().flatten()) {
        for (x, y) in a.iter().zip(b) {
            d = d.max((x.exp() - y.exp()).abs());
        }
    }
    d
}

/// Loopy belief propagation on the ground graph. One marginal per variable, in id order.
pub fn loopy_bp(g: &FactorGraph, iters: usize) -> Result<Vec<Marginal>, InferenceError> {
    let mut factors = Vec::with_capacity(g.num_factors());
    for f in g.factors() {
        let t = f
            .table()
            .ok_or_else(|| InferenceError::UnknownFactor(f.name.clone()))?;
        factors.push(FactorNode::new(t, f.args.iter().map(|r| r.0).collect()));
    }
    let mut nodes: Vec<Node> = g
        .rvs()
        .iter()
        .map(|r| Node {
            size: r.range.len(),
            evidence: r.evidence,
            edges: Vec::new(),
        })
        .collect();
    for (fi, f) in g.factors().iter().enumerate() {
        for (p, r) in f.args.iter().enumerate() {
            nodes[r.0].edges.push(Edge {
                factor: fi,
                position: p,
                count: 1,
            });
        }
    }
    let beliefs = Schedule { nodes, factors }.run(iters);
    Ok(beliefs
        .into_iter()
        .enumerate()
        .map(|(i, probs)| Marginal { rv: RvId(i), probs })
        .collect())
}
