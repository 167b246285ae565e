use std::collections::BTreeSet;

use super::logspace::{to_probs, LogSum};
use super::{InferenceError, Marginal};
use crate::model::{for_each_assignment, strides, FactorGraph, PotentialTable, RvId};

/// Default cap on the number of joint assignments visited by enumeration.
pub const DEFAULT_STATE_CAP: u128 = 1 << 24;

fn known_tables(g: &FactorGraph) -> Result<Vec<&PotentialTable>, InferenceError> {
    g.factors()
        .iter()
        .map(|f| {
            f.table()
                .ok_or_else(|| InferenceError::UnknownFactor(f.name.clone()))
        })
        .collect()
}

fn indicator(g: &FactorGraph, rv: RvId, value: usize) -> Marginal {
    let mut probs = vec![0.0; g.range_size(rv)];
    probs[value] = 1.0;
    Marginal { rv, probs }
}

/// Exact marginal by summing the joint over every assignment consistent with the evidence.
pub fn joint_enumeration(
    g: &FactorGraph,
    query: RvId,
    cap: u128,
) -> Result<Marginal, InferenceError> {
    let tables = known_tables(g)?;
    if let Some(e) = g.rv(query).evidence {
        return Ok(indicator(g, query, e));
    }
    let free: Vec<RvId> = g.rv_ids().filter(|&r| g.rv(r).evidence.is_none()).collect();
    let size = free
        .iter()
        .map(|&r| g.range_size(r) as u128)
        .product::<u128>();
    if size > cap {
        return Err(InferenceError::StateSpaceTooLarge { size, cap });
    }
    let sizes: Vec<usize> = free.iter().map(|&r| g.range_size(r)).collect();
    let query_pos = free
        .iter()
        .position(|&r| r == query)
        .expect("query is free");

    let mut full: Vec<usize> = g.rvs().iter().map(|r| r.evidence.unwrap_or(0)).collect();
    let mut acc = vec![LogSum::new(); g.range_size(query)];
    let mut local = Vec::new();
    for_each_assignment(&sizes, |a| {
        for (&r, &x) in free.iter().zip(a) {
            full[r.0] = x;
        }
        let mut w = 0.0;
        for (f, t) in g.factors().iter().zip(&tables) {
            local.clear();
            local.extend(f.args.iter().map(|r| full[r.0]));
            w += t.value(&local).ln();
        }
        acc[a[query_pos]].add(w);
    });
    let log: Vec<f64> = acc.iter().map(LogSum::value).collect();
    Ok(Marginal {
        rv: query,
        probs: to_probs(&log),
    })
}

/// Dense table over a sorted list of variables.
#[derive(Debug, Clone)]
struct Dense {
    vars: Vec<usize>,
    sizes: Vec<usize>,
    values: Vec<f64>,
}

impl Dense {
    /// The factor with evidence variables fixed and removed.
    fn sliced(g: &FactorGraph, args: &[RvId], table: &PotentialTable) -> Dense {
        let mut order: Vec<usize> = (0..args.len())
            .filter(|&p| g.rv(args[p]).evidence.is_none())
            .collect();
        order.sort_by_key(|&p| args[p]);
        let vars: Vec<usize> = order.iter().map(|&p| args[p].0).collect();
        let sizes: Vec<usize> = vars.iter().map(|&v| g.range_size(RvId(v))).collect();
        let mut source: Vec<usize> = args
            .iter()
            .map(|r| g.rv(*r).evidence.unwrap_or(0))
            .collect();
        let mut values = Vec::with_capacity(sizes.iter().product());
        for_each_assignment(&sizes, |a| {
            for (&p, &x) in order.iter().zip(a) {
                source[p] = x;
            }
            values.push(table.value(&source));
        });
        Dense {
            vars,
            sizes,
            values,
        }
    }

    /// Product of `factors`, with `var` summed out when given. Rescaled so the largest entry is 1.
    fn product(
        factors: &[&Dense],
        eliminate: Option<usize>,
        size_of: impl Fn(usize) -> usize,
    ) -> Dense {
        let mut union: Vec<usize> = factors
            .iter()
            .flat_map(|f| f.vars.iter().copied())
            .collect();
        union.sort_unstable();
        union.dedup();
        let sizes: Vec<usize> = union.iter().map(|&v| size_of(v)).collect();
        // per factor, stride of each union position
        let factor_strides: Vec<Vec<usize>> = factors
            .iter()
            .map(|f| {
                let own = strides(&f.sizes);
                union
                    .iter()
                    .map(|v| f.vars.iter().position(|w| w == v).map_or(0, |i| own[i]))
                    .collect()
            })
            .collect();
        let keep: Vec<usize> = (0..union.len())
            .filter(|&i| Some(union[i]) != eliminate)
            .collect();
        let out_vars: Vec<usize> = keep.iter().map(|&i| union[i]).collect();
        let out_sizes: Vec<usize> = keep.iter().map(|&i| sizes[i]).collect();
        let out_strides = strides(&out_sizes);
        let mut values = vec![0.0; out_sizes.iter().product()];
        for_each_assignment(&sizes, |a| {
            let mut prod = 1.0;
            for (f, s) in factors.iter().zip(&factor_strides) {
                let idx: usize = a.iter().zip(s).map(|(x, st)| x * st).sum();
                prod *= f.values[idx];
            }
            let out: usize = keep
                .iter()
                .zip(&out_strides)
                .map(|(&i, st)| a[i] * st)
                .sum();
            values[out] += prod;
        });
        let max = values.iter().copied().fold(0.0, f64::max);
        if max > 0.0 {
            for v in &mut values {
                *v /= max;
            }
        }
        Dense {
            vars: out_vars,
            sizes: out_sizes,
            values,
        }
    }
}

/// Exact marginal by sum-product variable elimination with a min-degree order
/// (ties broken by variable name).
pub fn variable_elimination(g: &FactorGraph, query: RvId) -> Result<Marginal, InferenceError> {
    let tables = known_tables(g)?;
    if let Some(e) = g.rv(query).evidence {
        return Ok(indicator(g, query, e));
    }
    let mut pool: Vec<Option<Dense>> = g
        .factors()
        .iter()
        .zip(&tables)
        .map(|(f, t)| Some(Dense::sliced(g, &f.args, t)))
        .collect();
    let n = g.num_rvs();
    // factor slots mentioning each variable
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, d) in pool.iter().enumerate() {
        for &v in &d.as_ref().expect("fresh").vars {
            holders[v].push(i);
        }
    }
    let size_of = |v: usize| g.range_size(RvId(v));
    let mut by_name: Vec<usize> = (0..n).collect();
    by_name.sort_by(|a, b| g.rv(RvId(*a)).name.cmp(&g.rv(RvId(*b)).name));
    let mut name_rank = vec![0; n];
    for (rank, &v) in by_name.iter().enumerate() {
        name_rank[v] = rank;
    }
    let mut mark = vec![usize::MAX; n];
    let mut degree_of = |v: usize, pool: &[Option<Dense>], holders: &[Vec<usize>]| {
        let mut degree = 0;
        for &h in &holders[v] {
            for &w in &pool[h].as_ref().expect("live").vars {
                if w != v && mark[w] != v {
                    mark[w] = v;
                    degree += 1;
                }
            }
        }
        for &h in &holders[v] {
            for &w in &pool[h].as_ref().expect("live").vars {
                mark[w] = usize::MAX;
            }
        }
        degree
    };
    let eliminable = |v: usize| v != query.0 && g.rv(RvId(v)).evidence.is_none();
    let mut degree = vec![0; n];
    let mut queue = BTreeSet::new();
    for v in (0..n).filter(|&v| eliminable(v)) {
        degree[v] = degree_of(v, &pool, &holders);
        queue.insert((degree[v], name_rank[v], v));
    }

    while let Some((_, _, v)) = queue.pop_first() {
        let taken: Vec<usize> = std::mem::take(&mut holders[v]);
        let factors: Vec<Dense> = taken
            .iter()
            .map(|&h| pool[h].take().expect("live"))
            .collect();
        for f in &factors {
            for &w in &f.vars {
                if w != v {
                    holders[w].retain(|h| !taken.contains(h));
                }
            }
        }
        let refs: Vec<&Dense> = factors.iter().collect();
        let fresh = Dense::product(&refs, Some(v), size_of);
        let id = pool.len();
        for &w in &fresh.vars {
            holders[w].push(id);
        }
        let touched = fresh.vars.clone();
        pool.push(Some(fresh));
        for w in touched.into_iter().filter(|&w| eliminable(w)) {
            queue.remove(&(degree[w], name_rank[w], w));
            degree[w] = degree_of(w, &pool, &holders);
            queue.insert((degree[w], name_rank[w], w));
        }
    }

    let rest: Vec<Dense> = pool.into_iter().flatten().collect();
    let refs: Vec<&Dense> = rest.iter().collect();
    let joint = Dense::product(&refs, None, size_of);
    let mut probs = vec![1.0; g.range_size(query)];
    if joint.vars == [query.0] {
        probs.copy_from_slice(&joint.values);
    }
    let z: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= z;
    }
    Ok(Marginal { rv: query, probs })
}
