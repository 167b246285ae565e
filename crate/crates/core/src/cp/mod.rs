//! Colour passing.
//!
//! Variables start coloured by (range, evidence), known factors by their
//! potential tables and unknown factors with fresh colours. Each round passes
//! colours from variables to factors and back, until the induced partition
//! stops changing.

mod lifted;
mod symmetry;

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::model::{FactorGraph, FactorId, RvId};

pub use lifted::{compress, CompressError, LiftedModel, Superfactor, Supervar};
pub use symmetry::argument_symmetry_classes;

/// How a variable's argument position is reported in factor-to-variable messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PositionMode {
    /// Positions that the factor's table is symmetric in share one tag.
    #[default]
    Canonical,
    /// The literal index in the argument list.
    Literal,
}

impl FromStr for PositionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "canonical" => Ok(PositionMode::Canonical),
            "literal" => Ok(PositionMode::Literal),
            other => Err(format!(
                "unknown position mode `{other}` (expected canonical|literal)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CpOptions {
    pub position_mode: PositionMode,
    /// Absolute tolerance for treating two potential tables as equal. Zero means exact.
    pub potential_tolerance: f64,
}

/// A colour per node. Variable and factor colours live in separate namespaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColourAssignment {
    pub rv: Vec<u32>,
    pub factor: Vec<u32>,
}

impl ColourAssignment {
    pub fn rv_colour(&self, id: RvId) -> u32 {
        self.rv[id.0]
    }

    pub fn factor_colour(&self, id: FactorId) -> u32 {
        self.factor[id.0]
    }

    pub fn num_rv_colours(&self) -> usize {
        count_distinct(&self.rv)
    }

    pub fn num_factor_colours(&self) -> usize {
        count_distinct(&self.factor)
    }

    /// Renames colours to 0..k in order of first appearance by sorted value.
    pub fn normalized(&self) -> ColourAssignment {
        ColourAssignment {
            rv: renumber(&self.rv),
            factor: renumber(&self.factor),
        }
    }

    pub fn partition(&self) -> Partition {
        Partition {
            rv_groups: blocks(&self.rv)
                .into_iter()
                .map(|b| b.into_iter().map(RvId).collect())
                .collect(),
            factor_groups: blocks(&self.factor)
                .into_iter()
                .map(|b| b.into_iter().map(FactorId).collect())
                .collect(),
        }
    }
}

fn count_distinct(colours: &[u32]) -> usize {
    let mut v = colours.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// Dense renaming that preserves the order of keys.
fn renumber<K: Ord + Clone>(keys: &[K]) -> Vec<u32> {
    let mut sorted: Vec<&K> = keys.iter().collect();
    sorted.sort();
    sorted.dedup();
    let ids: BTreeMap<&K, u32> = sorted
        .into_iter()
        .enumerate()
        .map(|(i, k)| (k, i as u32))
        .collect();
    keys.iter().map(|k| ids[k]).collect()
}

// blocks in order of their smallest member
fn blocks(colours: &[u32]) -> Vec<Vec<usize>> {
    let mut first: BTreeMap<u32, usize> = BTreeMap::new();
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, c) in colours.iter().enumerate() {
        let b = *first.entry(*c).or_insert_with(|| {
            out.push(Vec::new());
            out.len() - 1
        });
        out[b].push(i);
    }
    out
}

/// Disjoint, covering groups of variables and of factors.
///
/// Canonical form: members ascending within a block, blocks ordered by their
/// smallest member, so equal groupings compare equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub rv_groups: Vec<Vec<RvId>>,
    pub factor_groups: Vec<Vec<FactorId>>,
}

impl Partition {
    /// Every block of `self` lies inside some block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        fn inside<T: Copy + Ord>(
            fine: &[Vec<T>],
            coarse: &[Vec<T>],
            n: usize,
            idx: impl Fn(T) -> usize,
        ) -> bool {
            let mut owner = vec![usize::MAX; n];
            for (b, block) in coarse.iter().enumerate() {
                for &m in block {
                    owner[idx(m)] = b;
                }
            }
            fine.iter()
                .all(|block| block.iter().all(|&m| owner[idx(m)] == owner[idx(block[0])]))
        }
        let n_rv = self.rv_groups.iter().map(Vec::len).sum();
        let n_f = self.factor_groups.iter().map(Vec::len).sum();
        inside(&self.rv_groups, &coarser.rv_groups, n_rv, |r: RvId| r.0)
            && inside(
                &self.factor_groups,
                &coarser.factor_groups,
                n_f,
                |f: FactorId| f.0,
            )
    }

    /// Group names as sorted name lists, sorted; handy for comparing against expectations.
    pub fn named(&self, g: &FactorGraph) -> (Vec<Vec<String>>, Vec<Vec<String>>) {
        let mut rvs: Vec<Vec<String>> = self
            .rv_groups
            .iter()
            .map(|b| {
                let mut v: Vec<String> = b.iter().map(|&r| g.rv(r).name.clone()).collect();
                v.sort();
                v
            })
            .collect();
        let mut fs: Vec<Vec<String>> = self
            .factor_groups
            .iter()
            .map(|b| {
                let mut v: Vec<String> = b.iter().map(|&f| g.factor(f).name.clone()).collect();
                v.sort();
                v
            })
            .collect();
        rvs.sort();
        fs.sort();
        (rvs, fs)
    }
}

/// Per-factor position tags used in factor-to-variable messages.
pub fn position_tags(g: &FactorGraph, opts: &CpOptions) -> Vec<Vec<usize>> {
    g.factors()
        .iter()
        .map(|f| match (opts.position_mode, f.table()) {
            (PositionMode::Canonical, Some(t)) => {
                argument_symmetry_classes(t, opts.potential_tolerance)
            }
            _ => (0..f.args.len()).collect(),
        })
        .collect()
}

/// Colours before any message passing.
pub fn initial_colours(g: &FactorGraph, opts: &CpOptions) -> ColourAssignment {
    let rv_keys: Vec<(&[String], Option<usize>)> = g
        .rvs()
        .iter()
        .map(|r| (r.range.as_slice(), r.evidence))
        .collect();
    let rv = renumber(&rv_keys);

    let mut known: Vec<FactorId> = g
        .factor_ids()
        .filter(|&f| !g.factor(f).is_unknown())
        .collect();
    let table = |f: FactorId| g.factor(f).table().expect("known factor");
    known.sort_by(|&a, &b| table(a).total_cmp(table(b)).then(a.cmp(&b)));

    let mut factor = vec![0u32; g.num_factors()];
    let mut next = 0u32;
    let mut rep: Option<FactorId> = None;
    for &f in &known {
        match rep {
            Some(r) if table(r).approx_eq(table(f), opts.potential_tolerance) => {}
            _ => {
                rep = Some(f);
                next += 1;
            }
        }
        factor[f.0] = next - 1;
    }
    for f in g.unknown_factors() {
        factor[f.0] = next;
        next += 1;
    }
    ColourAssignment { rv, factor }
}

/// Colour refinement over one graph with its position tags fixed.
pub struct Refiner<'g> {
    graph: &'g FactorGraph,
    tags: Vec<Vec<usize>>,
    // (factor, position) pairs per variable
    slots: Vec<Vec<(FactorId, usize)>>,
}

impl<'g> Refiner<'g> {
    pub fn new(graph: &'g FactorGraph, opts: &CpOptions) -> Self {
        let mut slots = vec![Vec::new(); graph.num_rvs()];
        for f in graph.factor_ids() {
            for (p, a) in graph.factor(f).args.iter().enumerate() {
                slots[a.0].push((f, p));
            }
        }
        Self {
            graph,
            tags: position_tags(graph, opts),
            slots,
        }
    }

    pub fn tags(&self) -> &[Vec<usize>] {
        &self.tags
    }

    /// One full round: variables to factors, then factors to variables.
    pub fn round(&self, c: &ColourAssignment) -> ColourAssignment {
        let g = self.graph;
        let factor_sigs: Vec<(u32, Vec<(usize, u32)>)> = g
            .factor_ids()
            .map(|f| {
                let mut received: Vec<(usize, u32)> = g
                    .factor(f)
                    .args
                    .iter()
                    .enumerate()
                    .map(|(p, a)| (self.tags[f.0][p], c.rv[a.0]))
                    .collect();
                received.sort_unstable();
                (c.factor[f.0], received)
            })
            .collect();
        let factor = renumber(&factor_sigs);

        let rv_sigs: Vec<(u32, Vec<(u32, usize)>)> = g
            .rv_ids()
            .map(|r| {
                let mut received: Vec<(u32, usize)> = self.slots[r.0]
                    .iter()
                    .map(|&(f, p)| (factor[f.0], self.tags[f.0][p]))
                    .collect();
                received.sort_unstable();
                (c.rv[r.0], received)
            })
            .collect();
        let rv = renumber(&rv_sigs);
        ColourAssignment { rv, factor }
    }

    /// Iterates rounds from `start` until the partition is stable. Returns
    /// the stable colours and the number of rounds run.
    pub fn refine(&self, start: &ColourAssignment) -> (ColourAssignment, usize) {
        let mut current = start.normalized();
        let mut counts = (current.num_rv_colours(), current.num_factor_colours());
        let mut rounds = 0;
        loop {
            let next = self.round(&current);
            rounds += 1;
            // every round refines the previous partition, so equal block
            // counts mean equal partitions
            let next_counts = (next.num_rv_colours(), next.num_factor_colours());
            if next_counts == counts {
                return (next, rounds);
            }
            counts = next_counts;
            current = next;
        }
    }
}

/// One round of colour passing.
pub fn cp_round(g: &FactorGraph, c: &ColourAssignment, opts: &CpOptions) -> ColourAssignment {
    Refiner::new(g, opts).round(c)
}

/// Colour passing from the initial colours to a stable partition.
pub fn run_cp(g: &FactorGraph, opts: &CpOptions) -> Partition {
    run_cp_detailed(g, opts).0
}

/// Like [`run_cp`], also returning the stable colours and round count.
pub fn run_cp_detailed(g: &FactorGraph, opts: &CpOptions) -> (Partition, ColourAssignment, usize) {
    let refiner = Refiner::new(g, opts);
    let (colours, rounds) = refiner.refine(&initial_colours(g, opts));
    (colours.partition(), colours, rounds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{twin_pair, twin_pair_with};
    use crate::model::FactorContent;

    fn names(v: &[&[&str]]) -> Vec<Vec<String>> {
        v.iter()
            .map(|b| b.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    #[test]
    fn initial_colours_twin_pair() {
        let g = twin_pair();
        let c = initial_colours(&g, &CpOptions::default());
        assert_eq!(c.rv, vec![0, 0, 0]);
        assert_eq!(c.factor, vec![0, 0]);
    }

    #[test]
    fn evidence_changes_initial_colour() {
        let mut g = twin_pair();
        g.set_evidence(RvId(1), Some(1));
        let c = initial_colours(&g, &CpOptions::default());
        assert_eq!(c.rv[0], c.rv[2]);
        assert_ne!(c.rv[0], c.rv[1]);
    }

    #[test]
    fn unknown_factors_get_unique_colours() {
        let mut g = twin_pair();
        g.set_content(FactorId(0), FactorContent::Unknown);
        g.set_content(FactorId(1), FactorContent::Unknown);
        let c = initial_colours(&g, &CpOptions::default());
        assert_ne!(c.factor[0], c.factor[1]);
    }

    #[test]
    fn twin_pair_first_round_splits_b() {
        let g = twin_pair();
        let opts = CpOptions::default();
        let c = cp_round(&g, &initial_colours(&g, &opts), &opts);
        assert_eq!(c.factor[0], c.factor[1]);
        assert_eq!(c.rv[0], c.rv[2]);
        assert_ne!(c.rv[0], c.rv[1]);
    }

    #[test]
    fn twin_pair_stable_partition() {
        let g = twin_pair();
        let p = run_cp(&g, &CpOptions::default());
        let (rvs, fs) = p.named(&g);
        assert_eq!(rvs, names(&[&["A", "C"], &["B"]]));
        assert_eq!(fs, names(&[&["phi1", "phi2"]]));
    }

    #[test]
    fn literal_positions_depend_on_argument_order() {
        // phi2(B, C) puts C at position 2 while A sits at position 1 of phi1
        let mut g = FactorGraph::new();
        let a = g.add_bool("A");
        let b = g.add_bool("B");
        let c = g.add_bool("C");
        g.add_known("phi1", vec![a, b], vec![2., 3., 3., 5.]);
        g.add_known("phi2", vec![b, c], vec![2., 3., 3., 5.]);
        let literal = CpOptions {
            position_mode: PositionMode::Literal,
            ..Default::default()
        };
        assert_eq!(run_cp(&g, &literal).rv_groups.len(), 3);
        let (rvs, _) = run_cp(&g, &CpOptions::default()).named(&g);
        assert_eq!(rvs, names(&[&["A", "C"], &["B"]]));
        // the twin pair grouping is also recovered literally with order (C, B)
        let (rvs, _) = run_cp(&twin_pair(), &literal).named(&twin_pair());
        assert_eq!(rvs, names(&[&["A", "C"], &["B"]]));
    }

    #[test]
    fn fixed_point_is_idempotent() {
        let g = twin_pair();
        let opts = CpOptions::default();
        let (p, c, _) = run_cp_detailed(&g, &opts);
        assert_eq!(cp_round(&g, &c, &opts).partition(), p);
    }

    #[test]
    fn single_rv_single_factor() {
        let mut g = FactorGraph::new();
        let a = g.add_bool("A");
        g.add_known("f", vec![a], vec![3.0, 1.0]);
        let opts = CpOptions::default();
        let c0 = initial_colours(&g, &opts);
        assert_eq!(cp_round(&g, &c0, &opts).partition(), c0.partition());
    }

    #[test]
    fn distinct_tables_give_singletons() {
        let g = {
            let mut g = twin_pair_with([1., 2., 3., 4.]);
            g.set_content(
                FactorId(1),
                FactorContent::Known(
                    crate::PotentialTable::new(vec![2, 2], vec![4., 3., 2., 1.]).unwrap(),
                ),
            );
            g
        };
        let p = run_cp(&g, &CpOptions::default());
        assert_eq!(p.rv_groups.len(), 3);
        assert_eq!(p.factor_groups.len(), 2);
    }

    #[test]
    fn tolerance_merges_near_equal_tables() {
        let mut g = twin_pair();
        g.set_content(
            FactorId(1),
            FactorContent::Known(
                crate::PotentialTable::new(vec![2, 2], vec![2., 3., 3., 5. + 1e-12]).unwrap(),
            ),
        );
        assert_eq!(run_cp(&g, &CpOptions::default()).factor_groups.len(), 2);
        let loose = CpOptions {
            potential_tolerance: 1e-9,
            ..Default::default()
        };
        assert_eq!(run_cp(&g, &loose).factor_groups.len(), 1);
    }

    #[test]
    fn refinement_check() {
        let g = twin_pair();
        let opts = CpOptions::default();
        let c0 = initial_colours(&g, &opts);
        let c1 = cp_round(&g, &c0, &opts);
        assert!(c1.partition().refines(&c0.partition()));
        assert!(!c0.partition().refines(&c1.partition()));
    }
}
