//! Lifting graphs that contain unknown factors.
//!
//! Unknown factors are matched against known factors through their 2-step
//! neighbourhoods. Possibly identical unknown factors share a colour; each
//! unknown factor then adopts the potentials of the largest agreeing group of
//! possibly identical known factors, provided that group is large enough
//! relative to all candidates (threshold `theta`). Colour passing on the
//! modified graph produces the final groups.
//!
//! Symmetry of neighbourhoods is equality of [`NeighbourhoodSignature`]s, an
//! equivalence relation. Inside one candidate set every pair therefore has
//! symmetric neighbourhoods already, and "pairwise possibly identical" reduces
//! to equal tables: the largest such subset is the largest table class.

mod neighbourhood;

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::cp::{
    compress, initial_colours, ColourAssignment, CompressError, CpOptions, LiftedModel, Partition,
    Refiner,
};
use crate::model::{FactorContent, FactorGraph, FactorId, PotentialTable};

pub use neighbourhood::{
    neighbourhood_signature, possibly_identical, symmetric_neighbourhoods, two_step_neighbourhood,
    NeighbourhoodSignature, NoSuchFactor, Node, RvSignature,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LiftError {
    #[error("threshold {0} is outside [0, 1]")]
    Threshold(f64),
    #[error("cannot align `{unknown}` with `{donor}`: neighbourhoods are not symmetric")]
    Alignment { unknown: String, donor: String },
    #[error(transparent)]
    Compress(#[from] CompressError),
}

/// The agreeing subset chosen from a candidate set.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Sorted by factor name.
    pub members: Vec<FactorId>,
    pub table: PotentialTable,
    /// `members.len() / candidates.len()`.
    pub ratio: f64,
}

/// Largest class of equal tables among `candidates`; ties go to the class
/// holding the lexicographically smallest factor name.
pub fn largest_table_class(
    g: &FactorGraph,
    candidates: &[FactorId],
    tolerance: f64,
) -> Option<Vec<FactorId>> {
    let mut by_name: Vec<FactorId> = candidates.to_vec();
    by_name.sort_by(|a, b| g.factor(*a).name.cmp(&g.factor(*b).name));
    let mut classes: Vec<Vec<FactorId>> = Vec::new();
    for f in by_name {
        let t = g.factor(f).table().expect("candidates are known factors");
        match classes.iter_mut().find(|c| {
            g.factor(c[0])
                .table()
                .is_some_and(|r| r.approx_eq(t, tolerance))
        }) {
            Some(c) => c.push(f),
            None => classes.push(vec![f]),
        }
    }
    // classes are ordered by their smallest name, so the first maximum wins ties
    let mut best: Option<Vec<FactorId>> = None;
    for c in classes {
        if best.as_ref().is_none_or(|b| c.len() > b.len()) {
            best = Some(c);
        }
    }
    best
}

/// Picks the agreeing subset of `candidates`, or `None` when there are no
/// candidates or the agreement ratio is below `theta`.
pub fn select_candidates(
    g: &FactorGraph,
    candidates: &[FactorId],
    theta: f64,
    tolerance: f64,
) -> Option<Selection> {
    let members = largest_table_class(g, candidates, tolerance)?;
    let ratio = members.len() as f64 / candidates.len() as f64;
    if ratio < theta {
        return None;
    }
    let table = g.factor(members[0]).table().expect("known").clone();
    Some(Selection {
        members,
        table,
        ratio,
    })
}

/// `source`'s table rearranged to `unknown`'s argument order.
///
/// Arguments are paired by equal (evidence, range, degree); several arguments
/// with the same triple are paired in argument-list order.
pub fn transfer_potentials(
    g: &FactorGraph,
    unknown: FactorId,
    source: FactorId,
) -> Result<PotentialTable, LiftError> {
    let fail = || LiftError::Alignment {
        unknown: g.factor(unknown).name.clone(),
        donor: g.factor(source).name.clone(),
    };
    let src = g.factor(source);
    let table = src.table().ok_or_else(fail)?;
    let unk_args = &g.factor(unknown).args;
    if unk_args.len() != src.args.len() {
        return Err(fail());
    }
    let src_sigs: Vec<RvSignature> = src.args.iter().map(|&r| RvSignature::of(g, r)).collect();
    let mut used = vec![false; src.args.len()];
    let mut order = Vec::with_capacity(unk_args.len());
    for &r in unk_args {
        let sig = RvSignature::of(g, r);
        let q = (0..src_sigs.len())
            .find(|&q| !used[q] && src_sigs[q] == sig)
            .ok_or_else(fail)?;
        used[q] = true;
        order.push(q);
    }
    Ok(table.permute(&order))
}

/// Outcome for one unknown factor.
#[derive(Debug, Clone, PartialEq)]
pub struct UnknownRecord {
    pub factor: FactorId,
    pub name: String,
    pub candidates: usize,
    pub selected: usize,
    /// NaN when there are no candidates.
    pub ratio: f64,
    /// Representative of the selected class, when a table was transferred.
    pub transferred_from: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LiftReport {
    pub records: Vec<UnknownRecord>,
}

impl LiftReport {
    pub fn is_complete(&self) -> bool {
        self.records.iter().all(|r| r.transferred_from.is_some())
    }
}

impl fmt::Display for LiftReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.records {
            let mut line = String::new();
            let _ = write!(
                line,
                "unknown {} candidates {} selected {} ratio {} transferred {}",
                r.name,
                r.candidates,
                r.selected,
                r.ratio,
                r.transferred_from.as_deref().unwrap_or("none")
            );
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LiftOutcome {
    /// Input graph with transferred tables filled in.
    pub completed: FactorGraph,
    pub partition: Partition,
    pub colours: ColourAssignment,
    /// Present only when every unknown factor received a table.
    pub lifted: Option<LiftedModel>,
    pub report: LiftReport,
}

impl LiftOutcome {
    pub fn is_complete(&self) -> bool {
        self.lifted.is_some()
    }
}

/// Runs the full lifting procedure on `g` with agreement threshold `theta`.
pub fn run_lifg(g: &FactorGraph, theta: f64, opts: &CpOptions) -> Result<LiftOutcome, LiftError> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(LiftError::Threshold(theta));
    }
    let tol = opts.potential_tolerance;
    let mut colours = initial_colours(g, opts);

    let signatures: Vec<NeighbourhoodSignature> = g
        .factor_ids()
        .map(|f| neighbourhood_signature(g, f))
        .collect();
    let mut known_by_sig: BTreeMap<&NeighbourhoodSignature, Vec<FactorId>> = BTreeMap::new();
    let mut unknown_by_sig: BTreeMap<&NeighbourhoodSignature, Vec<FactorId>> = BTreeMap::new();
    for f in g.factor_ids() {
        let bucket = if g.factor(f).is_unknown() {
            &mut unknown_by_sig
        } else {
            &mut known_by_sig
        };
        bucket.entry(&signatures[f.0]).or_default().push(f);
    }
    let by_name =
        |v: &mut Vec<FactorId>| v.sort_by(|a, b| g.factor(*a).name.cmp(&g.factor(*b).name));

    // phase 1: possibly identical unknown factors share the colour of the first by name
    for class in unknown_by_sig.values_mut() {
        by_name(class);
        let c = colours.factor[class[0].0];
        for f in class.iter() {
            colours.factor[f.0] = c;
        }
    }

    let mut unknowns: Vec<FactorId> = g.unknown_factors().collect();
    by_name(&mut unknowns);

    // phase 2: adopt the agreeing known candidates
    let mut completed = g.clone();
    let mut records = Vec::with_capacity(unknowns.len());
    let mut class_choice: BTreeMap<&NeighbourhoodSignature, Option<Vec<FactorId>>> =
        BTreeMap::new();
    for &fi in &unknowns {
        let sig = &signatures[fi.0];
        let mut candidates = known_by_sig.get(sig).cloned().unwrap_or_default();
        by_name(&mut candidates);
        let largest = largest_table_class(g, &candidates, tol);
        let ratio = largest
            .as_ref()
            .map_or(f64::NAN, |c| c.len() as f64 / candidates.len() as f64);
        let selection = select_candidates(g, &candidates, theta, tol);
        let chosen = selection.as_ref().map(|s| s.members.clone());
        let previous = class_choice.entry(sig).or_insert_with(|| chosen.clone());
        assert_eq!(
            *previous, chosen,
            "unknown factors of one class must agree on their selection"
        );

        let mut transferred_from = None;
        if let Some(sel) = &selection {
            let c = colours.factor[fi.0];
            for f in &sel.members {
                colours.factor[f.0] = c;
            }
            let table = transfer_potentials(g, fi, sel.members[0])?;
            completed.set_content(fi, FactorContent::Known(table));
            transferred_from = Some(g.factor(sel.members[0]).name.clone());
        }
        records.push(UnknownRecord {
            factor: fi,
            name: g.factor(fi).name.clone(),
            candidates: candidates.len(),
            selected: largest.map_or(0, |c| c.len()),
            ratio,
            transferred_from,
        });
    }
    let report = LiftReport { records };

    // a colour never spans two different tables: a transferred table that had
    // to be permuted leaves its source's colour
    let table_classes = initial_colours(&completed, opts);
    let keys: Vec<(u32, Option<u32>)> = completed
        .factor_ids()
        .map(|f| {
            let t = (!completed.factor(f).is_unknown()).then(|| table_classes.factor[f.0]);
            (colours.factor[f.0], t)
        })
        .collect();
    colours.factor = dense(&keys);

    let (colours, _) = Refiner::new(&completed, opts).refine(&colours);
    let partition = colours.partition();
    let lifted = if report.is_complete() {
        Some(compress(&completed, &partition, opts)?)
    } else {
        None
    };
    Ok(LiftOutcome {
        completed,
        partition,
        colours,
        lifted,
        report,
    })
}

fn dense<K: Ord>(keys: &[K]) -> Vec<u32> {
    let mut sorted: Vec<&K> = keys.iter().collect();
    sorted.sort();
    sorted.dedup();
    keys.iter()
        .map(|k| sorted.binary_search(&k).expect("present") as u32)
        .collect()
}
