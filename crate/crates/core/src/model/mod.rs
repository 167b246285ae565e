//! Factor graphs whose factors may have unknown potentials.
//!
//! A [`FactorGraph`] holds random variables and factors; edges are implied by
//! the factor argument lists. Node handles ([`RvId`], [`FactorId`]) are dense
//! indices into the graph that created them.

mod format;
mod table;
mod validate;

use std::collections::HashMap;
use std::fmt;

pub use format::{parse_model, serialize_model, ParseError, ParseErrorKind};
pub(crate) use table::strides;
pub use table::{for_each_assignment, PotentialTable, TableShapeError};
pub use validate::{validate, Violation, ViolationKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RvId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FactorId(pub usize);

impl fmt::Display for RvId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rv#{}", self.0)
    }
}

impl fmt::Display for FactorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "factor#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomVariable {
    pub name: String,
    pub range: Vec<String>,
    /// Index into `range` of the observed value.
    pub evidence: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FactorContent {
    Known(PotentialTable),
    Unknown,
}

impl FactorContent {
    pub fn table(&self) -> Option<&PotentialTable> {
        match self {
            FactorContent::Known(t) => Some(t),
            FactorContent::Unknown => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub name: String,
    pub args: Vec<RvId>,
    pub content: FactorContent,
}

impl Factor {
    pub fn is_unknown(&self) -> bool {
        matches!(self.content, FactorContent::Unknown)
    }

    pub fn table(&self) -> Option<&PotentialTable> {
        self.content.table()
    }
}

#[derive(Debug, Clone, Default)]
pub struct FactorGraph {
    rvs: Vec<RandomVariable>,
    factors: Vec<Factor>,
    rv_by_name: HashMap<String, RvId>,
    factor_by_name: HashMap<String, FactorId>,
    // factors incident to each rv, ascending and without repetition
    incidence: Vec<Vec<FactorId>>,
}

/// Structural equality: names, ranges, argument order, contents and evidence.
impl PartialEq for FactorGraph {
    fn eq(&self, other: &Self) -> bool {
        self.rvs == other.rvs && self.factors == other.factors
    }
}

impl FactorGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a random variable. Duplicate names are accepted here and reported by [`validate`].
    pub fn add_rv<S: Into<String>>(
        &mut self,
        name: impl Into<String>,
        range: impl IntoIterator<Item = S>,
    ) -> RvId {
        let id = RvId(self.rvs.len());
        let name = name.into();
        self.rv_by_name.entry(name.clone()).or_insert(id);
        self.rvs.push(RandomVariable {
            name,
            range: range.into_iter().map(Into::into).collect(),
            evidence: None,
        });
        self.incidence.push(Vec::new());
        id
    }

    /// Adds a Boolean variable with range `false true`.
    pub fn add_bool(&mut self, name: impl Into<String>) -> RvId {
        self.add_rv(name, ["false", "true"])
    }

    /// Adds a factor.
    ///
    /// Panics if an argument handle does not belong to this graph.
    pub fn add_factor(
        &mut self,
        name: impl Into<String>,
        args: Vec<RvId>,
        content: FactorContent,
    ) -> FactorId {
        let id = FactorId(self.factors.len());
        for a in &args {
            assert!(
                a.0 < self.rvs.len(),
                "argument {a} is not a variable of this graph"
            );
            let inc = &mut self.incidence[a.0];
            if inc.last() != Some(&id) {
                inc.push(id);
            }
        }
        let name = name.into();
        self.factor_by_name.entry(name.clone()).or_insert(id);
        self.factors.push(Factor {
            name,
            args,
            content,
        });
        id
    }

    /// Convenience wrapper around [`FactorGraph::add_factor`] for a known table.
    ///
    /// Range sizes are taken from the arguments; panics on a length mismatch.
    pub fn add_known(
        &mut self,
        name: impl Into<String>,
        args: Vec<RvId>,
        values: Vec<f64>,
    ) -> FactorId {
        let sizes = args.iter().map(|a| self.rvs[a.0].range.len()).collect();
        let table = PotentialTable::new(sizes, values).expect("table shape");
        self.add_factor(name, args, FactorContent::Known(table))
    }

    pub fn set_evidence(&mut self, rv: RvId, value: Option<usize>) {
        self.rvs[rv.0].evidence = value;
    }

    pub fn set_content(&mut self, f: FactorId, content: FactorContent) {
        self.factors[f.0].content = content;
    }

    pub fn rv(&self, id: RvId) -> &RandomVariable {
        &self.rvs[id.0]
    }

    pub fn factor(&self, id: FactorId) -> &Factor {
        &self.factors[id.0]
    }

    pub fn rvs(&self) -> &[RandomVariable] {
        &self.rvs
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn num_rvs(&self) -> usize {
        self.rvs.len()
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn rv_ids(&self) -> impl Iterator<Item = RvId> + '_ {
        (0..self.rvs.len()).map(RvId)
    }

    pub fn factor_ids(&self) -> impl Iterator<Item = FactorId> + '_ {
        (0..self.factors.len()).map(FactorId)
    }

    pub fn rv_by_name(&self, name: &str) -> Option<RvId> {
        self.rv_by_name.get(name).copied()
    }

    pub fn factor_by_name(&self, name: &str) -> Option<FactorId> {
        self.factor_by_name.get(name).copied()
    }

    pub fn contains_factor(&self, f: FactorId) -> bool {
        f.0 < self.factors.len()
    }

    /// Factors adjacent to `rv`, ascending.
    pub fn neighbours(&self, rv: RvId) -> &[FactorId] {
        &self.incidence[rv.0]
    }

    /// Number of distinct factors adjacent to `rv`.
    pub fn degree(&self, rv: RvId) -> usize {
        self.incidence[rv.0].len()
    }

    pub fn range_size(&self, rv: RvId) -> usize {
        self.rvs[rv.0].range.len()
    }

    pub fn unknown_factors(&self) -> impl Iterator<Item = FactorId> + '_ {
        self.factor_ids().filter(|&f| self.factor(f).is_unknown())
    }

    pub fn num_unknown(&self) -> usize {
        self.unknown_factors().count()
    }

    pub fn is_fully_known(&self) -> bool {
        self.factors.iter().all(|f| !f.is_unknown())
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Three Boolean variables A, B, C with phi1(A, B) and phi2(C, B) sharing `table`.
    pub fn twin_pair_with(table: [f64; 4]) -> FactorGraph {
        let mut g = FactorGraph::new();
        let a = g.add_bool("A");
        let b = g.add_bool("B");
        let c = g.add_bool("C");
        g.add_known("phi1", vec![a, b], table.to_vec());
        g.add_known("phi2", vec![c, b], table.to_vec());
        g
    }

    pub fn twin_pair() -> FactorGraph {
        twin_pair_with([2.0, 3.0, 3.0, 5.0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn incidence_tracks_factor_arguments() {
        let g = fixtures::twin_pair();
        let b = g.rv_by_name("B").unwrap();
        assert_eq!(g.degree(b), 2);
        assert_eq!(g.neighbours(b), &[FactorId(0), FactorId(1)]);
        assert_eq!(g.degree(g.rv_by_name("A").unwrap()), 1);
        assert!(g.is_fully_known());
    }

    #[test]
    fn unknown_factors_are_listed() {
        let mut g = fixtures::twin_pair();
        g.set_content(FactorId(1), FactorContent::Unknown);
        assert_eq!(g.unknown_factors().collect::<Vec<_>>(), vec![FactorId(1)]);
        assert!(!g.is_fully_known());
    }
}
