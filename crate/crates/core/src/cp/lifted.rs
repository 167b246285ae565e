use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::{position_tags, CpOptions, Partition};
use crate::model::{FactorGraph, FactorId, PotentialTable, RvId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompressError {
    #[error("factor group `{0}` contains an unknown factor")]
    UnknownFactor(String),
    #[error("factor group `{0}` mixes different potential tables")]
    TableMismatch(String),
    #[error(
        "partition is not stable: members of variable group `{0}` have different factor counts"
    )]
    Unstable(String),
    #[error("partition does not cover the graph")]
    NotCovering,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Supervar {
    /// Name of the representative (lexicographically smallest member).
    pub name: String,
    pub representative: RvId,
    pub members: Vec<RvId>,
    pub range: Vec<String>,
    pub evidence: Option<usize>,
}

impl Supervar {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Superfactor {
    pub name: String,
    pub representative: FactorId,
    pub members: Vec<FactorId>,
    pub table: PotentialTable,
    /// Supervar index for each argument position of the representative.
    pub args: Vec<usize>,
    /// Canonical position tag per argument (smallest position of its symmetry class).
    pub position_tags: Vec<usize>,
}

impl Superfactor {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Compressed graph of supervariables and superfactors.
///
/// `edge_counts[(x, f)]` is the number of ground factors of superfactor `f`
/// adjacent to any single member of supervar `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedModel {
    pub supervars: Vec<Supervar>,
    pub superfactors: Vec<Superfactor>,
    pub edge_counts: BTreeMap<(usize, usize), usize>,
    rv_to_supervar: Vec<usize>,
    factor_to_superfactor: Vec<usize>,
    member_names: Vec<String>,
}

impl LiftedModel {
    pub fn supervar_of(&self, rv: RvId) -> usize {
        self.rv_to_supervar[rv.0]
    }

    pub fn superfactor_of(&self, f: FactorId) -> usize {
        self.factor_to_superfactor[f.0]
    }

    pub fn edge_count(&self, supervar: usize, superfactor: usize) -> usize {
        self.edge_counts
            .get(&(supervar, superfactor))
            .copied()
            .unwrap_or(0)
    }

    pub fn num_ground_rvs(&self) -> usize {
        self.rv_to_supervar.len()
    }

    pub fn num_ground_factors(&self) -> usize {
        self.factor_to_superfactor.len()
    }

    pub fn max_group_size(&self) -> usize {
        self.supervars.iter().map(Supervar::size).max().unwrap_or(0)
    }

    /// Text form: `rvgroup`, `factorgroup` and `count` sections.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.supervars {
            let _ = write!(out, "rvgroup {}:", s.name);
            for m in &s.members {
                let _ = write!(out, " {}", self.member_name(*m));
            }
            out.push('\n');
        }
        for f in &self.superfactors {
            let _ = write!(out, "factorgroup {} size {} args", f.name, f.size());
            for (p, &x) in f.args.iter().enumerate() {
                let _ = write!(
                    out,
                    " {}:{}",
                    self.supervars[x].name,
                    f.position_tags[p] + 1
                );
            }
            out.push_str(" |");
            for v in f.table.values() {
                let _ = write!(out, " {v:?}");
            }
            out.push('\n');
        }
        for (&(x, f), c) in &self.edge_counts {
            let _ = writeln!(
                out,
                "count {} {} {}",
                self.supervars[x].name, self.superfactors[f].name, c
            );
        }
        out
    }

    fn member_name(&self, rv: RvId) -> &str {
        &self.member_names[rv.0]
    }
}

/// Builds the lifted model of `g` for a colour-passing-stable partition `p`.
pub fn compress(
    g: &FactorGraph,
    p: &Partition,
    opts: &CpOptions,
) -> Result<LiftedModel, CompressError> {
    let mut rv_to_supervar = vec![usize::MAX; g.num_rvs()];
    for (i, block) in p.rv_groups.iter().enumerate() {
        for r in block {
            rv_to_supervar[r.0] = i;
        }
    }
    let mut factor_to_superfactor = vec![usize::MAX; g.num_factors()];
    for (i, block) in p.factor_groups.iter().enumerate() {
        for f in block {
            factor_to_superfactor[f.0] = i;
        }
    }
    if rv_to_supervar.contains(&usize::MAX) || factor_to_superfactor.contains(&usize::MAX) {
        return Err(CompressError::NotCovering);
    }

    let supervars: Vec<Supervar> = p
        .rv_groups
        .iter()
        .map(|block| {
            let rep = *block
                .iter()
                .min_by_key(|r| &g.rv(**r).name)
                .expect("non-empty block");
            let rv = g.rv(rep);
            Supervar {
                name: rv.name.clone(),
                representative: rep,
                members: block.clone(),
                range: rv.range.clone(),
                evidence: rv.evidence,
            }
        })
        .collect();

    let tags = position_tags(g, opts);
    let mut superfactors = Vec::with_capacity(p.factor_groups.len());
    for block in &p.factor_groups {
        let rep = *block
            .iter()
            .min_by_key(|f| &g.factor(**f).name)
            .expect("non-empty block");
        let rep_factor = g.factor(rep);
        let name = rep_factor.name.clone();
        let table = rep_factor
            .table()
            .ok_or_else(|| CompressError::UnknownFactor(name.clone()))?;
        for f in block {
            let t = g
                .factor(*f)
                .table()
                .ok_or_else(|| CompressError::UnknownFactor(name.clone()))?;
            if !t.approx_eq(table, opts.potential_tolerance) {
                return Err(CompressError::TableMismatch(name.clone()));
            }
        }
        superfactors.push(Superfactor {
            name,
            representative: rep,
            members: block.clone(),
            table: table.clone(),
            args: rep_factor
                .args
                .iter()
                .map(|a| rv_to_supervar[a.0])
                .collect(),
            position_tags: tags[rep.0].clone(),
        });
    }

    // per ground variable: superfactor -> number of adjacent ground factors
    let mut edge_counts = BTreeMap::new();
    for (x, s) in supervars.iter().enumerate() {
        let count_of = |r: RvId| {
            let mut m: BTreeMap<usize, usize> = BTreeMap::new();
            for f in g.neighbours(r) {
                *m.entry(factor_to_superfactor[f.0]).or_default() += 1;
            }
            m
        };
        let rep_counts = count_of(s.representative);
        if s.members.iter().any(|&r| count_of(r) != rep_counts) {
            return Err(CompressError::Unstable(s.name.clone()));
        }
        for (f, c) in rep_counts {
            edge_counts.insert((x, f), c);
        }
    }

    // edge endpoints: size(F) * #slots of X in F == count(X, F) * size(X)
    for (fi, f) in superfactors.iter().enumerate() {
        let mut slots: BTreeMap<usize, usize> = BTreeMap::new();
        for &x in &f.args {
            *slots.entry(x).or_default() += 1;
        }
        for (x, s) in supervars.iter().enumerate() {
            let expected = f.size() * slots.get(&x).copied().unwrap_or(0);
            let got = edge_counts.get(&(x, fi)).copied().unwrap_or(0) * s.size();
            if expected != got {
                return Err(CompressError::Unstable(s.name.clone()));
            }
        }
    }

    Ok(LiftedModel {
        supervars,
        superfactors,
        edge_counts,
        rv_to_supervar,
        factor_to_superfactor,
        member_names: g.rvs().iter().map(|r| r.name.clone()).collect(),
    })
}
