use super::bp::{Edge, FactorNode, Node, Schedule};
use super::{InferenceError, Marginal};
use crate::cp::LiftedModel;

/// Counting belief propagation on a lifted model.
///
/// Returns one marginal per supervariable, labelled with its representative.
/// Every member of a supervariable shares that marginal.
pub fn counting_bp(m: &LiftedModel, iters: usize) -> Result<Vec<Marginal>, InferenceError> {
    let mut nodes: Vec<Node> = m
        .supervars
        .iter()
        .map(|s| Node {
            size: s.range.len(),
            evidence: s.evidence,
            edges: Vec::new(),
        })
        .collect();
    let mut factors = Vec::with_capacity(m.superfactors.len());
    for (fi, f) in m.superfactors.iter().enumerate() {
        let mut seen = vec![false; nodes.len()];
        for (p, &x) in f.args.iter().enumerate() {
            if std::mem::replace(&mut seen[x], true) {
                return Err(InferenceError::RepeatedSupervar(f.name.clone()));
            }
            nodes[x].edges.push(Edge {
                factor: fi,
                position: p,
                count: m.edge_count(x, fi),
            });
        }
        factors.push(FactorNode::new(&f.table, f.args.clone()));
    }
    let beliefs = Schedule { nodes, factors }.run(iters);
    Ok(beliefs
        .into_iter()
        .zip(&m.supervars)
        .map(|(probs, s)| Marginal {
            rv: s.representative,
            probs,
        })
        .collect())
}
