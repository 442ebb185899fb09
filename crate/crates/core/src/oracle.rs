//! Reference implementations that check solutions by definition rather than
//! by optimization: two feasibility predicates and a brute-force optimum for
//! small instances. Solvers are validated against these, never the other
//! way around.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::graph::{
    build_transformed_graph, remove_edges, require_edge_connectivity, unit_max_flow,
    ConnectivityError, DerivedSets, NodeId, TransformedGraph,
};
use crate::instance::{Instance, ScenarioSet};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("brute force is capped at {max} nodes, got {n}")]
    TooLarge { n: usize, max: usize },
    #[error(transparent)]
    Connectivity(#[from] ConnectivityError),
}

/// A placement with its cost under every scenario and the worst case over
/// them, the value the robust objective minimizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    /// Chosen nodes, ascending.
    pub chosen: Vec<NodeId>,
    pub robust_cost: u64,
    pub per_scenario_costs: Vec<u64>,
}

impl Solution {
    pub fn evaluate(mut chosen: Vec<NodeId>, scenarios: &ScenarioSet) -> Solution {
        chosen.sort_unstable();
        chosen.dedup();
        let (per_scenario_costs, robust) = robust_cost(&chosen, scenarios);
        Solution {
            chosen,
            robust_cost: robust,
            per_scenario_costs,
        }
    }
}

/// Per-scenario placement costs and their maximum.
pub fn robust_cost(chosen: &[NodeId], scenarios: &ScenarioSet) -> (Vec<u64>, u64) {
    let per: Vec<u64> = scenarios
        .rows()
        .iter()
        .map(|row| chosen.iter().map(|&v| row[v - 1]).sum())
        .collect();
    let max = per.iter().copied().max().unwrap_or(0);
    (per, max)
}

/// True iff the induced subgraph of M on `ids` admits `k` edge-disjoint
/// paths between every pair. One max-flow sweep from a fixed root suffices:
/// the connectivity of a graph is the minimum over single-source flows.
fn induced_connectivity_at_least(m: &TransformedGraph, ids: &[NodeId], k: usize) -> bool {
    if ids.len() <= 1 {
        return true;
    }
    let index: BTreeMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i + 1)).collect();
    let edges: Vec<(usize, usize)> = m
        .m_edges()
        .iter()
        .filter_map(|&(u, v)| Some((*index.get(&u)?, *index.get(&v)?)))
        .collect();
    (2..=ids.len()).all(|t| unit_max_flow(ids.len(), &edges, 1, t, k).0 >= k)
}

/// The constraint system the integer programs encode, checked literally:
/// (a) every node of the graph has at least gamma+1 chosen M-neighbors;
/// (b) every node that gained neighbors in the transformation has at least
///     gamma more chosen M-neighbors than chosen path-set nodes;
/// (c) the chosen set induces a subgraph of M with gamma+1 edge-disjoint
///     paths between every chosen pair.
pub fn feasible_structural(
    inst: &Instance,
    m: &TransformedGraph,
    ds: &DerivedSets,
    chosen: &[NodeId],
) -> bool {
    let set: BTreeSet<NodeId> = chosen.iter().copied().collect();
    let n = inst.n();
    let gamma = inst.gamma;
    let count_in =
        |nodes: &[NodeId]| -> usize { nodes.iter().filter(|v| set.contains(v)).count() };
    for i in 1..=n {
        if count_in(m.neighbors(i)) < gamma + 1 {
            return false;
        }
    }
    for &i in &ds.vbar {
        if count_in(m.neighbors(i)) < count_in(&ds.nprime[&i]) + gamma {
            return false;
        }
    }
    let ids: Vec<NodeId> = set.into_iter().collect();
    induced_connectivity_at_least(m, &ids, gamma + 1)
}

/// All failure sets of up to `max_size` edge indices, the empty set first.
fn failure_sets(edge_count: usize, max_size: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_size {
        let mut next = Vec::new();
        for base in &frontier {
            let start = base.last().map_or(0, |&i| i + 1);
            for i in start..edge_count {
                let mut s: Vec<usize> = base.clone();
                s.push(i);
                next.push(s);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Communication graphs that remain after each failure set of up to
/// `inst.gamma` edges.
fn failure_transforms(inst: &Instance) -> Vec<TransformedGraph> {
    let all_edges: Vec<(NodeId, NodeId)> = inst
        .network
        .edges()
        .iter()
        .map(|&(u, v, _)| (u, v))
        .collect();
    failure_sets(all_edges.len(), inst.gamma)
        .iter()
        .map(|f| {
            let gone: Vec<_> = f.iter().map(|&i| all_edges[i]).collect();
            let net = remove_edges(&inst.network, &gone).expect("failure sets are real edges");
            build_transformed_graph(&net)
        })
        .collect()
}

/// Connected-dominating-set test on one surviving communication graph. The
/// empty set is acceptable only when that graph is complete (no pair needs
/// an intermediary).
fn dominates_connectedly(mf: &TransformedGraph, set: &BTreeSet<NodeId>) -> bool {
    if set.is_empty() {
        return mf.is_complete();
    }
    let root = *set.iter().next().unwrap();
    let mut seen = BTreeSet::from([root]);
    let mut stack = vec![root];
    while let Some(u) = stack.pop() {
        for &v in mf.neighbors(u) {
            if set.contains(&v) && seen.insert(v) {
                stack.push(v);
            }
        }
    }
    if seen.len() != set.len() {
        return false;
    }
    (1..=mf.node_count())
        .all(|v| set.contains(&v) || mf.neighbors(v).iter().any(|u| set.contains(u)))
}

/// The ground-truth requirement: under every failure of up to gamma edges,
/// the chosen set must still dominate the surviving communication graph and
/// hang together inside it. Requires a network that can survive that many
/// failures in the first place.
pub fn feasible_semantic(inst: &Instance, chosen: &[NodeId]) -> Result<bool, ConnectivityError> {
    require_edge_connectivity(&inst.network, inst.gamma)?;
    let set: BTreeSet<NodeId> = chosen.iter().copied().collect();
    Ok(failure_transforms(inst)
        .iter()
        .all(|mf| dominates_connectedly(mf, &set)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Predicate {
    Structural,
    Semantic,
}

/// Exhaustive minimum over all 2^n subsets under the chosen predicate.
/// Ties break toward lower cost, then fewer nodes, then the
/// lexicographically smallest node list, so the result is unique.
/// Returns None when no subset is feasible.
pub fn brute_force_optimum(
    inst: &Instance,
    predicate: Predicate,
) -> Result<Option<Solution>, OracleError> {
    const MAX_N: usize = 16;
    let n = inst.n();
    if n > MAX_N {
        return Err(OracleError::TooLarge { n, max: MAX_N });
    }

    #[allow(clippy::large_enum_variant)]
    enum Prep {
        Structural(TransformedGraph, DerivedSets),
        Semantic(Vec<TransformedGraph>),
    }
    let prep = match predicate {
        Predicate::Structural => {
            let m = build_transformed_graph(&inst.network);
            let ds = crate::graph::derive_sets(&inst.network, &m);
            Prep::Structural(m, ds)
        }
        Predicate::Semantic => {
            require_edge_connectivity(&inst.network, inst.gamma)?;
            Prep::Semantic(failure_transforms(inst))
        }
    };

    let mut best: Option<(u64, usize, Vec<NodeId>)> = None;
    for mask in 0u32..(1 << n) {
        let chosen: Vec<NodeId> = (1..=n).filter(|&v| mask >> (v - 1) & 1 == 1).collect();
        let ok = match &prep {
            Prep::Structural(m, ds) => feasible_structural(inst, m, ds, &chosen),
            Prep::Semantic(transforms) => {
                let set: BTreeSet<NodeId> = chosen.iter().copied().collect();
                transforms.iter().all(|mf| dominates_connectedly(mf, &set))
            }
        };
        if !ok {
            continue;
        }
        let (_, cost) = robust_cost(&chosen, &inst.scenarios);
        let key = (cost, chosen.len(), chosen);
        if best.as_ref().is_none_or(|b| key < *b) {
            best = Some(key);
        }
    }
    Ok(best.map(|(_, _, chosen)| Solution::evaluate(chosen, &inst.scenarios)))
}
