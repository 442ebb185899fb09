//! Flow-based formulation: for every node pair, gamma+1 unit flows over the
//! arcs of the communication graph, allowed only through chosen nodes and
//! coupled so that choosing both endpoints demands that many edge-disjoint
//! routes between them. Compact (no row generation), solved whole.

use std::collections::BTreeMap;
use std::time::Duration;

use thiserror::Error;

use crate::graph::{require_edge_connectivity, ConnectivityError, DerivedSets, NodeId, TransformedGraph};
use crate::instance::Instance;
use crate::milp::{
    solve, MilpError, MilpModel, Sense, SolveConfig, SolveStatus, VarId,
};
use crate::oracle::Solution;

#[derive(Debug, Error)]
pub enum FbError {
    #[error(transparent)]
    Connectivity(#[from] ConnectivityError),
    #[error(transparent)]
    Model(#[from] MilpError),
}

/// Where each model variable lives: node choices `x`, pair activations `t`,
/// per-family arc flows, and the worst-case-cost variable `z`.
#[derive(Debug, Clone)]
pub struct FbVarMap {
    x: Vec<VarId>,
    t: BTreeMap<(NodeId, NodeId), VarId>,
    flows: BTreeMap<(usize, NodeId, NodeId, NodeId, NodeId), VarId>,
    z: VarId,
}

impl FbVarMap {
    pub fn x(&self, i: NodeId) -> VarId {
        self.x[i - 1]
    }

    pub fn node_count(&self) -> usize {
        self.x.len()
    }

    /// Activation variable of the unordered pair {a, b}.
    pub fn t(&self, a: NodeId, b: NodeId) -> VarId {
        self.t[&(a.min(b), a.max(b))]
    }

    /// Flow variable of family `family` (1-based) on the ordered arc (i, j)
    /// for the unordered pair {p, q}.
    pub fn flow(&self, family: usize, i: NodeId, j: NodeId, p: NodeId, q: NodeId) -> VarId {
        self.flows[&(family, i, j, p.min(q), p.max(q))]
    }

    pub fn z(&self) -> VarId {
        self.z
    }
}

/// Builds the full model. The network must already be able to survive the
/// instance's failure budget.
pub fn build_ip_fb(
    inst: &Instance,
    m: &TransformedGraph,
    ds: &DerivedSets,
) -> Result<(MilpModel, FbVarMap), FbError> {
    require_edge_connectivity(&inst.network, inst.gamma)?;
    let n = inst.n();
    let families = inst.gamma + 1;
    let mut model = MilpModel::new();

    // Variable order matters for branching ties: nodes first, then pair
    // activations; flows are continuous and never branched on.
    let x: Vec<VarId> = (1..=n)
        .map(|i| model.add_binary(format!("x_{i}")))
        .collect::<Result<_, _>>()?;
    let mut t = BTreeMap::new();
    for p in 1..=n {
        for q in (p + 1)..=n {
            t.insert((p, q), model.add_binary(format!("t_{p}_{q}"))?);
        }
    }
    let z = model.add_continuous("z", 0.0, f64::INFINITY)?;

    let mut arcs = Vec::with_capacity(2 * m.m_edge_count());
    for &(u, v) in m.m_edges() {
        arcs.push((u, v));
        arcs.push((v, u));
    }

    let mut flows = BTreeMap::new();
    for family in 1..=families {
        for p in 1..=n {
            for q in (p + 1)..=n {
                for &(i, j) in &arcs {
                    let var =
                        model.add_continuous(format!("f{family}_{i}_{j}_{p}_{q}"), 0.0, 1.0)?;
                    flows.insert((family, i, j, p, q), var);
                }
            }
        }
    }

    model.set_objective([(z, 1.0)]);

    for p in 1..=n {
        for q in (p + 1)..=n {
            let t_pq = t[&(p, q)];
            model.add_constraint(
                format!("tp_{p}_{q}"),
                vec![(t_pq, 1.0), (x[p - 1], -1.0)],
                Sense::Le,
                0.0,
            )?;
            model.add_constraint(
                format!("tq_{p}_{q}"),
                vec![(t_pq, 1.0), (x[q - 1], -1.0)],
                Sense::Le,
                0.0,
            )?;
            model.add_constraint(
                format!("tb_{p}_{q}"),
                vec![(t_pq, 1.0), (x[p - 1], -1.0), (x[q - 1], -1.0)],
                Sense::Ge,
                -1.0,
            )?;

            for family in 1..=families {
                // Flow conservation: the chosen-pair indicator leaves the
                // source and enters the sink; interior nodes just relay.
                for i in 1..=n {
                    let mut terms: Vec<(VarId, f64)> = Vec::new();
                    for &j in m.neighbors(i) {
                        terms.push((flows[&(family, i, j, p, q)], 1.0));
                        terms.push((flows[&(family, j, i, p, q)], -1.0));
                    }
                    if i == p {
                        terms.push((t_pq, -1.0));
                    } else if i == q {
                        terms.push((t_pq, 1.0));
                    } else if terms.is_empty() {
                        // Nothing flows through a node with no arcs.
                        continue;
                    }
                    model.add_constraint(
                        format!("bal{family}_{i}_{p}_{q}"),
                        terms,
                        Sense::Eq,
                        0.0,
                    )?;
                }
            }

            for &(i, j) in &arcs {
                let all_families: Vec<(VarId, f64)> = (1..=families)
                    .map(|family| (flows[&(family, i, j, p, q)], 1.0))
                    .collect();
                model.add_constraint(
                    format!("cap_{i}_{j}_{p}_{q}"),
                    all_families,
                    Sense::Le,
                    1.0,
                )?;
                for family in 1..=families {
                    let f = flows[&(family, i, j, p, q)];
                    for (tag, node) in [("i", i), ("j", j), ("p", p), ("q", q)] {
                        model.add_constraint(
                            format!("c{tag}{family}_{i}_{j}_{p}_{q}"),
                            vec![(f, 1.0), (x[node - 1], -1.0)],
                            Sense::Le,
                            0.0,
                        )?;
                    }
                }
            }
        }
    }

    for i in 1..=n {
        let nbrs = m.neighbors(i);
        let terms: Vec<(VarId, f64)> = if nbrs.is_empty() {
            // No neighborhood can ever supply gamma+1 choices; keep the row
            // as an explicit infeasibility marker.
            vec![(x[0], 0.0)]
        } else {
            nbrs.iter().map(|&j| (x[j - 1], 1.0)).collect()
        };
        model.add_constraint(format!("dom_{i}"), terms, Sense::Ge, (inst.gamma + 1) as f64)?;
    }

    for &i in &ds.vbar {
        let mut terms: Vec<(VarId, f64)> = m.neighbors(i).iter().map(|&j| (x[j - 1], 1.0)).collect();
        terms.extend(ds.nprime[&i].iter().map(|&k| (x[k - 1], -1.0)));
        model.add_constraint(format!("fre_{i}"), terms, Sense::Ge, inst.gamma as f64)?;
    }

    for (k, row) in inst.scenarios.rows().iter().enumerate() {
        let mut terms: Vec<(VarId, f64)> = (1..=n).map(|i| (x[i - 1], row[i - 1] as f64)).collect();
        terms.push((z, -1.0));
        model.add_constraint(format!("eps_{k}"), terms, Sense::Le, 0.0)?;
    }

    Ok((model, FbVarMap { x, t, flows, z }))
}

/// Nodes with exactly two communication partners need both equipped; pin
/// those choices up front.
pub fn warm_start_from_preprocessing(ds: &DerivedSets, vars: &FbVarMap) -> Vec<(VarId, f64)> {
    ds.forced_nodes
        .iter()
        .map(|&i| (vars.x(i), 1.0))
        .collect()
}

/// Reads the chosen set out of a solved assignment.
pub fn extract_solution(assignment: &[f64], vars: &FbVarMap, inst: &Instance) -> Solution {
    let chosen: Vec<NodeId> = (1..=vars.node_count())
        .filter(|&i| assignment[vars.x(i).index()] > 0.5)
        .collect();
    Solution::evaluate(chosen, &inst.scenarios)
}

/// What one solver run produced, in instance terms rather than model terms.
#[derive(Debug, Clone)]
pub struct MethodReport {
    pub status: SolveStatus,
    pub solution: Option<Solution>,
    /// Valid lower bound on the robust cost, when the search produced one.
    pub bound: Option<f64>,
    pub wall: Duration,
    pub nodes: usize,
    pub cuts_added: usize,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub time_limit: Duration,
    /// Seed the search with the forced-node warm start.
    pub warm_start: bool,
    pub node_limit: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            time_limit: Duration::from_secs(1800),
            warm_start: false,
            node_limit: None,
        }
    }
}

pub fn solve_ip_fb(
    inst: &Instance,
    m: &TransformedGraph,
    ds: &DerivedSets,
    options: &SolveOptions,
) -> Result<MethodReport, FbError> {
    let (model, vars) = build_ip_fb(inst, m, ds)?;
    let warm = if options.warm_start {
        warm_start_from_preprocessing(ds, &vars)
    } else {
        Vec::new()
    };
    let report = solve(
        &model,
        SolveConfig {
            time_limit: options.time_limit,
            warm_start: warm,
            node_limit: options.node_limit,
            ..SolveConfig::default()
        },
    )?;
    let solution = report
        .assignment
        .as_ref()
        .map(|a| extract_solution(a, &vars, inst));
    Ok(MethodReport {
        status: report.status,
        solution,
        bound: report.bound,
        wall: report.wall,
        nodes: report.nodes,
        cuts_added: report.cuts_added,
    })
}
