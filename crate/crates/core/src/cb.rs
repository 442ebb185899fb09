//! Cut-based formulation: node choices plus one activation per communication
//! edge, with connectivity enforced lazily. Whenever an integer candidate
//! induces a subgraph some failure could split, the separating node set
//! becomes a new row demanding gamma+1 chosen edges across it.

use std::cell::RefCell;
use std::collections::BTreeSet;

use thiserror::Error;

use crate::fb::{MethodReport, SolveOptions};
use crate::graph::{
    require_edge_connectivity, unit_max_flow, ConnectivityError, DerivedSets, NodeId,
    TransformedGraph,
};
use crate::instance::Instance;
use crate::milp::{
    solve, Constraint, MilpError, MilpModel, Sense, SolveConfig, VarId,
};
use crate::oracle::Solution;

#[derive(Debug, Error)]
pub enum CbError {
    #[error(transparent)]
    Connectivity(#[from] ConnectivityError),
    #[error(transparent)]
    Model(#[from] MilpError),
}

#[derive(Debug, Clone)]
pub struct CbVarMap {
    x: Vec<VarId>,
    r: Vec<VarId>,
    edges: Vec<(NodeId, NodeId)>,
    z: VarId,
}

impl CbVarMap {
    pub fn x(&self, i: NodeId) -> VarId {
        self.x[i - 1]
    }

    pub fn node_count(&self) -> usize {
        self.x.len()
    }

    /// Activation variable of the communication edge {u, v}.
    pub fn r(&self, u: NodeId, v: NodeId) -> VarId {
        let key = (u.min(v), u.max(v));
        let pos = self.edges.binary_search(&key).expect("not an m-edge");
        self.r[pos]
    }

    pub fn z(&self) -> VarId {
        self.z
    }
}

/// One emitted connectivity row: the separating set and the chosen witness
/// pair it would disconnect.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutRecord {
    pub s: Vec<NodeId>,
    pub a: NodeId,
    pub b: NodeId,
}

/// Standing rows only; the connectivity family starts empty.
pub fn build_ip_cb_base(
    inst: &Instance,
    m: &TransformedGraph,
    ds: &DerivedSets,
) -> Result<(MilpModel, CbVarMap), CbError> {
    require_edge_connectivity(&inst.network, inst.gamma)?;
    let n = inst.n();
    let mut model = MilpModel::new();

    let x: Vec<VarId> = (1..=n)
        .map(|i| model.add_binary(format!("x_{i}")))
        .collect::<Result<_, _>>()?;
    let edges = m.m_edges().to_vec();
    let r: Vec<VarId> = edges
        .iter()
        .map(|&(u, v)| model.add_binary(format!("r_{u}_{v}")))
        .collect::<Result<_, _>>()?;
    let z = model.add_continuous("z", 0.0, f64::INFINITY)?;

    model.set_objective([(z, 1.0)]);

    for (pos, &(u, v)) in edges.iter().enumerate() {
        model.add_constraint(
            format!("ru_{u}_{v}"),
            vec![(r[pos], 1.0), (x[u - 1], -1.0)],
            Sense::Le,
            0.0,
        )?;
        model.add_constraint(
            format!("rv_{u}_{v}"),
            vec![(r[pos], 1.0), (x[v - 1], -1.0)],
            Sense::Le,
            0.0,
        )?;
        model.add_constraint(
            format!("rb_{u}_{v}"),
            vec![(r[pos], 1.0), (x[u - 1], -1.0), (x[v - 1], -1.0)],
            Sense::Ge,
            -1.0,
        )?;
    }

    for i in 1..=n {
        let nbrs = m.neighbors(i);
        let terms: Vec<(VarId, f64)> = if nbrs.is_empty() {
            // Explicit infeasibility marker, same reading as a 0 >= k row.
            vec![(x[0], 0.0)]
        } else {
            nbrs.iter().map(|&j| (x[j - 1], 1.0)).collect()
        };
        model.add_constraint(format!("dom_{i}"), terms, Sense::Ge, (inst.gamma + 1) as f64)?;
    }

    for &i in &ds.vbar {
        let mut terms: Vec<(VarId, f64)> =
            m.neighbors(i).iter().map(|&j| (x[j - 1], 1.0)).collect();
        terms.extend(ds.nprime[&i].iter().map(|&k| (x[k - 1], -1.0)));
        model.add_constraint(format!("fre_{i}"), terms, Sense::Ge, inst.gamma as f64)?;
    }

    for (k, row) in inst.scenarios.rows().iter().enumerate() {
        let mut terms: Vec<(VarId, f64)> =
            (1..=n).map(|i| (x[i - 1], row[i - 1] as f64)).collect();
        terms.push((z, -1.0));
        model.add_constraint(format!("eps_{k}"), terms, Sense::Le, 0.0)?;
    }

    Ok((model, CbVarMap { x, r, edges, z }))
}

/// Connectivity separation at an integer candidate. Sweeps max-flow from the
/// lowest chosen node to every other chosen node inside the induced
/// communication subgraph; each deficient cut becomes one row. `seen` keeps
/// the family duplicate-free across the whole search.
pub fn separate_cuts(
    inst: &Instance,
    m: &TransformedGraph,
    vars: &CbVarMap,
    assignment: &[f64],
    seen: &mut BTreeSet<Vec<NodeId>>,
    records: &mut Vec<CutRecord>,
) -> Vec<Constraint> {
    let n = inst.n();
    let need = inst.gamma + 1;
    let chosen: Vec<NodeId> = (1..=n)
        .filter(|&i| assignment[vars.x(i).index()] > 0.5)
        .collect();
    if chosen.len() <= 1 {
        return Vec::new();
    }

    let mut index_of = vec![0usize; n + 1];
    for (k, &v) in chosen.iter().enumerate() {
        index_of[v] = k + 1;
    }
    let induced: Vec<(NodeId, NodeId)> = m
        .m_edges()
        .iter()
        .filter(|&&(u, v)| index_of[u] != 0 && index_of[v] != 0)
        .map(|&(u, v)| (index_of[u], index_of[v]))
        .collect();

    let mut cuts = Vec::new();
    let root = 1;
    for target in 2..=chosen.len() {
        let (value, side) = unit_max_flow(chosen.len(), &induced, root, target, need);
        if value >= need {
            continue;
        }
        let side = side.expect("cut side accompanies a proven deficit");
        let s: Vec<NodeId> = chosen
            .iter()
            .copied()
            .filter(|&v| side[index_of[v]])
            .collect();
        if !seen.insert(s.clone()) {
            continue;
        }
        let a = s[0];
        let b = *chosen
            .iter()
            .find(|&&v| !side[index_of[v]])
            .expect("the target is outside the cut side");

        let in_s = |v: NodeId| s.binary_search(&v).is_ok();
        let mut terms: Vec<(VarId, f64)> = m
            .m_edges()
            .iter()
            .filter(|&&(u, v)| in_s(u) != in_s(v))
            .map(|&(u, v)| (vars.r(u, v), 1.0))
            .collect();
        terms.push((vars.x(a), -(need as f64)));
        terms.push((vars.x(b), -(need as f64)));
        let name = format!(
            "scut_{}",
            s.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("_")
        );
        records.push(CutRecord { s, a, b });
        cuts.push(Constraint {
            name,
            terms,
            sense: Sense::Ge,
            rhs: -(need as f64),
        });
    }
    cuts
}

pub fn solve_ip_cb(
    inst: &Instance,
    m: &TransformedGraph,
    ds: &DerivedSets,
    options: &SolveOptions,
) -> Result<(MethodReport, Vec<CutRecord>), CbError> {
    let (model, vars) = build_ip_cb_base(inst, m, ds)?;
    let warm = if options.warm_start {
        ds.forced_nodes
            .iter()
            .map(|&i| (vars.x(i), 1.0))
            .collect()
    } else {
        Vec::new()
    };

    let state = RefCell::new((BTreeSet::new(), Vec::new()));
    let report = solve(
        &model,
        SolveConfig {
            time_limit: options.time_limit,
            warm_start: warm,
            node_limit: options.node_limit,
            lazy_separator: Some(Box::new(|assignment: &[f64]| {
                let (seen, records) = &mut *state.borrow_mut();
                separate_cuts(inst, m, &vars, assignment, seen, records)
            })),
            ..SolveConfig::default()
        },
    )?;

    let solution = report.assignment.as_ref().map(|a| {
        let chosen: Vec<NodeId> = (1..=inst.n())
            .filter(|&i| a[vars.x(i).index()] > 0.5)
            .collect();
        Solution::evaluate(chosen, &inst.scenarios)
    });
    let records = state.into_inner().1;
    Ok((
        MethodReport {
            status: report.status,
            solution,
            bound: report.bound,
            wall: report.wall,
            nodes: report.nodes,
            cuts_added: report.cuts_added,
        },
        records,
    ))
}
