//! Alternating exact method: a light master (domination, neighborhood
//! difference, worst-case cost) proposes cheap node sets, the full flow model
//! repairs each proposal into a survivable one, and the repairs are fixed
//! into the next master until the repaired set stops changing.

use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::fb::{build_ip_fb, MethodReport, SolveOptions};
use crate::graph::{
    require_edge_connectivity, ConnectivityError, DerivedSets, NodeId, TransformedGraph,
};
use crate::instance::Instance;
use crate::milp::{
    solve, MilpError, MilpModel, Sense, SolveConfig, SolveStatus, VarId,
};
use crate::oracle::Solution;

#[derive(Debug, Error)]
pub enum ItError {
    #[error(transparent)]
    Connectivity(#[from] ConnectivityError),
    #[error(transparent)]
    Model(#[from] MilpError),
    #[error("master problem infeasible in round {round}: the domination rows cannot be satisfied")]
    MasterInfeasible { round: usize },
    #[error("subproblem infeasible in round {round} despite a survivable network")]
    SubInfeasible {
        round: usize,
        trace: Box<IterationTrace>,
    },
    #[error("no convergence within {cap} rounds")]
    NoConvergence {
        cap: usize,
        trace: Box<IterationTrace>,
    },
}

impl From<crate::fb::FbError> for ItError {
    fn from(e: crate::fb::FbError) -> Self {
        match e {
            crate::fb::FbError::Connectivity(c) => ItError::Connectivity(c),
            crate::fb::FbError::Model(m) => ItError::Model(m),
        }
    }
}

/// One master/subproblem alternation. `free_set` is the master's own choice:
/// the master set minus everything already fixed coming into the round.
#[derive(Debug, Clone, Serialize)]
pub struct Round {
    pub index: usize,
    pub master_set: Vec<NodeId>,
    pub free_set: Vec<NodeId>,
    pub k_set: Vec<NodeId>,
    pub sub_set: Vec<NodeId>,
    pub master_objective: u64,
    pub sub_objective: u64,
    pub master_secs: f64,
    pub sub_secs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationTrace {
    pub rounds: Vec<Round>,
}

impl IterationTrace {
    /// The masters' own choices only ever shrink once repairs start being
    /// fixed in.
    pub fn master_monotone(&self) -> bool {
        self.rounds.windows(2).all(|w| {
            w[1].free_set
                .iter()
                .all(|v| w[0].free_set.binary_search(v).is_ok())
        })
    }

    pub fn terminal(&self) -> &Round {
        self.rounds.last().expect("a trace has at least one round")
    }
}

/// Minimum worst-case-cost node set satisfying the degree-style rows alone,
/// with `fixed` nodes forced in. No connectivity enforcement here.
pub fn solve_master(
    inst: &Instance,
    m: &TransformedGraph,
    ds: &DerivedSets,
    fixed: &[NodeId],
    time_limit: Duration,
) -> Result<(Vec<NodeId>, u64, SolveStatus), ItError> {
    let n = inst.n();
    let mut model = MilpModel::new();
    let x: Vec<VarId> = (1..=n)
        .map(|i| model.add_binary(format!("x_{i}")))
        .collect::<Result<_, _>>()?;
    let z = model.add_continuous("z", 0.0, f64::INFINITY)?;
    model.set_objective([(z, 1.0)]);

    for i in 1..=n {
        let nbrs = m.neighbors(i);
        let terms: Vec<(VarId, f64)> = if nbrs.is_empty() {
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
    for &i in fixed {
        model.add_constraint(format!("fix_{i}"), vec![(x[i - 1], 1.0)], Sense::Eq, 1.0)?;
    }

    let report = solve(
        &model,
        SolveConfig {
            time_limit,
            ..SolveConfig::default()
        },
    )?;
    match report.status {
        SolveStatus::Optimal => {
            let a = report.assignment.expect("optimal solve carries a point");
            let chosen: Vec<NodeId> = (1..=n).filter(|&i| a[x[i - 1].index()] > 0.5).collect();
            let (_, worst) = crate::oracle::robust_cost(&chosen, &inst.scenarios);
            Ok((chosen, worst, SolveStatus::Optimal))
        }
        SolveStatus::Infeasible => Err(ItError::MasterInfeasible { round: 0 }),
        other => Ok((Vec::new(), 0, other)),
    }
}

/// Chosen set, additions beyond the master set, objective, status, node count.
pub type SubproblemOutcome = (Vec<NodeId>, Vec<NodeId>, u64, SolveStatus, usize);

/// Full flow model with the master's set forced in. Returns the whole chosen
/// set and the additions beyond the master set.
pub fn solve_subproblem(
    inst: &Instance,
    m: &TransformedGraph,
    ds: &DerivedSets,
    master_set: &[NodeId],
    time_limit: Duration,
) -> Result<SubproblemOutcome, ItError> {
    let (mut model, vars) = build_ip_fb(inst, m, ds)?;
    for &i in master_set {
        model.add_constraint(format!("fix_{i}"), vec![(vars.x(i), 1.0)], Sense::Eq, 1.0)?;
    }
    let report = solve(
        &model,
        SolveConfig {
            time_limit,
            ..SolveConfig::default()
        },
    )?;
    match report.status {
        SolveStatus::Optimal => {
            let a = report.assignment.expect("optimal solve carries a point");
            let chosen: Vec<NodeId> = (1..=inst.n())
                .filter(|&i| a[vars.x(i).index()] > 0.5)
                .collect();
            let additions: Vec<NodeId> = chosen
                .iter()
                .copied()
                .filter(|v| master_set.binary_search(v).is_err())
                .collect();
            let (_, worst) = crate::oracle::robust_cost(&chosen, &inst.scenarios);
            Ok((chosen, additions, worst, SolveStatus::Optimal, report.nodes))
        }
        other => Ok((Vec::new(), Vec::new(), 0, other, report.nodes)),
    }
}

pub fn solve_it_fb(
    inst: &Instance,
    m: &TransformedGraph,
    ds: &DerivedSets,
    options: &SolveOptions,
) -> Result<(MethodReport, IterationTrace), ItError> {
    require_edge_connectivity(&inst.network, inst.gamma)?;
    let started = Instant::now();
    let cap = inst.n();
    let mut trace = IterationTrace { rounds: Vec::new() };
    let mut fixed: Vec<NodeId> = Vec::new();
    let mut best: Option<Solution> = None;
    let mut first_master_bound = None;
    let mut nodes_total = 0usize;
    let mut prev_sub: Option<Vec<NodeId>> = None;

    let finish = |status: SolveStatus,
                  best: Option<Solution>,
                  bound: Option<f64>,
                  nodes: usize,
                  trace: IterationTrace,
                  started: Instant| {
        let report = MethodReport {
            status,
            solution: best,
            bound,
            wall: started.elapsed(),
            nodes,
            cuts_added: 0,
        };
        Ok((report, trace))
    };

    for round in 1..=cap {
        let remaining = options.time_limit.saturating_sub(started.elapsed());
        if remaining.is_zero() {
            return finish(
                SolveStatus::TimeLimit,
                best,
                first_master_bound,
                nodes_total,
                trace,
                started,
            );
        }
        let t0 = Instant::now();
        let (master_set, master_objective, master_status) =
            solve_master(inst, m, ds, &fixed, remaining).map_err(|e| match e {
                ItError::MasterInfeasible { .. } => ItError::MasterInfeasible { round },
                other => other,
            })?;
        let master_secs = t0.elapsed().as_secs_f64();
        if master_status != SolveStatus::Optimal {
            return finish(
                SolveStatus::TimeLimit,
                best,
                first_master_bound,
                nodes_total,
                trace,
                started,
            );
        }
        if round == 1 {
            // The first master is a pure relaxation, so its value bounds the
            // true optimum from below.
            first_master_bound = Some(master_objective as f64);
        }
        let free_set: Vec<NodeId> = master_set
            .iter()
            .copied()
            .filter(|v| fixed.binary_search(v).is_err())
            .collect();

        let remaining = options.time_limit.saturating_sub(started.elapsed());
        if remaining.is_zero() {
            return finish(
                SolveStatus::TimeLimit,
                best,
                first_master_bound,
                nodes_total,
                trace,
                started,
            );
        }
        let t1 = Instant::now();
        let (sub_set, k_set, sub_objective, sub_status, sub_nodes) =
            solve_subproblem(inst, m, ds, &master_set, remaining)?;
        nodes_total += sub_nodes;
        let sub_secs = t1.elapsed().as_secs_f64();
        match sub_status {
            SolveStatus::Optimal => {}
            SolveStatus::Infeasible => {
                return Err(ItError::SubInfeasible {
                    round,
                    trace: Box::new(trace),
                })
            }
            _ => {
                return finish(
                    SolveStatus::TimeLimit,
                    best,
                    first_master_bound,
                    nodes_total,
                    trace,
                    started,
                )
            }
        }

        trace.rounds.push(Round {
            index: round,
            master_set: master_set.clone(),
            free_set,
            k_set: k_set.clone(),
            sub_set: sub_set.clone(),
            master_objective,
            sub_objective,
            master_secs,
            sub_secs,
        });

        // Every subproblem answer survives the full model, so it is always a
        // valid incumbent even if the loop stops early.
        if best.as_ref().is_none_or(|b| sub_objective < b.robust_cost) {
            best = Some(Solution::evaluate(sub_set.clone(), &inst.scenarios));
        }

        let repeated = prev_sub.as_deref() == Some(&sub_set[..]);
        if k_set.is_empty() || repeated {
            return finish(
                SolveStatus::Optimal,
                best,
                first_master_bound,
                nodes_total,
                trace,
                started,
            );
        }
        prev_sub = Some(sub_set);
        for v in k_set {
            if let Err(pos) = fixed.binary_search(&v) {
                fixed.insert(pos, v);
            }
        }
    }

    Err(ItError::NoConvergence {
        cap,
        trace: Box::new(trace),
    })
}
