//! Solver-neutral mixed binary-continuous linear models and a reference
//! branch-and-bound solver over incremental LP relaxations, with lazily
//! separated constraints, warm starts, and an LP-file adapter for external
//! engines.

mod lp_file;

pub use lp_file::{export_lp_file, export_lp_string, import_solution_file};

use std::collections::{BTreeMap, BinaryHeap};
use std::time::{Duration, Instant};

use minilp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};
use thiserror::Error;

/// Absolute feasibility/optimality tolerance. Formulation coefficients are
/// integers no larger than the node count, so this cannot misclassify.
pub const TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum MilpError {
    #[error("duplicate variable name {name}")]
    DuplicateVar { name: String },
    #[error("duplicate constraint name {name}")]
    DuplicateConstraint { name: String },
    #[error("variable {name} has lower bound {lower} above upper bound {upper}")]
    BadBounds {
        name: String,
        lower: f64,
        upper: f64,
    },
    #[error("constraint {name} has no terms")]
    EmptyConstraint { name: String },
    #[error("constraint {name} references a variable of a different model")]
    ForeignVariable { name: String },
    #[error("the LP relaxation is unbounded; some variable is missing a bound")]
    Unbounded,
    #[error("variable name `{name}` clashes with LP file syntax; rename to `{suggestion}`")]
    UnsafeName { name: String, suggestion: String },
    #[error("solution file line {line_no} is not a name/value pair: {line}")]
    SolutionLine { line_no: usize, line: String },
    #[error("solution file line {line_no} names unknown variable {name}")]
    UnknownVariable { line_no: usize, name: String },
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Handle into one model's variable list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(usize);

impl VarId {
    /// Position in the model's variable list and in assignment vectors.
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone)]
pub struct VarDef {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub integral: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub name: String,
    /// Sorted by variable, duplicates merged. Zero coefficients are kept:
    /// a row like 0·x ≥ 1 is a deliberate infeasibility marker.
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// How far an assignment is from satisfying a row (0 when satisfied).
pub fn violation(c: &Constraint, assignment: &[f64]) -> f64 {
    let lhs: f64 = c
        .terms
        .iter()
        .map(|&(id, coeff)| coeff * assignment[id.0])
        .sum();
    match c.sense {
        Sense::Le => (lhs - c.rhs).max(0.0),
        Sense::Ge => (c.rhs - lhs).max(0.0),
        Sense::Eq => (lhs - c.rhs).abs(),
    }
}

fn normalize(mut terms: Vec<(VarId, f64)>) -> Vec<(VarId, f64)> {
    terms.sort_by_key(|&(id, _)| id);
    let mut merged: Vec<(VarId, f64)> = Vec::with_capacity(terms.len());
    for (id, coeff) in terms {
        match merged.last_mut() {
            Some((last, sum)) if *last == id => *sum += coeff,
            _ => merged.push((id, coeff)),
        }
    }
    merged
}

/// A minimization model over bounded variables, some integral.
#[derive(Debug, Clone, Default)]
pub struct MilpModel {
    vars: Vec<VarDef>,
    var_names: BTreeMap<String, VarId>,
    constraints: Vec<Constraint>,
    row_names: BTreeMap<String, usize>,
    objective: BTreeMap<VarId, f64>,
}

impl MilpModel {
    pub fn new() -> Self {
        MilpModel::default()
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        integral: bool,
    ) -> Result<VarId, MilpError> {
        let name = name.into();
        if lower > upper {
            return Err(MilpError::BadBounds { name, lower, upper });
        }
        let id = VarId(self.vars.len());
        if self.var_names.insert(name.clone(), id).is_some() {
            return Err(MilpError::DuplicateVar { name });
        }
        self.vars.push(VarDef {
            name,
            lower,
            upper,
            integral,
        });
        Ok(id)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> Result<VarId, MilpError> {
        self.add_var(name, 0.0, 1.0, true)
    }

    pub fn add_continuous(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
    ) -> Result<VarId, MilpError> {
        self.add_var(name, lower, upper, false)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> Result<(), MilpError> {
        let name = name.into();
        let terms = normalize(terms);
        if terms.is_empty() {
            return Err(MilpError::EmptyConstraint { name });
        }
        if terms.iter().any(|&(id, _)| id.0 >= self.vars.len()) {
            return Err(MilpError::ForeignVariable { name });
        }
        if self
            .row_names
            .insert(name.clone(), self.constraints.len())
            .is_some()
        {
            return Err(MilpError::DuplicateConstraint { name });
        }
        self.constraints.push(Constraint {
            name,
            terms,
            sense,
            rhs,
        });
        Ok(())
    }

    /// Replaces the whole objective (minimized).
    pub fn set_objective(&mut self, terms: impl IntoIterator<Item = (VarId, f64)>) {
        self.objective = terms.into_iter().collect();
    }

    pub fn var(&self, id: VarId) -> &VarDef {
        &self.vars[id.0]
    }

    pub fn vars(&self) -> &[VarDef] {
        &self.vars
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn find_var(&self, name: &str) -> Option<VarId> {
        self.var_names.get(name).copied()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn constraint_count(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective(&self) -> &BTreeMap<VarId, f64> {
        &self.objective
    }

    pub fn objective_value(&self, assignment: &[f64]) -> f64 {
        self.objective
            .iter()
            .map(|(&id, &coeff)| coeff * assignment[id.0])
            .sum()
    }
}

/// Rows returned by a lazy separator. Each must be violated by the candidate
/// that triggered it and valid for every integer-feasible point.
pub type Separator<'a> = Box<dyn FnMut(&[f64]) -> Vec<Constraint> + 'a>;

pub struct SolveConfig<'a> {
    pub time_limit: Duration,
    /// Partial assignment checked for feasibility and completed into the
    /// starting incumbent; rejected with a note when that fails.
    pub warm_start: Vec<(VarId, f64)>,
    pub lazy_separator: Option<Separator<'a>>,
    pub relax_integrality: bool,
    pub node_limit: Option<usize>,
}

impl Default for SolveConfig<'_> {
    fn default() -> Self {
        SolveConfig {
            time_limit: Duration::from_secs(1800),
            warm_start: Vec::new(),
            lazy_separator: None,
            relax_integrality: false,
            node_limit: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// An incumbent exists but the node budget ran out before the gap closed.
    Feasible,
    Infeasible,
    TimeLimit,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// One value per variable, integral variables rounded exactly.
    pub assignment: Option<Vec<f64>>,
    pub objective: Option<f64>,
    /// Valid lower bound on any integer-feasible objective.
    pub bound: Option<f64>,
    pub wall: Duration,
    pub nodes: usize,
    pub cuts_added: usize,
    pub warm_start_used: bool,
    pub notes: Vec<String>,
}

struct Node {
    bound: f64,
    seq: u64,
    sol: minilp::Solution,
    cuts_applied: usize,
}

// Best bound first, then first-created first, so searches replay exactly.
impl Ord for Node {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}

impl Eq for Node {}

fn build_lp(model: &MilpModel) -> (Problem, Vec<minilp::Variable>) {
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let vmap: Vec<minilp::Variable> = model
        .vars
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let obj = model.objective.get(&VarId(i)).copied().unwrap_or(0.0);
            problem.add_var(obj, (v.lower, v.upper))
        })
        .collect();
    for c in &model.constraints {
        let mut expr = LinearExpr::empty();
        for &(id, coeff) in &c.terms {
            expr.add(vmap[id.0], coeff);
        }
        problem.add_constraint(expr, op_of(c.sense), c.rhs);
    }
    (problem, vmap)
}

fn op_of(sense: Sense) -> ComparisonOp {
    match sense {
        Sense::Le => ComparisonOp::Le,
        Sense::Eq => ComparisonOp::Eq,
        Sense::Ge => ComparisonOp::Ge,
    }
}

fn extract(sol: &minilp::Solution, vmap: &[minilp::Variable]) -> Vec<f64> {
    vmap.iter().map(|&v| sol[v]).collect()
}

/// Index of the integral variable farthest from an integer, lowest index on
/// ties; None when all are within tolerance.
fn most_fractional(assignment: &[f64], int_vars: &[usize]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &i in int_vars {
        let frac = (assignment[i] - assignment[i].round()).abs();
        if frac > TOL && best.is_none_or(|(_, b)| frac > b) {
            best = Some((i, frac));
        }
    }
    best.map(|(i, _)| i)
}

fn apply_rows(
    sol: minilp::Solution,
    rows: &[Constraint],
    vmap: &[minilp::Variable],
) -> Option<minilp::Solution> {
    let mut sol = sol;
    for c in rows {
        let mut expr = LinearExpr::empty();
        for &(id, coeff) in &c.terms {
            expr.add(vmap[id.0], coeff);
        }
        sol = sol.add_constraint(expr, op_of(c.sense), c.rhs).ok()?;
    }
    Some(sol)
}

fn round_integrals(assignment: &mut [f64], int_vars: &[usize]) {
    for &i in int_vars {
        assignment[i] = assignment[i].round();
    }
}

/// Completes a partial warm start into an integer-feasible assignment by
/// fixing the given values and then rounding one fractional variable at a
/// time, backtracking once per variable to the opposite side.
fn dive_warm_start(
    root: &minilp::Solution,
    model: &MilpModel,
    vmap: &[minilp::Variable],
    int_vars: &[usize],
    warm: &[(VarId, f64)],
) -> Result<minilp::Solution, String> {
    for &(id, val) in warm {
        if id.0 >= model.var_count() {
            return Err(format!("warm start names variable index {} of a different model", id.0));
        }
        let def = model.var(id);
        if val < def.lower - TOL || val > def.upper + TOL {
            return Err(format!(
                "warm start value {val} for {} outside [{}, {}]",
                def.name, def.lower, def.upper
            ));
        }
        if def.integral && (val - val.round()).abs() > TOL {
            return Err(format!(
                "warm start value {val} for integral {} is fractional",
                def.name
            ));
        }
    }
    let mut sol = root.clone();
    for &(id, val) in warm {
        sol = sol
            .fix_var(vmap[id.0], val)
            .map_err(|_| format!("warm start is infeasible at {}", model.var(id).name))?;
    }
    for _ in 0..int_vars.len() {
        let assignment = extract(&sol, vmap);
        let Some(i) = most_fractional(&assignment, int_vars) else {
            break;
        };
        let near = assignment[i].round();
        let far = if near > assignment[i] {
            assignment[i].floor()
        } else {
            assignment[i].ceil()
        };
        sol = match sol.clone().fix_var(vmap[i], near) {
            Ok(next) => next,
            Err(_) => sol
                .fix_var(vmap[i], far)
                .map_err(|_| format!("warm start completion dead-ends at {}", model.vars[i].name))?,
        };
    }
    Ok(sol)
}

/// Branch and bound, best bound first. Integral variables branch on the most
/// fractional value (lowest index on ties); the lazy separator is consulted
/// at every integer-feasible candidate and its rows join a global pool that
/// every open node inherits. Bounds reported are valid relaxation bounds.
pub fn solve(model: &MilpModel, mut cfg: SolveConfig) -> Result<SolveReport, MilpError> {
    let start = Instant::now();
    let report = |status, assignment: Option<Vec<f64>>, objective, bound, nodes, cuts, warm, notes| SolveReport {
        status,
        assignment,
        objective,
        bound,
        wall: start.elapsed(),
        nodes,
        cuts_added: cuts,
        warm_start_used: warm,
        notes,
    };

    if model.var_count() == 0 {
        return Ok(report(
            SolveStatus::Optimal,
            Some(Vec::new()),
            Some(0.0),
            Some(0.0),
            0,
            0,
            false,
            Vec::new(),
        ));
    }

    let (problem, vmap) = build_lp(model);
    let root = match problem.solve() {
        Ok(sol) => sol,
        Err(minilp::Error::Infeasible) => {
            return Ok(report(
                SolveStatus::Infeasible,
                None,
                None,
                None,
                0,
                0,
                false,
                Vec::new(),
            ))
        }
        Err(minilp::Error::Unbounded) => return Err(MilpError::Unbounded),
    };

    if cfg.relax_integrality {
        let obj = root.objective();
        return Ok(report(
            SolveStatus::Optimal,
            Some(extract(&root, &vmap)),
            Some(obj),
            Some(obj),
            1,
            0,
            false,
            Vec::new(),
        ));
    }

    let int_vars: Vec<usize> = (0..model.var_count())
        .filter(|&i| model.vars[i].integral)
        .collect();
    let mut notes = Vec::new();
    let mut pool: Vec<Constraint> = Vec::new();
    let mut cuts_added = 0usize;
    let mut warm_used = false;
    // (objective, rounded assignment)
    let mut incumbent: Option<(f64, Vec<f64>)> = None;

    if !cfg.warm_start.is_empty() {
        match dive_warm_start(&root, model, &vmap, &int_vars, &cfg.warm_start) {
            Ok(sol) => {
                let mut assignment = extract(&sol, &vmap);
                round_integrals(&mut assignment, &int_vars);
                let cuts = cfg
                    .lazy_separator
                    .as_mut()
                    .map(|sep| sep(&assignment))
                    .unwrap_or_default();
                if cuts.is_empty() {
                    incumbent = Some((sol.objective(), assignment));
                    warm_used = true;
                } else {
                    for c in &cuts {
                        debug_assert!(violation(c, &assignment) > TOL, "unviolated lazy row {}", c.name);
                    }
                    cuts_added += cuts.len();
                    pool.extend(cuts);
                    notes.push("warm start violates lazily separated rows; discarded".into());
                }
            }
            Err(why) => notes.push(format!("warm start rejected: {why}")),
        }
    }

    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(Node {
        bound: root.objective(),
        seq,
        sol: root,
        cuts_applied: 0,
    });
    let mut nodes = 0usize;

    enum Stop {
        Exhausted,
        OutOfTime,
        OutOfNodes,
    }
    let stop = loop {
        if start.elapsed() >= cfg.time_limit {
            break Stop::OutOfTime;
        }
        if cfg.node_limit.is_some_and(|limit| nodes >= limit) {
            break Stop::OutOfNodes;
        }
        let Some(node) = heap.pop() else {
            break Stop::Exhausted;
        };
        nodes += 1;
        if let Some((inc_obj, _)) = &incumbent {
            if node.bound >= inc_obj - TOL {
                // Best-bound order: nothing better remains anywhere.
                break Stop::Exhausted;
            }
        }
        // Catch up on pool rows this node has not seen, then re-queue it
        // under its corrected bound.
        if node.cuts_applied < pool.len() {
            if let Some(sol) = apply_rows(node.sol, &pool[node.cuts_applied..], &vmap) {
                seq += 1;
                heap.push(Node {
                    bound: sol.objective(),
                    seq,
                    sol,
                    cuts_applied: pool.len(),
                });
            }
            continue;
        }

        let assignment = extract(&node.sol, &vmap);
        match most_fractional(&assignment, &int_vars) {
            None => {
                let mut rounded = assignment;
                round_integrals(&mut rounded, &int_vars);
                if let Some(sep) = cfg.lazy_separator.as_mut() {
                    let cuts = sep(&rounded);
                    if !cuts.is_empty() {
                        for c in &cuts {
                            debug_assert!(
                                violation(c, &rounded) > TOL,
                                "unviolated lazy row {}",
                                c.name
                            );
                        }
                        cuts_added += cuts.len();
                        let watermark = pool.len();
                        pool.extend(cuts);
                        if let Some(sol) = apply_rows(node.sol, &pool[watermark..], &vmap) {
                            seq += 1;
                            heap.push(Node {
                                bound: sol.objective(),
                                seq,
                                sol,
                                cuts_applied: pool.len(),
                            });
                        }
                        continue;
                    }
                }
                let obj = node.sol.objective();
                if incumbent.as_ref().is_none_or(|(best, _)| obj < best - TOL) {
                    incumbent = Some((obj, rounded));
                }
            }
            Some(i) => {
                let value = assignment[i];
                let var = vmap[i];
                let (lo, hi) = (model.vars[i].lower, model.vars[i].upper);
                let down = if value.floor() == lo {
                    node.sol.clone().fix_var(var, lo)
                } else {
                    node.sol.clone().add_constraint(
                        LinearExpr::from(vec![(var, 1.0)]),
                        ComparisonOp::Le,
                        value.floor(),
                    )
                };
                let up = if value.ceil() == hi {
                    node.sol.fix_var(var, hi)
                } else {
                    node.sol.add_constraint(
                        LinearExpr::from(vec![(var, 1.0)]),
                        ComparisonOp::Ge,
                        value.ceil(),
                    )
                };
                for child in [down, up].into_iter().flatten() {
                    seq += 1;
                    heap.push(Node {
                        bound: child.objective(),
                        seq,
                        sol: child,
                        cuts_applied: node.cuts_applied,
                    });
                }
            }
        }
    };

    let open_bound = heap.peek().map(|n| n.bound);
    let (status, objective, bound, assignment) = match (stop, incumbent) {
        (Stop::Exhausted, Some((obj, a))) => (SolveStatus::Optimal, Some(obj), Some(obj), Some(a)),
        (Stop::Exhausted, None) => (SolveStatus::Infeasible, None, None, None),
        (Stop::OutOfTime, inc) => {
            let obj = inc.as_ref().map(|(o, _)| *o);
            let bound = open_bound.or(obj);
            (SolveStatus::TimeLimit, obj, bound, inc.map(|(_, a)| a))
        }
        (Stop::OutOfNodes, Some((obj, a))) => {
            let bound = open_bound.map_or(obj, |b| b.min(obj));
            (SolveStatus::Feasible, Some(obj), Some(bound), Some(a))
        }
        (Stop::OutOfNodes, None) => (SolveStatus::TimeLimit, None, open_bound, None),
    };
    Ok(report(
        status, assignment, objective, bound, nodes, cuts_added, warm_used, notes,
    ))
}

/// Same constraint system with integrality dropped; lazily separated rows
/// never participate, so this bounds only the standing system.
pub fn solve_lp_relaxation(model: &MilpModel) -> Result<SolveReport, MilpError> {
    solve(
        model,
        SolveConfig {
            relax_integrality: true,
            ..SolveConfig::default()
        },
    )
}
