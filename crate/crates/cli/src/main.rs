//! Command-line front end: every subcommand is a thin adapter over the
//! library, emitting versioned JSON reports or CSV tables. Failures leave a
//! single machine-readable JSON line on standard error.
//!
//! Exit codes: 0 success, 1 infeasible or failed validation, 2 usage,
//! 3 internal.

use std::path::PathBuf;
use std::time::Duration;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde_json::json;

use rftrlp::bench::{
    parse_records_csv, performance_profile, profile_csv, run_experiment, BenchError,
    ExperimentSpec,
};
use rftrlp::cb::{solve_ip_cb, build_ip_cb_base, CbError};
use rftrlp::fb::{build_ip_fb, solve_ip_fb, FbError, MethodReport, SolveOptions};
use rftrlp::graph::{
    build_transformed_graph, derive_sets, remove_edges, require_edge_connectivity, NodeId,
};
use rftrlp::instance::{generate, load, Flavor, GenConfig, Instance, InstanceError};
use rftrlp::iterative::{solve_it_fb, ItError, IterationTrace};
use rftrlp::milp::{export_lp_file, solve_lp_relaxation, SolveStatus};
use rftrlp::oracle::{brute_force_optimum, feasible_semantic, feasible_structural, OracleError, Predicate};

struct Failure {
    kind: &'static str,
    message: String,
    code: i32,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            kind: "usage",
            message: message.into(),
            code: 2,
        }
    }

    fn validation(message: impl Into<String>) -> Self {
        Failure {
            kind: "validation",
            message: message.into(),
            code: 1,
        }
    }

    fn infeasible(message: impl Into<String>) -> Self {
        Failure {
            kind: "infeasible",
            message: message.into(),
            code: 1,
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        Failure {
            kind: "internal",
            message: message.into(),
            code: 3,
        }
    }
}

impl From<InstanceError> for Failure {
    fn from(e: InstanceError) -> Self {
        match &e {
            InstanceError::BadConfig { .. } => Failure::usage(e.to_string()),
            InstanceError::RepairFailed { .. } => Failure::validation(e.to_string()),
            InstanceError::Io { .. } => Failure::internal(e.to_string()),
            _ => Failure::validation(e.to_string()),
        }
    }
}

impl From<FbError> for Failure {
    fn from(e: FbError) -> Self {
        match e {
            FbError::Connectivity(c) => Failure::validation(c.to_string()),
            FbError::Model(m) => Failure::internal(m.to_string()),
        }
    }
}

impl From<CbError> for Failure {
    fn from(e: CbError) -> Self {
        match e {
            CbError::Connectivity(c) => Failure::validation(c.to_string()),
            CbError::Model(m) => Failure::internal(m.to_string()),
        }
    }
}

impl From<ItError> for Failure {
    fn from(e: ItError) -> Self {
        match e {
            ItError::Connectivity(c) => Failure::validation(c.to_string()),
            ItError::MasterInfeasible { .. } => Failure::infeasible(e.to_string()),
            ItError::Model(_) | ItError::SubInfeasible { .. } | ItError::NoConvergence { .. } => {
                Failure::internal(e.to_string())
            }
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::TooLarge { .. } => Failure::usage(e.to_string()),
            OracleError::Connectivity(c) => Failure::validation(c.to_string()),
        }
    }
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        match &e {
            BenchError::BadSpec { .. } => Failure::usage(e.to_string()),
            BenchError::Parse { .. } => Failure::validation(e.to_string()),
            BenchError::Io { .. } => Failure::internal(e.to_string()),
            BenchError::Instance(InstanceError::BadConfig { .. }) => Failure::usage(e.to_string()),
            BenchError::Instance(InstanceError::Io { .. }) => Failure::internal(e.to_string()),
            BenchError::Instance(_) => Failure::validation(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "rftrlp", version, about = "Regenerator placement toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a random instance file
    Gen {
        #[arg(long)]
        flavor: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        dens: f64,
        #[arg(long)]
        scenarios: usize,
        #[arg(long, default_value_t = 1)]
        gamma: usize,
        #[arg(long)]
        large: bool,
        #[arg(long)]
        seed: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Print the communication graph and the sets derived from it
    Transform {
        #[arg(short, long)]
        input: PathBuf,
        /// Remove this network edge first; repeatable, format U,V
        #[arg(long = "fail", value_name = "U,V")]
        fail: Vec<String>,
    },
    /// Solve an instance with one of the exact methods
    Solve {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        method: String,
        /// Wall-clock budget in seconds
        #[arg(long = "time-limit", default_value_t = 1800.0)]
        time_limit: f64,
        #[arg(long = "warm-start")]
        warm_start: bool,
        /// Solve only the continuous relaxation
        #[arg(long = "lp-only")]
        lp_only: bool,
        /// Also write the model in LP format
        #[arg(long = "export-lp", value_name = "FILE")]
        export_lp: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Brute-force optimum, or feasibility of a given node set
    Oracle {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        predicate: String,
        /// Comma-separated node list to test instead of optimizing
        #[arg(long, value_name = "NODE,NODE,...")]
        check: Option<String>,
    },
    /// Run an experiment grid and persist records
    Bench {
        #[arg(long)]
        spec: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Override the worker count from the spec
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Turn bench records into performance-profile curves
    Profile {
        /// Directory holding records.csv from a bench run
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Schema and survivability checks on an instance file
    Validate {
        #[arg(short, long)]
        input: PathBuf,
    },
}

fn main() {
    // Dying quietly on a closed pipe beats a panic when output is head-ed.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            emit_failure(&Failure::usage(e.to_string()));
            std::process::exit(2);
        }
    };
    match dispatch(cli.cmd) {
        Ok(()) => {}
        Err(f) => {
            emit_failure(&f);
            std::process::exit(f.code);
        }
    }
}

fn emit_failure(f: &Failure) {
    eprintln!("{}", json!({ "kind": f.kind, "message": f.message }));
}

fn dispatch(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Gen {
            flavor,
            n,
            dens,
            scenarios,
            gamma,
            large,
            seed,
            out,
        } => cmd_gen(&flavor, n, dens, scenarios, gamma, large, seed, &out),
        Cmd::Transform { input, fail } => cmd_transform(&input, &fail),
        Cmd::Solve {
            input,
            method,
            time_limit,
            warm_start,
            lp_only,
            export_lp,
            out,
        } => cmd_solve(
            &input,
            &method,
            time_limit,
            warm_start,
            lp_only,
            export_lp.as_deref(),
            &out,
        ),
        Cmd::Oracle {
            input,
            predicate,
            check,
        } => cmd_oracle(&input, &predicate, check.as_deref()),
        Cmd::Bench { spec, out, jobs } => cmd_bench(&spec, &out, jobs),
        Cmd::Profile { input, out } => cmd_profile(&input, &out),
        Cmd::Validate { input } => cmd_validate(&input),
    }
}

fn parse_flavor(s: &str) -> Result<Flavor, Failure> {
    match s {
        "gen1" => Ok(Flavor::Gen1),
        "gen2" => Ok(Flavor::Gen2),
        other => Err(Failure::usage(format!(
            "unknown flavor '{other}' (expected gen1 or gen2)"
        ))),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen(
    flavor: &str,
    n: usize,
    dens: f64,
    scenarios: usize,
    gamma: usize,
    large: bool,
    seed: u64,
    out: &std::path::Path,
) -> Result<(), Failure> {
    let mut cfg = GenConfig::new(n, dens, scenarios, parse_flavor(flavor)?, seed);
    cfg.gamma = gamma;
    cfg.large_mode = large;
    let inst = generate(&cfg)?;
    rftrlp::instance::save(&inst, out)?;
    println!(
        "wrote {} (n={}, edges={}, scenarios={}, gamma={})",
        out.display(),
        inst.n(),
        inst.network.edges().len(),
        inst.scenarios.rows().len(),
        inst.gamma
    );
    Ok(())
}

fn parse_edge(s: &str) -> Result<(NodeId, NodeId), Failure> {
    let parts: Vec<&str> = s.split(',').collect();
    let bad = || Failure::usage(format!("bad edge '{s}' (expected U,V)"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let u = parts[0].trim().parse().map_err(|_| bad())?;
    let v = parts[1].trim().parse().map_err(|_| bad())?;
    Ok((u, v))
}

fn cmd_transform(input: &std::path::Path, fail: &[String]) -> Result<(), Failure> {
    let inst = load(input)?;
    let failed: Vec<(NodeId, NodeId)> = fail
        .iter()
        .map(|s| parse_edge(s))
        .collect::<Result<_, _>>()?;
    let network = if failed.is_empty() {
        inst.network.clone()
    } else {
        remove_edges(&inst.network, &failed).map_err(|e| Failure::usage(e.to_string()))?
    };
    let m = build_transformed_graph(&network);
    let ds = derive_sets(&network, &m);

    println!("m_edges ({}):", m.m_edge_count());
    for &(u, v) in m.m_edges() {
        let path = m
            .provenance(u, v)
            .expect("every communication edge keeps its witness path");
        let shown: Vec<String> = path.iter().map(|x| x.to_string()).collect();
        println!("  {u}-{v} via {}", shown.join("-"));
    }
    let joined = |xs: &[NodeId]| {
        xs.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    println!("vbar: {}", joined(&ds.vbar));
    for (&i, nbrs) in &ds.nprime {
        println!("nprime[{i}]: {}", joined(nbrs));
    }
    println!(
        "ndc_pairs: {}",
        ds.ndc_pairs
            .iter()
            .map(|&(a, b)| format!("({a},{b})"))
            .collect::<Vec<_>>()
            .join(" ")
    );
    println!("forced: {}", joined(&ds.forced_nodes));
    Ok(())
}

fn status_name(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Feasible => "feasible",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::TimeLimit => "time_limit",
    }
}

fn write_report(path: &std::path::Path, report: &serde_json::Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(report).map_err(|e| Failure::internal(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| Failure::internal(format!("{}: {e}", path.display())))
}

fn method_report_json(inst: &Instance, method: &str, report: &MethodReport) -> serde_json::Value {
    let solution = report.solution.as_ref().map(|s| {
        json!({
            "chosen": s.chosen,
            "robust_cost": s.robust_cost,
            "per_scenario_costs": s.per_scenario_costs,
        })
    });
    json!({
        "version": 1,
        "label": inst.label,
        "method": method,
        "status": status_name(report.status),
        "objective": report.solution.as_ref().map(|s| s.robust_cost),
        "bound": report.bound,
        "solution": solution,
        "nodes": report.nodes,
        "cuts_added": report.cuts_added,
        "wall_s": report.wall.as_secs_f64(),
    })
}

fn cmd_solve(
    input: &std::path::Path,
    method: &str,
    time_limit: f64,
    warm_start: bool,
    lp_only: bool,
    export_lp: Option<&std::path::Path>,
    out: &std::path::Path,
) -> Result<(), Failure> {
    if !time_limit.is_finite() || time_limit < 0.0 {
        return Err(Failure::usage("time limit must be nonnegative seconds"));
    }
    let inst = load(input)?;
    let m = build_transformed_graph(&inst.network);
    let ds = derive_sets(&inst.network, &m);
    let options = SolveOptions {
        time_limit: Duration::from_secs_f64(time_limit),
        warm_start,
        node_limit: None,
    };

    if lp_only || export_lp.is_some() {
        let model = match method {
            "fb" => build_ip_fb(&inst, &m, &ds)?.0,
            "cb" => build_ip_cb_base(&inst, &m, &ds)?.0,
            "it" => {
                return Err(Failure::usage(
                    "the iterative method has no single model; use fb or cb with --lp-only/--export-lp",
                ))
            }
            other => return Err(Failure::usage(format!("unknown method '{other}'"))),
        };
        if let Some(path) = export_lp {
            export_lp_file(&model, path).map_err(|e| Failure::internal(e.to_string()))?;
            println!("wrote {}", path.display());
        }
        if lp_only {
            let lp = solve_lp_relaxation(&model).map_err(|e| Failure::internal(e.to_string()))?;
            let report = json!({
                "version": 1,
                "label": inst.label,
                "method": method,
                "mode": "lp",
                "status": status_name(lp.status),
                "objective": lp.objective,
                "wall_s": lp.wall.as_secs_f64(),
            });
            write_report(out, &report)?;
            println!("lp objective: {:?}", lp.objective);
            if lp.status == SolveStatus::Infeasible {
                return Err(Failure::infeasible("relaxation is infeasible"));
            }
            return Ok(());
        }
    }

    let (report, trace): (MethodReport, Option<IterationTrace>) = match method {
        "fb" => (solve_ip_fb(&inst, &m, &ds, &options)?, None),
        "cb" => {
            let (r, _) = solve_ip_cb(&inst, &m, &ds, &options)?;
            (r, None)
        }
        "it" => {
            let (r, t) = solve_it_fb(&inst, &m, &ds, &options)?;
            (r, Some(t))
        }
        other => return Err(Failure::usage(format!("unknown method '{other}'"))),
    };

    let mut doc = method_report_json(&inst, method, &report);
    if let Some(trace) = trace {
        doc["trace"] =
            serde_json::to_value(&trace).map_err(|e| Failure::internal(e.to_string()))?;
    }
    write_report(out, &doc)?;
    match &report.solution {
        Some(s) => println!(
            "{}: {} cost {} chosen {:?}",
            inst.label,
            status_name(report.status),
            s.robust_cost,
            s.chosen
        ),
        None => println!("{}: {}", inst.label, status_name(report.status)),
    }
    if report.status == SolveStatus::Infeasible {
        return Err(Failure::infeasible(
            "no node set satisfies the survivability requirements",
        ));
    }
    Ok(())
}

fn cmd_oracle(
    input: &std::path::Path,
    predicate: &str,
    check: Option<&str>,
) -> Result<(), Failure> {
    let inst = load(input)?;
    let predicate = match predicate {
        "structural" => Predicate::Structural,
        "semantic" => Predicate::Semantic,
        other => {
            return Err(Failure::usage(format!(
                "unknown predicate '{other}' (expected structural or semantic)"
            )))
        }
    };

    if let Some(list) = check {
        let mut chosen: Vec<NodeId> = Vec::new();
        if !list.trim().is_empty() {
            for part in list.split(',') {
                let v: NodeId = part
                    .trim()
                    .parse()
                    .map_err(|_| Failure::usage(format!("bad node '{part}'")))?;
                if v == 0 || v > inst.n() {
                    return Err(Failure::usage(format!(
                        "node {v} is outside 1..={}",
                        inst.n()
                    )));
                }
                chosen.push(v);
            }
        }
        chosen.sort_unstable();
        chosen.dedup();
        let feasible = match predicate {
            Predicate::Structural => {
                let m = build_transformed_graph(&inst.network);
                let ds = derive_sets(&inst.network, &m);
                feasible_structural(&inst, &m, &ds, &chosen)
            }
            Predicate::Semantic => feasible_semantic(&inst, &chosen)
                .map_err(|e| Failure::validation(e.to_string()))?,
        };
        println!(
            "{}",
            json!({ "version": 1, "label": inst.label, "check": chosen, "feasible": feasible })
        );
        if !feasible {
            return Err(Failure::infeasible("the given set fails the predicate"));
        }
        return Ok(());
    }

    let best = brute_force_optimum(&inst, predicate)?;
    match best {
        Some(sol) => {
            println!(
                "{}",
                json!({
                    "version": 1,
                    "label": inst.label,
                    "optimum": {
                        "chosen": sol.chosen,
                        "robust_cost": sol.robust_cost,
                        "per_scenario_costs": sol.per_scenario_costs,
                    },
                })
            );
            Ok(())
        }
        None => {
            println!(
                "{}",
                json!({ "version": 1, "label": inst.label, "optimum": null })
            );
            Err(Failure::infeasible("no feasible node set exists"))
        }
    }
}

fn cmd_bench(
    spec_path: &std::path::Path,
    out: &std::path::Path,
    jobs: Option<usize>,
) -> Result<(), Failure> {
    let text = std::fs::read_to_string(spec_path)
        .map_err(|e| Failure::internal(format!("{}: {e}", spec_path.display())))?;
    let mut spec: ExperimentSpec = serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("{}: {e}", spec_path.display())))?;
    if let Some(jobs) = jobs {
        spec.jobs = jobs;
    }
    let run = run_experiment(&spec, out)?;
    println!(
        "{} records -> {}",
        run.records.len(),
        out.join("records.csv").display()
    );
    for skip in &run.skipped {
        match skip.method {
            Some(m) => println!("skipped {} [{m}]: {}", skip.instance, skip.reason),
            None => println!("skipped {}: {}", skip.instance, skip.reason),
        }
    }
    Ok(())
}

fn cmd_profile(input: &std::path::Path, out: &std::path::Path) -> Result<(), Failure> {
    let csv_path = input.join("records.csv");
    let text = std::fs::read_to_string(&csv_path)
        .map_err(|e| Failure::internal(format!("{}: {e}", csv_path.display())))?;
    let records = parse_records_csv(&text, &csv_path)?;
    let (curves, excluded) = performance_profile(&records);
    std::fs::write(out, profile_csv(&curves))
        .map_err(|e| Failure::internal(format!("{}: {e}", out.display())))?;
    if excluded > 0 {
        println!(
            "{} curves -> {} ({excluded} instance(s) excluded: nothing finished)",
            curves.len(),
            out.display(),
        );
    } else {
        println!("{} curves -> {}", curves.len(), out.display());
    }
    Ok(())
}

fn cmd_validate(input: &std::path::Path) -> Result<(), Failure> {
    let inst = load(input).map_err(|e| Failure::validation(e.to_string()))?;
    require_edge_connectivity(&inst.network, inst.gamma)
        .map_err(|e| Failure::validation(e.to_string()))?;
    println!(
        "ok: {} (n={}, edges={}, scenarios={}, gamma={})",
        inst.label,
        inst.n(),
        inst.network.edges().len(),
        inst.scenarios.rows().len(),
        inst.gamma
    );
    Ok(())
}
