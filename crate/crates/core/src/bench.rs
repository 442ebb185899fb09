//! Experiment harness: batch-solve generated instances under a wall-clock
//! budget, persist per-method records, and condense them into performance
//! profiles.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cb::solve_ip_cb;
use crate::fb::{solve_ip_fb, SolveOptions};
use crate::graph::{build_transformed_graph, derive_sets};
use crate::instance::{generate, Flavor, GenConfig, Instance, InstanceError};
use crate::iterative::solve_it_fb;
use crate::milp::SolveStatus;
use crate::oracle::{brute_force_optimum, Predicate};

/// Stand-in time for runs that never finished, kept finite so tables stay
/// numeric.
pub const UNSOLVED_SECS: f64 = 1e6;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("bad experiment spec: {reason}")]
    BadSpec { reason: String },
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} line {line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    Fb,
    Cb,
    It,
    Oracle,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Fb => "fb",
            Method::Cb => "cb",
            Method::It => "it",
            Method::Oracle => "oracle",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fb" => Ok(Method::Fb),
            "cb" => Ok(Method::Cb),
            "it" => Ok(Method::It),
            "oracle" => Ok(Method::Oracle),
            other => Err(format!("unknown method '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub instance: String,
    pub seed: u64,
    pub method: Method,
    /// Transformation plus derived-set seconds.
    pub phase_shp_s: f64,
    /// Model build plus search seconds.
    pub phase_ip_s: f64,
    pub status: String,
    pub objective: Option<u64>,
    pub bound: Option<f64>,
}

/// What to run: the instance grid is flavors x sizes x seeds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub methods: Vec<String>,
    pub flavors: Vec<String>,
    pub sizes: Vec<usize>,
    pub dens: f64,
    pub scenarios: usize,
    pub seeds: Vec<u64>,
    #[serde(default = "default_gamma")]
    pub gamma: usize,
    #[serde(default)]
    pub large: bool,
    #[serde(default)]
    pub d_max: Option<u64>,
    #[serde(default = "default_time_limit")]
    pub time_limit_s: f64,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
}

fn default_gamma() -> usize {
    1
}

fn default_time_limit() -> f64 {
    1800.0
}

fn default_jobs() -> usize {
    1
}

impl ExperimentSpec {
    fn methods_parsed(&self) -> Result<Vec<Method>, BenchError> {
        self.methods
            .iter()
            .map(|s| s.parse().map_err(|reason| BenchError::BadSpec { reason }))
            .collect()
    }

    fn flavors_parsed(&self) -> Result<Vec<Flavor>, BenchError> {
        self.flavors
            .iter()
            .map(|s| match s.as_str() {
                "gen1" => Ok(Flavor::Gen1),
                "gen2" => Ok(Flavor::Gen2),
                other => Err(BenchError::BadSpec {
                    reason: format!("unknown flavor '{other}'"),
                }),
            })
            .collect()
    }

    fn configs(&self) -> Result<Vec<GenConfig>, BenchError> {
        if !self.time_limit_s.is_finite() || self.time_limit_s < 0.0 {
            return Err(BenchError::BadSpec {
                reason: "time limit must be a nonnegative number of seconds".into(),
            });
        }
        let flavors = self.flavors_parsed()?;
        let mut configs = Vec::new();
        for &flavor in &flavors {
            for &n in &self.sizes {
                for &seed in &self.seeds {
                    let mut cfg = GenConfig::new(n, self.dens, self.scenarios, flavor, seed);
                    cfg.gamma = self.gamma;
                    cfg.large_mode = self.large;
                    if let Some(d) = self.d_max {
                        cfg.d_max = d;
                    }
                    configs.push(cfg);
                }
            }
        }
        Ok(configs)
    }
}

/// An instance or method that produced no record, and why.
#[derive(Debug, Clone)]
pub struct Skipped {
    pub instance: String,
    pub method: Option<Method>,
    pub reason: String,
}

#[derive(Debug)]
pub struct RunOutput {
    pub records: Vec<BenchRecord>,
    pub skipped: Vec<Skipped>,
}

fn status_name(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Feasible => "feasible",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::TimeLimit => "time_limit",
    }
}

fn run_methods(
    inst: &Instance,
    methods: &[Method],
    time_limit: Duration,
) -> (Vec<BenchRecord>, Vec<Skipped>) {
    let mut records = Vec::new();
    let mut skipped = Vec::new();

    let t0 = Instant::now();
    let m = build_transformed_graph(&inst.network);
    let ds = derive_sets(&inst.network, &m);
    let shp = t0.elapsed().as_secs_f64();

    let options = SolveOptions {
        time_limit,
        ..SolveOptions::default()
    };
    for &method in methods {
        let t1 = Instant::now();
        let outcome: Result<(SolveStatus, Option<u64>, Option<f64>), String> = match method {
            Method::Fb => solve_ip_fb(inst, &m, &ds, &options)
                .map(|r| (r.status, r.solution.map(|s| s.robust_cost), r.bound))
                .map_err(|e| e.to_string()),
            Method::Cb => solve_ip_cb(inst, &m, &ds, &options)
                .map(|(r, _)| (r.status, r.solution.map(|s| s.robust_cost), r.bound))
                .map_err(|e| e.to_string()),
            Method::It => solve_it_fb(inst, &m, &ds, &options)
                .map(|(r, _)| (r.status, r.solution.map(|s| s.robust_cost), r.bound))
                .map_err(|e| e.to_string()),
            Method::Oracle => brute_force_optimum(inst, Predicate::Structural)
                .map(|best| match best {
                    Some(sol) => (
                        SolveStatus::Optimal,
                        Some(sol.robust_cost),
                        Some(sol.robust_cost as f64),
                    ),
                    None => (SolveStatus::Infeasible, None, None),
                })
                .map_err(|e| e.to_string()),
        };
        let ip = t1.elapsed().as_secs_f64();
        match outcome {
            Ok((status, objective, bound)) => records.push(BenchRecord {
                instance: inst.label.clone(),
                seed: inst.seed,
                method,
                phase_shp_s: shp,
                phase_ip_s: ip,
                status: status_name(status).to_string(),
                objective,
                bound,
            }),
            Err(reason) => skipped.push(Skipped {
                instance: inst.label.clone(),
                method: Some(method),
                reason,
            }),
        }
    }
    (records, skipped)
}

/// Generates, persists, and solves the whole grid. Failures are collected,
/// not fatal; records come back sorted so reruns compare cleanly.
pub fn run_experiment(spec: &ExperimentSpec, out_dir: &Path) -> Result<RunOutput, BenchError> {
    let methods = spec.methods_parsed()?;
    let configs = spec.configs()?;
    let time_limit = Duration::from_secs_f64(spec.time_limit_s);

    let instance_dir = out_dir.join("instances");
    std::fs::create_dir_all(&instance_dir).map_err(|source| BenchError::Io {
        path: instance_dir.clone(),
        source,
    })?;

    let queue: Mutex<VecDeque<GenConfig>> = Mutex::new(configs.into());
    let collected: Mutex<(Vec<BenchRecord>, Vec<Skipped>)> = Mutex::new((Vec::new(), Vec::new()));

    std::thread::scope(|scope| {
        for _ in 0..spec.jobs.max(1) {
            scope.spawn(|| loop {
                let Some(cfg) = queue.lock().unwrap().pop_front() else {
                    break;
                };
                match generate(&cfg) {
                    Ok(inst) => {
                        let path = instance_dir.join(format!("{}.json", inst.label));
                        if let Err(e) = crate::instance::save(&inst, &path) {
                            collected.lock().unwrap().1.push(Skipped {
                                instance: inst.label.clone(),
                                method: None,
                                reason: e.to_string(),
                            });
                            continue;
                        }
                        let (recs, skips) = run_methods(&inst, &methods, time_limit);
                        let mut guard = collected.lock().unwrap();
                        guard.0.extend(recs);
                        guard.1.extend(skips);
                    }
                    Err(e) => collected.lock().unwrap().1.push(Skipped {
                        instance: cfg.auto_label(),
                        method: None,
                        reason: e.to_string(),
                    }),
                }
            });
        }
    });

    let (mut records, mut skipped) = collected.into_inner().unwrap();
    records.sort_by(|a, b| (&a.instance, a.method).cmp(&(&b.instance, b.method)));
    skipped.sort_by(|a, b| (&a.instance, a.method).cmp(&(&b.instance, b.method)));

    let csv_path = out_dir.join("records.csv");
    std::fs::write(&csv_path, records_csv(&records)).map_err(|source| BenchError::Io {
        path: csv_path,
        source,
    })?;

    Ok(RunOutput { records, skipped })
}

pub const RECORDS_HEADER: &str = "instance,seed,method,phase_shp_s,phase_ip_s,status,objective,bound";
pub const PROFILE_HEADER: &str = "method,tau,k";

pub fn records_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from(RECORDS_HEADER);
    out.push('\n');
    for r in records {
        let objective = r.objective.map(|v| v.to_string()).unwrap_or_default();
        let bound = r.bound.map(|v| format!("{v:.6}")).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{:.6},{:.6},{},{},{}\n",
            r.instance.replace(',', ";"),
            r.seed,
            r.method,
            r.phase_shp_s,
            r.phase_ip_s,
            r.status,
            objective,
            bound,
        ));
    }
    out
}

pub fn parse_records_csv(text: &str, origin: &Path) -> Result<Vec<BenchRecord>, BenchError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, head)) if head == RECORDS_HEADER => {}
        _ => {
            return Err(BenchError::Parse {
                path: origin.to_path_buf(),
                line: 1,
                reason: format!("expected header '{RECORDS_HEADER}'"),
            })
        }
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let err = |reason: String| BenchError::Parse {
            path: origin.to_path_buf(),
            line: idx + 1,
            reason,
        };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(err(format!("expected 8 fields, found {}", fields.len())));
        }
        records.push(BenchRecord {
            instance: fields[0].to_string(),
            seed: fields[1].parse().map_err(|_| err("bad seed".into()))?,
            method: fields[2].parse().map_err(err)?,
            phase_shp_s: fields[3].parse().map_err(|_| err("bad shp time".into()))?,
            phase_ip_s: fields[4].parse().map_err(|_| err("bad ip time".into()))?,
            status: fields[5].to_string(),
            objective: if fields[6].is_empty() {
                None
            } else {
                Some(fields[6].parse().map_err(|_| err("bad objective".into()))?)
            },
            bound: if fields[7].is_empty() {
                None
            } else {
                Some(fields[7].parse().map_err(|_| err("bad bound".into()))?)
            },
        });
    }
    Ok(records)
}

/// Geometric grid of 64 ratio thresholds from 1 to 2^10.
pub fn tau_grid() -> Vec<f64> {
    (0..64).map(|i| (10.0 * i as f64 / 63.0).exp2()).collect()
}

#[derive(Debug, Clone)]
pub struct ProfileCurve {
    pub method: Method,
    /// (tau, fraction of instances solved within tau times the best).
    pub points: Vec<(f64, f64)>,
}

/// Per-method performance ratios across instances where at least one method
/// finished; the second value counts instances no method finished.
pub fn performance_ratios(records: &[BenchRecord]) -> (BTreeMap<Method, Vec<f64>>, usize) {
    let methods: BTreeSet<Method> = records.iter().map(|r| r.method).collect();
    let mut per_instance: BTreeMap<&str, BTreeMap<Method, f64>> = BTreeMap::new();
    for r in records {
        let t = if r.status == "optimal" {
            // Sub-microsecond clock reads would make ratios blow up on ties.
            (r.phase_shp_s + r.phase_ip_s).max(1e-9)
        } else {
            UNSOLVED_SECS
        };
        per_instance.entry(&r.instance).or_default().insert(r.method, t);
    }

    let mut ratios: BTreeMap<Method, Vec<f64>> =
        methods.iter().map(|&m| (m, Vec::new())).collect();
    let mut excluded = 0usize;
    for times in per_instance.values() {
        let best = times
            .values()
            .copied()
            .fold(f64::INFINITY, f64::min)
            .max(1e-9);
        if best >= UNSOLVED_SECS {
            excluded += 1;
            continue;
        }
        for &method in &methods {
            let t = times.get(&method).copied().unwrap_or(UNSOLVED_SECS);
            ratios.get_mut(&method).unwrap().push(t / best);
        }
    }
    (ratios, excluded)
}

/// Fraction of ratios within the threshold.
pub fn profile_fraction(ratios: &[f64], tau: f64) -> f64 {
    if ratios.is_empty() {
        return 0.0;
    }
    ratios.iter().filter(|&&r| r <= tau).count() as f64 / ratios.len() as f64
}

pub fn performance_profile(records: &[BenchRecord]) -> (Vec<ProfileCurve>, usize) {
    let (ratios, excluded) = performance_ratios(records);
    let grid = tau_grid();
    let curves = ratios
        .into_iter()
        .map(|(method, rs)| ProfileCurve {
            method,
            points: grid
                .iter()
                .map(|&tau| (tau, profile_fraction(&rs, tau)))
                .collect(),
        })
        .collect();
    (curves, excluded)
}

pub fn profile_csv(curves: &[ProfileCurve]) -> String {
    let mut out = String::from(PROFILE_HEADER);
    out.push('\n');
    for curve in curves {
        for &(tau, k) in &curve.points {
            out.push_str(&format!("{},{tau:.6},{k:.6}\n", curve.method));
        }
    }
    out
}
