//! The acceptance gate. Each test is one numbered criterion and prints one
//! ACCEPT line; the shared corpus and the solver runs over it are computed
//! once and reused across criteria.

use std::collections::BTreeSet;
use std::path::PathBuf;

use once_cell::sync::Lazy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use rftrlp::bench::{performance_ratios, profile_fraction, BenchRecord, Method};
use rftrlp::cb::{build_ip_cb_base, solve_ip_cb};
use rftrlp::fb::{build_ip_fb, solve_ip_fb, MethodReport, SolveOptions};
use rftrlp::graph::{
    build_transformed_graph, derive_sets, edge_connectivity_at_least, remove_edges,
    require_edge_connectivity, DerivedSets, Network, NodeId, TransformedGraph,
};
use rftrlp::instance::{generate, load, Flavor, GenConfig, Instance, ScenarioSet};
use rftrlp::iterative::{solve_it_fb, ItError, IterationTrace};
use rftrlp::milp::{solve_lp_relaxation, SolveStatus};
use rftrlp::oracle::{
    brute_force_optimum, feasible_semantic, feasible_structural, robust_cost, Predicate, Solution,
};

fn verdict(number: usize, name: &str, problems: &[String]) {
    let ok = problems.is_empty();
    println!(
        "ACCEPT {number} {name}: {}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(
        ok,
        "criterion {number} ({name}) failed:\n{}",
        problems.join("\n")
    );
}

struct Case {
    inst: Instance,
    m: TransformedGraph,
    ds: DerivedSets,
}

fn case_for(inst: Instance) -> Case {
    let m = build_transformed_graph(&inst.network);
    let ds = derive_sets(&inst.network, &m);
    Case { inst, m, ds }
}

/// Criterion-1 grid: both flavors, five sizes, three scenario counts, seven
/// seeds each.
static CORPUS: Lazy<Vec<Case>> = Lazy::new(|| {
    let mut cases = Vec::new();
    for flavor in [Flavor::Gen1, Flavor::Gen2] {
        for n in 6..=10usize {
            for scenarios in [1usize, 5, 20] {
                for seed in 0..7u64 {
                    let cfg = GenConfig::new(n, 0.6, scenarios, flavor, seed);
                    let inst = generate(&cfg).expect("corpus generation is deterministic");
                    cases.push(case_for(inst));
                }
            }
        }
    }
    cases
});

static ORACLE_BEST: Lazy<Vec<Option<Solution>>> = Lazy::new(|| {
    CORPUS
        .iter()
        .map(|c| {
            brute_force_optimum(&c.inst, Predicate::Structural)
                .expect("corpus sizes fit the exhaustive search")
        })
        .collect()
});

#[derive(Clone)]
struct RunDoc {
    objective: Option<u64>,
    infeasible: bool,
    doc: String,
}

fn doc_from(
    method: &str,
    inst: &Instance,
    report: &MethodReport,
    trace: Option<&IterationTrace>,
) -> RunDoc {
    let solution = report.solution.as_ref().map(|s| {
        json!({
            "chosen": s.chosen,
            "robust_cost": s.robust_cost,
            "per_scenario_costs": s.per_scenario_costs,
        })
    });
    let rounds = trace.map(|t| {
        t.rounds
            .iter()
            .map(|r| {
                json!({
                    "index": r.index,
                    "master_set": r.master_set,
                    "free_set": r.free_set,
                    "k_set": r.k_set,
                    "sub_set": r.sub_set,
                    "master_objective": r.master_objective,
                    "sub_objective": r.sub_objective,
                })
            })
            .collect::<Vec<_>>()
    });
    let doc = json!({
        "label": inst.label,
        "method": method,
        "status": match report.status {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible => "feasible",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::TimeLimit => "time_limit",
        },
        "objective": report.solution.as_ref().map(|s| s.robust_cost),
        "bound": report.bound,
        "solution": solution,
        "nodes": report.nodes,
        "cuts_added": report.cuts_added,
        "rounds": rounds,
    })
    .to_string();
    RunDoc {
        objective: report.solution.as_ref().map(|s| s.robust_cost),
        infeasible: report.status == SolveStatus::Infeasible,
        doc,
    }
}

fn fb_doc(case: &Case) -> RunDoc {
    let report = solve_ip_fb(&case.inst, &case.m, &case.ds, &SolveOptions::default())
        .expect("corpus instances pass the survivability gate");
    doc_from("fb", &case.inst, &report, None)
}

fn cb_doc(case: &Case) -> RunDoc {
    let (report, _) = solve_ip_cb(&case.inst, &case.m, &case.ds, &SolveOptions::default())
        .expect("corpus instances pass the survivability gate");
    doc_from("cb", &case.inst, &report, None)
}

enum ItOutcome {
    Solved(RunDoc, IterationTrace),
    Infeasible,
}

fn it_outcome(case: &Case) -> ItOutcome {
    match solve_it_fb(&case.inst, &case.m, &case.ds, &SolveOptions::default()) {
        Ok((report, trace)) => {
            let doc = doc_from("it", &case.inst, &report, Some(&trace));
            ItOutcome::Solved(doc, trace)
        }
        Err(ItError::MasterInfeasible { .. }) => ItOutcome::Infeasible,
        Err(e) => panic!("{}: unexpected iterative failure: {e}", case.inst.label),
    }
}

static FB_RUNS: Lazy<Vec<RunDoc>> = Lazy::new(|| CORPUS.iter().map(fb_doc).collect());
static CB_RUNS: Lazy<Vec<RunDoc>> = Lazy::new(|| CORPUS.iter().map(cb_doc).collect());
static IT_RUNS: Lazy<Vec<ItOutcome>> = Lazy::new(|| CORPUS.iter().map(it_outcome).collect());

#[test]
fn criterion_1_oracle_equivalence_exact() {
    let mut problems = Vec::new();
    assert!(CORPUS.len() >= 200, "corpus holds {} cases", CORPUS.len());
    for (i, case) in CORPUS.iter().enumerate() {
        let label = &case.inst.label;
        let truth = &ORACLE_BEST[i];
        let expected = truth.as_ref().map(|s| s.robust_cost);

        let fb = &FB_RUNS[i];
        if fb.objective != expected || fb.infeasible != truth.is_none() {
            problems.push(format!(
                "{label}: fb found {:?}, exhaustive search found {expected:?}",
                fb.objective
            ));
        }
        let cb = &CB_RUNS[i];
        if cb.objective != expected || cb.infeasible != truth.is_none() {
            problems.push(format!(
                "{label}: cb found {:?}, exhaustive search found {expected:?}",
                cb.objective
            ));
        }
        match (&IT_RUNS[i], truth) {
            (ItOutcome::Solved(doc, _), Some(best)) if doc.objective == Some(best.robust_cost) => {}
            (ItOutcome::Infeasible, None) => {}
            (ItOutcome::Solved(doc, _), _) => problems.push(format!(
                "{label}: it found {:?}, exhaustive search found {expected:?}",
                doc.objective
            )),
            (ItOutcome::Infeasible, Some(best)) => problems.push(format!(
                "{label}: it reported infeasible, exhaustive search found {}",
                best.robust_cost
            )),
        }
    }
    verdict(1, "oracle-equivalence-exact", &problems);
}

#[test]
fn criterion_2_structural_implies_semantic() {
    let mut problems = Vec::new();
    let small: Vec<&Case> = CORPUS.iter().filter(|c| c.inst.n() <= 8).take(50).collect();
    assert_eq!(small.len(), 50);

    let mut gap_instances = Vec::new();
    for case in small {
        let n = case.inst.n();
        let mut structural_any = false;
        let mut violation = None;
        for mask in 0u32..(1 << n) {
            let chosen: Vec<NodeId> = (1..=n).filter(|i| mask >> (i - 1) & 1 == 1).collect();
            if feasible_structural(&case.inst, &case.m, &case.ds, &chosen) {
                structural_any = true;
                let semantic = feasible_semantic(&case.inst, &chosen)
                    .expect("corpus networks pass the survivability gate");
                if !semantic {
                    violation = Some(chosen);
                    break;
                }
            }
        }
        if let Some(chosen) = violation {
            problems.push(format!(
                "{}: {chosen:?} satisfies the degree conditions but fails under some failure set",
                case.inst.label
            ));
            continue;
        }
        if !structural_any {
            let semantic_any = (0u32..(1 << n)).any(|mask| {
                let chosen: Vec<NodeId> = (1..=n).filter(|i| mask >> (i - 1) & 1 == 1).collect();
                feasible_semantic(&case.inst, &chosen).unwrap_or(false)
            });
            if semantic_any {
                gap_instances.push(case.inst.label.clone());
            }
        }
    }

    // The degree conditions are sufficient, not necessary: instances they
    // reject outright can still have survivable sets. Those cases are
    // reported, never hidden.
    let report_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../target/acceptance");
    std::fs::create_dir_all(&report_dir).expect("target directory is writable");
    let report_path = report_dir.join("degree_gap_report.txt");
    let mut text = String::from(
        "Instances with no set satisfying the degree conditions yet with a\nsurvivable set under exhaustive failure checking:\n",
    );
    if gap_instances.is_empty() {
        text.push_str("(none in this corpus sample)\n");
    } else {
        for label in &gap_instances {
            text.push_str(label);
            text.push('\n');
        }
    }
    std::fs::write(&report_path, text).expect("report file is writable");
    if !report_path.is_file() {
        problems.push("discrepancy report was not written".into());
    }
    verdict(2, "structural-implies-semantic", &problems);
}

#[test]
fn criterion_3_survivability_gate() {
    let mut problems = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(1030);

    // Graphs with a pendant node always have a bridge.
    for trial in 0..100 {
        let n = rng.gen_range(4..=10);
        let mut edges = BTreeSet::new();
        for v in 2..n {
            let u = rng.gen_range(1..v);
            edges.insert((u, v));
        }
        for _ in 0..rng.gen_range(0..=n) {
            let a = rng.gen_range(1..n);
            let b = rng.gen_range(1..n);
            if a != b {
                edges.insert((a.min(b), a.max(b)));
            }
        }
        edges.insert((rng.gen_range(1..n), n));
        let weighted: Vec<(NodeId, NodeId, u64)> = edges
            .iter()
            .map(|&(u, v)| (u, v, rng.gen_range(50..150)))
            .collect();
        let net = Network::new(n, 300, &weighted).expect("constructed graphs are simple");
        if require_edge_connectivity(&net, 1).is_ok() {
            problems.push(format!("trial {trial}: a graph with a bridge was accepted"));
        }
    }

    for seed in 0..100u64 {
        let n = 6 + (seed as usize % 7);
        let inst = generate(&GenConfig::new(n, 0.5, 1, Flavor::Gen1, seed))
            .expect("generation succeeds at these densities");
        if let Err(e) = require_edge_connectivity(&inst.network, 1) {
            problems.push(format!("seed {seed}: generator output rejected: {e}"));
        }
    }

    // Cross-check the fast verdict against removing every edge in turn.
    let mut rng = ChaCha8Rng::seed_from_u64(2060);
    for trial in 0..100 {
        let n = rng.gen_range(4..=6);
        let mut edges = BTreeSet::new();
        for v in 2..=n {
            let u = rng.gen_range(1..v);
            edges.insert((u, v));
        }
        while edges.len() < 12 && rng.gen_bool(0.7) {
            let a = rng.gen_range(1..=n);
            let b = rng.gen_range(1..=n);
            if a != b {
                edges.insert((a.min(b), a.max(b)));
            }
        }
        let weighted: Vec<(NodeId, NodeId, u64)> = edges
            .iter()
            .map(|&(u, v)| (u, v, 100))
            .collect();
        let net = Network::new(n, 300, &weighted).unwrap();
        let fast = edge_connectivity_at_least(&net, 2);
        let exhaustive = edge_connectivity_at_least(&net, 1)
            && weighted.iter().all(|&(u, v, _)| {
                let survived = remove_edges(&net, &[(u, v)]).expect("edge exists");
                edge_connectivity_at_least(&survived, 1)
            });
        if fast != exhaustive {
            problems.push(format!(
                "trial {trial}: fast verdict {fast}, edge-removal verdict {exhaustive}"
            ));
        }
    }
    verdict(3, "survivability-gate", &problems);
}

#[test]
fn criterion_4_iterative_trace_behavior() {
    let mut problems = Vec::new();
    let mut convergent = 0usize;
    for (i, case) in CORPUS.iter().enumerate() {
        let ItOutcome::Solved(_, trace) = &IT_RUNS[i] else {
            continue;
        };
        convergent += 1;
        let label = &case.inst.label;
        if !trace.master_monotone() {
            problems.push(format!("{label}: master choices grew between rounds"));
        }
        if trace.rounds.len() > case.inst.n() {
            problems.push(format!(
                "{label}: {} rounds exceeds the node count",
                trace.rounds.len()
            ));
        }
        let terminal = trace.terminal();
        if !feasible_structural(&case.inst, &case.m, &case.ds, &terminal.sub_set) {
            problems.push(format!("{label}: terminal set fails the degree conditions"));
        }
    }
    if convergent == 0 {
        problems.push("no convergent runs in the corpus".into());
    }
    verdict(4, "iterative-trace-behavior", &problems);
}

#[test]
fn criterion_5_lp_relaxation_ordering() {
    let mut problems = Vec::new();
    let mut cases = Vec::new();
    for n in 8..=12usize {
        let mut found = 0;
        for seed in 0..40u64 {
            if found == 10 {
                break;
            }
            if let Ok(inst) = generate(&GenConfig::new(n, 0.4, 10, Flavor::Gen1, seed)) {
                cases.push(case_for(inst));
                found += 1;
            }
        }
    }
    assert_eq!(cases.len(), 50, "not enough generable relaxation cases");

    let mut usable = 0usize;
    let mut fb_at_least_cb = 0usize;
    let mut ratio_sum = 0.0f64;
    for case in &cases {
        let label = &case.inst.label;
        let (fb_model, _) = build_ip_fb(&case.inst, &case.m, &case.ds).unwrap();
        let (cb_model, _) = build_ip_cb_base(&case.inst, &case.m, &case.ds).unwrap();
        let lp_fb = solve_lp_relaxation(&fb_model).unwrap();
        let lp_cb = solve_lp_relaxation(&cb_model).unwrap();
        let ip = solve_ip_fb(&case.inst, &case.m, &case.ds, &SolveOptions::default()).unwrap();
        let Some(sol) = &ip.solution else {
            continue;
        };
        let opt = sol.robust_cost as f64;
        let (Some(fb_value), Some(cb_value)) = (lp_fb.objective, lp_cb.objective) else {
            problems.push(format!("{label}: a relaxation of a solvable case came back empty"));
            continue;
        };
        usable += 1;
        if fb_value > opt + 1e-6 {
            problems.push(format!("{label}: flow relaxation {fb_value} exceeds optimum {opt}"));
        }
        if cb_value > opt + 1e-6 {
            problems.push(format!("{label}: cut relaxation {cb_value} exceeds optimum {opt}"));
        }
        if fb_value >= cb_value - 1e-6 {
            fb_at_least_cb += 1;
        }
        ratio_sum += fb_value / opt;
    }
    if usable < 30 {
        problems.push(format!("only {usable} of 50 cases were solvable"));
    } else {
        let share = fb_at_least_cb as f64 / usable as f64;
        if share < 0.8 {
            problems.push(format!(
                "flow relaxation dominated on only {:.0}% of cases",
                share * 100.0
            ));
        }
        let mean_ratio = ratio_sum / usable as f64;
        if mean_ratio < 0.85 {
            problems.push(format!("mean flow-relaxation tightness {mean_ratio:.3} below 0.85"));
        }
    }
    verdict(5, "lp-relaxation-ordering", &problems);
}

#[test]
fn criterion_6_failure_budget_two() {
    let mut problems = Vec::new();
    let mut cases = Vec::new();
    for flavor in [Flavor::Gen1, Flavor::Gen2] {
        for n in 6..=8usize {
            let mut found = 0;
            for seed in 0..60u64 {
                if found == 5 {
                    break;
                }
                let mut cfg = GenConfig::new(n, 0.7, 3, flavor, seed);
                cfg.gamma = 2;
                if let Ok(inst) = generate(&cfg) {
                    cases.push(case_for(inst));
                    found += 1;
                }
            }
        }
    }
    assert_eq!(cases.len(), 30, "not enough three-failure-proof cases");

    for case in &cases {
        let label = &case.inst.label;
        if let Err(e) = require_edge_connectivity(&case.inst.network, 2) {
            problems.push(format!("{label}: {e}"));
            continue;
        }
        let truth = brute_force_optimum(&case.inst, Predicate::Structural).unwrap();
        let report = solve_ip_fb(&case.inst, &case.m, &case.ds, &SolveOptions::default()).unwrap();
        match (&truth, &report.solution) {
            (Some(best), Some(sol)) if best.robust_cost == sol.robust_cost => {}
            (None, None) if report.status == SolveStatus::Infeasible => {}
            _ => problems.push(format!(
                "{label}: fb found {:?}, exhaustive search found {:?}",
                report.solution.as_ref().map(|s| s.robust_cost),
                truth.as_ref().map(|s| s.robust_cost)
            )),
        }
    }
    verdict(6, "failure-budget-two", &problems);
}

#[test]
fn criterion_7_robust_objective_properties() {
    let mut problems = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7001);

    for trial in 0..500 {
        let n = rng.gen_range(3..=10usize);
        let chosen: Vec<NodeId> = (1..=n).filter(|_| rng.gen_bool(0.5)).collect();
        let base: Vec<Vec<u64>> = (0..rng.gen_range(1..=4))
            .map(|_| (0..n).map(|_| rng.gen_range(0..500)).collect())
            .collect();
        let mut grown = base.clone();
        grown.push((0..n).map(|_| rng.gen_range(0..500)).collect());
        let before = robust_cost(&chosen, &ScenarioSet::new(base).unwrap()).1;
        let after = robust_cost(&chosen, &ScenarioSet::new(grown).unwrap()).1;
        if after < before {
            problems.push(format!(
                "trial {trial}: adding a scenario lowered the worst case {before} -> {after}"
            ));
        }
    }

    for trial in 0..100 {
        let n = rng.gen_range(3..=10usize);
        let chosen: Vec<NodeId> = (1..=n).filter(|_| rng.gen_bool(0.5)).collect();
        let row: Vec<u64> = (0..n).map(|_| rng.gen_range(0..500)).collect();
        let plain: u64 = chosen.iter().map(|&v| row[v - 1]).sum();
        let (per, worst) = robust_cost(&chosen, &ScenarioSet::new(vec![row]).unwrap());
        if worst != plain || per != vec![plain] {
            problems.push(format!(
                "trial {trial}: single-scenario worst case {worst} differs from the plain cost {plain}"
            ));
        }
    }

    let mut checked = 0usize;
    for seed in 0..100u64 {
        let n = 5 + (seed as usize % 3);
        let flavor = if seed % 2 == 0 { Flavor::Gen1 } else { Flavor::Gen2 };
        let mut cfg = GenConfig::new(n, 0.6, 3, flavor, seed);
        cfg.large_mode = true;
        let inst = generate(&cfg).unwrap();
        let best = brute_force_optimum(&inst, Predicate::Structural)
            .unwrap()
            .expect("direct-reach instances always have the full set available");
        let scaled_rows: Vec<Vec<u64>> = inst
            .scenarios
            .rows()
            .iter()
            .map(|row| row.iter().map(|c| c * 3).collect())
            .collect();
        let scaled = Instance::new(
            inst.network.clone(),
            ScenarioSet::new(scaled_rows).unwrap(),
            inst.gamma,
            inst.seed,
            inst.label.clone(),
        )
        .unwrap();
        let scaled_best = brute_force_optimum(&scaled, Predicate::Structural)
            .unwrap()
            .expect("scaling preserves feasibility");
        if scaled_best.chosen != best.chosen {
            problems.push(format!(
                "{}: tripling costs moved the argmin {:?} -> {:?}",
                inst.label, best.chosen, scaled_best.chosen
            ));
        }
        if scaled_best.robust_cost != 3 * best.robust_cost {
            problems.push(format!(
                "{}: tripling costs took the optimum {} -> {}",
                inst.label, best.robust_cost, scaled_best.robust_cost
            ));
        }
        checked += 1;
    }
    assert_eq!(checked, 100);
    verdict(7, "robust-objective-properties", &problems);
}

#[test]
fn criterion_8_hand_verified_fixtures() {
    let mut problems = Vec::new();

    let fixture = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/four_cycle.json");
    let inst = load(&fixture).unwrap();
    let case = case_for(inst);
    let expect_square = |tag: &str, objective: Option<u64>, problems: &mut Vec<String>| {
        if objective != Some(4) {
            problems.push(format!("four-cycle: {tag} found {objective:?}, expected 4"));
        }
    };
    let fb = solve_ip_fb(&case.inst, &case.m, &case.ds, &SolveOptions::default()).unwrap();
    expect_square("fb", fb.solution.map(|s| s.robust_cost), &mut problems);
    let (cb, _) = solve_ip_cb(&case.inst, &case.m, &case.ds, &SolveOptions::default()).unwrap();
    expect_square("cb", cb.solution.map(|s| s.robust_cost), &mut problems);
    let (it, _) = solve_it_fb(&case.inst, &case.m, &case.ds, &SolveOptions::default()).unwrap();
    expect_square("it", it.solution.map(|s| s.robust_cost), &mut problems);
    let brute = brute_force_optimum(&case.inst, Predicate::Structural).unwrap();
    expect_square("oracle", brute.map(|s| s.robust_cost), &mut problems);

    // Six-node network whose shortest 1-3 connection rides through 2.
    let net = Network::new(
        6,
        100,
        &[
            (1, 2, 60),
            (2, 3, 40),
            (1, 6, 100),
            (3, 4, 80),
            (4, 5, 70),
            (2, 5, 90),
            (4, 6, 100),
            (5, 6, 100),
        ],
    )
    .unwrap();
    let m = build_transformed_graph(&net);
    let ds = derive_sets(&net, &m);
    if ds.vbar != vec![1, 3] {
        problems.push(format!("derived degree-gap nodes {:?}, expected [1, 3]", ds.vbar));
    }
    if ds.nprime.get(&1).map(Vec::as_slice) != Some(&[2, 3][..]) {
        problems.push(format!(
            "derived path neighborhood of 1 is {:?}, expected [2, 3]",
            ds.nprime.get(&1)
        ));
    }

    let rec = |instance: &str, method: Method, ip: f64| BenchRecord {
        instance: instance.into(),
        seed: 0,
        method,
        phase_shp_s: 0.0,
        phase_ip_s: ip,
        status: "optimal".into(),
        objective: None,
        bound: None,
    };
    let (ratios, _) = performance_ratios(&[
        rec("h", Method::Fb, 2.0),
        rec("h", Method::Cb, 4.0),
    ]);
    if profile_fraction(&ratios[&Method::Fb], 1.0) != 1.0
        || profile_fraction(&ratios[&Method::Cb], 1.0) != 0.0
        || profile_fraction(&ratios[&Method::Cb], 2.0) != 1.0
    {
        problems.push("two-solver profile hand case mismatch".into());
    }
    let (ratios, _) = performance_ratios(&[
        rec("i1", Method::Fb, 1.0),
        rec("i1", Method::Cb, 2.0),
        rec("i2", Method::Fb, 2.0),
        rec("i2", Method::Cb, 1.0),
    ]);
    if profile_fraction(&ratios[&Method::Fb], 1.0) != 0.5
        || profile_fraction(&ratios[&Method::Cb], 1.0) != 0.5
    {
        problems.push("split-wins profile hand case mismatch".into());
    }
    verdict(8, "hand-verified-fixtures", &problems);
}

#[test]
fn criterion_9_determinism() {
    let mut problems = Vec::new();
    for (i, case) in CORPUS.iter().enumerate() {
        let label = &case.inst.label;
        if fb_doc(case).doc != FB_RUNS[i].doc {
            problems.push(format!("{label}: fb reports differ between runs"));
        }
        if cb_doc(case).doc != CB_RUNS[i].doc {
            problems.push(format!("{label}: cb reports differ between runs"));
        }
        match (it_outcome(case), &IT_RUNS[i]) {
            (ItOutcome::Solved(a, _), ItOutcome::Solved(b, _)) if a.doc == b.doc => {}
            (ItOutcome::Infeasible, ItOutcome::Infeasible) => {}
            _ => problems.push(format!("{label}: it reports differ between runs")),
        }
        let again = brute_force_optimum(&case.inst, Predicate::Structural).unwrap();
        if again != ORACLE_BEST[i] {
            problems.push(format!("{label}: exhaustive search differs between runs"));
        }
    }
    verdict(9, "determinism", &problems);
}
