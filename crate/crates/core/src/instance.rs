//! Problem instances: a network, cost scenarios, a failure budget, and the
//! random generator plus on-disk format for them.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{unit_max_flow, GraphError, Network, NodeId};

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("invalid generator config: {reason}")]
    BadConfig { reason: String },
    #[error("could not repair {label} to {required}-edge-connectivity within {attempts} edge swaps")]
    RepairFailed {
        label: String,
        required: usize,
        attempts: usize,
    },
    #[error("an instance needs at least one cost scenario")]
    NoScenarios,
    #[error("scenario rows have differing lengths: {first} vs {other}")]
    RaggedScenarios { first: usize, other: usize },
    #[error("scenario row length {width} does not match node count {n}")]
    ScenarioWidth { width: usize, n: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: unsupported file version {got} (this build reads version 1)")]
    Version { path: String, got: u32 },
}

/// N cost rows, one value per node per row. The worst case over rows is the
/// robust objective, so at least one row is required.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioSet {
    rows: Vec<Vec<u64>>,
}

impl ScenarioSet {
    pub fn new(rows: Vec<Vec<u64>>) -> Result<Self, InstanceError> {
        let first = match rows.first() {
            None => return Err(InstanceError::NoScenarios),
            Some(row) => row.len(),
        };
        for row in &rows {
            if row.len() != first {
                return Err(InstanceError::RaggedScenarios {
                    first,
                    other: row.len(),
                });
            }
        }
        Ok(ScenarioSet { rows })
    }

    /// Number of scenarios N.
    pub fn count(&self) -> usize {
        self.rows.len()
    }

    /// Number of nodes covered by each row.
    pub fn width(&self) -> usize {
        self.rows[0].len()
    }

    /// Cost of node `v` under scenario `k` (0-based scenario index).
    pub fn cost(&self, k: usize, v: NodeId) -> u64 {
        self.rows[k][v - 1]
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }
}

/// A full problem: the physical network, the cost scenarios, and the number
/// of simultaneous edge failures `gamma` a placement must survive. `seed`
/// records how the instance was generated (0 for hand-built ones).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub network: Network,
    pub scenarios: ScenarioSet,
    pub gamma: usize,
    pub seed: u64,
    pub label: String,
}

impl Instance {
    pub fn new(
        network: Network,
        scenarios: ScenarioSet,
        gamma: usize,
        seed: u64,
        label: String,
    ) -> Result<Self, InstanceError> {
        if scenarios.width() != network.node_count() {
            return Err(InstanceError::ScenarioWidth {
                width: scenarios.width(),
                n: network.node_count(),
            });
        }
        Ok(Instance {
            network,
            scenarios,
            gamma,
            seed,
            label,
        })
    }

    pub fn n(&self) -> usize {
        self.network.node_count()
    }
}

/// The two random families: `Gen1` draws lengths from {100..300} and costs
/// from {100..200}; `Gen2` draws mostly long lengths ({180..200}, one in ten
/// from {100..120}) and costs from {180..200}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    Gen1,
    Gen2,
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flavor::Gen1 => "gen1",
            Flavor::Gen2 => "gen2",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub n: usize,
    /// Fraction of all node pairs that become edges, in (0, 1].
    pub dens: f64,
    /// Scenario count N.
    pub scenarios: usize,
    pub flavor: Flavor,
    /// Draw lengths from {151..300} instead, so that no two-hop path fits
    /// within the default reach and the transformation adds nothing.
    pub large_mode: bool,
    pub d_max: u64,
    pub gamma: usize,
    pub seed: u64,
}

impl GenConfig {
    pub fn new(n: usize, dens: f64, scenarios: usize, flavor: Flavor, seed: u64) -> Self {
        GenConfig {
            n,
            dens,
            scenarios,
            flavor,
            large_mode: false,
            d_max: 300,
            gamma: 1,
            seed,
        }
    }

    fn length_ceiling(&self) -> u64 {
        if self.large_mode {
            300
        } else {
            match self.flavor {
                Flavor::Gen1 => 300,
                Flavor::Gen2 => 200,
            }
        }
    }

    fn validate(&self) -> Result<(), InstanceError> {
        let bad = |reason: String| Err(InstanceError::BadConfig { reason });
        if self.n < 2 {
            return bad(format!("n={} leaves nothing to connect", self.n));
        }
        if !(self.dens > 0.0 && self.dens <= 1.0) {
            return bad(format!("dens={} outside (0,1]", self.dens));
        }
        let pairs = (self.n * (self.n - 1) / 2) as f64;
        if self.dens * pairs < self.n as f64 {
            return bad(format!(
                "dens={} gives fewer than n={} edges, too sparse to be 2-edge-connected",
                self.dens, self.n
            ));
        }
        if self.scenarios == 0 {
            return bad("at least one cost scenario is required".into());
        }
        if self.d_max < self.length_ceiling() {
            return bad(format!(
                "d_max={} below the flavor's maximum edge length {}",
                self.d_max,
                self.length_ceiling()
            ));
        }
        Ok(())
    }

    pub fn auto_label(&self) -> String {
        let large = if self.large_mode { "-large" } else { "" };
        format!(
            "{}-n{}-d{:.2}-N{}-g{}{}-s{}",
            self.flavor, self.n, self.dens, self.scenarios, self.gamma, large, self.seed
        )
    }
}

fn draw_length(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> u64 {
    if cfg.large_mode {
        rng.gen_range(151..=300)
    } else {
        match cfg.flavor {
            Flavor::Gen1 => rng.gen_range(100..=300),
            Flavor::Gen2 => {
                if rng.gen_bool(0.1) {
                    rng.gen_range(100..=120)
                } else {
                    rng.gen_range(180..=200)
                }
            }
        }
    }
}

/// The side of some cut with fewer than `k` crossing edges, if one exists.
/// Sweeping max flow from node 1 finds one because any such cut separates
/// node 1 from somebody.
fn violated_cut(n: usize, edges: &[(NodeId, NodeId, u64)], k: usize) -> Option<Vec<bool>> {
    let pairs: Vec<_> = edges.iter().map(|&(u, v, _)| (u, v)).collect();
    if n <= 1 {
        return None;
    }
    for t in 2..=n {
        let (value, side) = unit_max_flow(n, &pairs, 1, t, k);
        if value < k {
            return side;
        }
    }
    None
}

/// Draws a random instance. Everything is a pure function of `cfg`: the same
/// config (seed included) produces bit-identical instances. The stream is a
/// seeded ChaCha8 generator, chosen for its portable, documented algorithm,
/// and is consumed in a fixed order: edge subset, lengths in sorted edge
/// order, repair swaps, then costs row by row.
pub fn generate(cfg: &GenConfig) -> Result<Instance, InstanceError> {
    cfg.validate()?;
    let n = cfg.n;
    let npairs = n * (n - 1) / 2;
    let m = (cfg.dens * npairs as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // Partial Fisher-Yates: the first m entries are a uniform m-subset.
    let mut pairs = Vec::with_capacity(npairs);
    for u in 1..=n {
        for v in (u + 1)..=n {
            pairs.push((u, v));
        }
    }
    for i in 0..m {
        let j = rng.gen_range(i..npairs);
        pairs.swap(i, j);
    }
    let mut chosen: Vec<_> = pairs[..m].to_vec();
    chosen.sort_unstable();

    let mut edges: Vec<(NodeId, NodeId, u64)> = chosen
        .into_iter()
        .map(|(u, v)| (u, v, draw_length(&mut rng, cfg)))
        .collect();

    // Repair: while some cut is too thin, swap one random edge that does not
    // cross it for a random absent pair that does. Edge count is preserved.
    let required = (cfg.gamma + 1).max(2);
    let budget = 50 * m;
    let mut attempts = 0;
    while let Some(side) = violated_cut(n, &edges, required) {
        attempts += 1;
        let fail = || InstanceError::RepairFailed {
            label: cfg.auto_label(),
            required,
            attempts,
        };
        if attempts > budget {
            return Err(fail());
        }
        let present: BTreeSet<(NodeId, NodeId)> =
            edges.iter().map(|&(u, v, _)| (u, v)).collect();
        let removable: Vec<usize> = (0..edges.len())
            .filter(|&i| side[edges[i].0] == side[edges[i].1])
            .collect();
        let mut missing_cross = Vec::new();
        for u in 1..=n {
            for v in (u + 1)..=n {
                if side[u] != side[v] && !present.contains(&(u, v)) {
                    missing_cross.push((u, v));
                }
            }
        }
        if removable.is_empty() || missing_cross.is_empty() {
            return Err(fail());
        }
        let out = removable[rng.gen_range(0..removable.len())];
        let (u, v) = missing_cross[rng.gen_range(0..missing_cross.len())];
        edges[out] = (u, v, draw_length(&mut rng, cfg));
        edges.sort_unstable();
    }

    let cost_range = match cfg.flavor {
        Flavor::Gen1 => 100..=200u64,
        Flavor::Gen2 => 180..=200u64,
    };
    let mut rows = Vec::with_capacity(cfg.scenarios);
    for _ in 0..cfg.scenarios {
        rows.push(
            (1..=n)
                .map(|_| rng.gen_range(cost_range.clone()))
                .collect(),
        );
    }

    let network = Network::new(n, cfg.d_max, &edges)?;
    Instance::new(
        network,
        ScenarioSet::new(rows)?,
        cfg.gamma,
        cfg.seed,
        cfg.auto_label(),
    )
}

/// On-disk shape. Field order is the canonical order in the emitted file.
#[derive(Serialize, Deserialize)]
struct InstanceFile {
    version: u32,
    label: String,
    n: usize,
    d_max: u64,
    gamma: usize,
    edges: Vec<(NodeId, NodeId, u64)>,
    scenarios: Vec<Vec<u64>>,
    seed: u64,
}

const FILE_VERSION: u32 = 1;

/// The canonical serialized form: fixed field order, edges sorted with
/// u < v lexicographically, newline-terminated. Equal instances serialize
/// to equal bytes.
pub fn to_file_string(inst: &Instance) -> String {
    let file = InstanceFile {
        version: FILE_VERSION,
        label: inst.label.clone(),
        n: inst.network.node_count(),
        d_max: inst.network.d_max(),
        gamma: inst.gamma,
        edges: inst.network.edges().to_vec(),
        scenarios: inst.scenarios.rows().to_vec(),
        seed: inst.seed,
    };
    let mut text = serde_json::to_string_pretty(&file).expect("instance serializes");
    text.push('\n');
    text
}

/// Parses the file format; `origin` names the source in errors. Edge order
/// in the input is not significant.
pub fn from_file_str(text: &str, origin: &str) -> Result<Instance, InstanceError> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|source| InstanceError::Parse {
        path: origin.to_string(),
        source,
    })?;
    if file.version != FILE_VERSION {
        return Err(InstanceError::Version {
            path: origin.to_string(),
            got: file.version,
        });
    }
    let network = Network::new(file.n, file.d_max, &file.edges)?;
    Instance::new(
        network,
        ScenarioSet::new(file.scenarios)?,
        file.gamma,
        file.seed,
        file.label,
    )
}

pub fn save(inst: &Instance, path: &Path) -> Result<(), InstanceError> {
    std::fs::write(path, to_file_string(inst)).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load(path: &Path) -> Result<Instance, InstanceError> {
    let text = std::fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    from_file_str(&text, &path.display().to_string())
}
