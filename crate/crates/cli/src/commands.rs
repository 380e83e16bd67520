//! The four subcommands as library functions returning reports.

use std::path::{Path, PathBuf};
use std::time::Instant;

use netplace::{
    backup_plan, in_c_k, matching_number, min_dilation_free_size, place, BackupError,
    GramianMetric, Horizon, Method, MetricError, ModularTestMetric, NodeSet, PlacementConfig,
    PlacementError, SetMetric, SolverMode,
};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::report::{format_value, ids, sha256_hex, InputEcho, Report, Timings};
use crate::system::{check_weights, MetricKind, SystemFile};

/// A parsed system file plus the hash of its raw bytes.
#[derive(Clone, Debug)]
pub struct Input {
    pub system: SystemFile,
    pub sha256: String,
}

impl Input {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let bytes = std::fs::read(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let text = String::from_utf8(bytes)
            .map_err(|_| CliError::Usage(format!("{} is not UTF-8", path.display())))?;
        Self::from_text(&text, path)
    }

    pub fn from_text(text: &str, path: &Path) -> Result<Self, CliError> {
        let system = SystemFile::parse(text).map_err(|error| CliError::Parse {
            path: PathBuf::from(path),
            error,
        })?;
        log::info!(
            "loaded {} nodes, {} edges",
            system.node_count(),
            system.graph.edge_count()
        );
        Ok(Input {
            system,
            sha256: sha256_hex(text.as_bytes()),
        })
    }

    fn n(&self) -> usize {
        self.system.node_count()
    }

    /// Converts 1-based ids to a node set, rejecting duplicates and ids
    /// outside `1..=n`.
    pub fn actuators(&self, raw: &[usize]) -> Result<NodeSet, CliError> {
        let n = self.n();
        let mut s = NodeSet::new();
        for &id in raw {
            if id == 0 || id > n {
                return Err(CliError::Usage(format!("actuator {id} outside 1..={n}")));
            }
            if !s.insert(id - 1) {
                return Err(CliError::Usage(format!("actuator {id} listed twice")));
            }
        }
        Ok(s)
    }

    fn report(
        &self,
        command: &'static str,
        config: Value,
        result: Value,
        started: Instant,
    ) -> Report {
        Report {
            format: crate::report::FORMAT,
            command,
            input: InputEcho {
                system_sha256: self.sha256.clone(),
                config,
            },
            result,
            timings: Timings {
                elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
            },
        }
    }
}

/// Command-line values that take precedence over the file's `[metric]`.
#[derive(Clone, Debug, Default)]
pub struct MetricOverrides {
    pub kind: Option<MetricKind>,
    pub horizon: Option<f64>,
    pub epsilon: Option<f64>,
    pub weights: Option<Vec<f64>>,
}

enum Metric {
    Gramian(GramianMetric),
    Modular(ModularTestMetric),
}

impl SetMetric<f64> for Metric {
    fn ground_size(&self) -> usize {
        match self {
            Metric::Gramian(m) => m.ground_size(),
            Metric::Modular(m) => m.ground_size(),
        }
    }

    fn evaluate(&self, s: &NodeSet) -> Result<f64, MetricError> {
        match self {
            Metric::Gramian(m) => m.evaluate(s),
            Metric::Modular(m) => m.evaluate(s),
        }
    }

    fn is_monotone(&self) -> bool {
        match self {
            Metric::Gramian(m) => m.is_monotone(),
            Metric::Modular(m) => m.is_monotone(),
        }
    }
}

impl Metric {
    fn describe(&self) -> Value {
        match self {
            Metric::Gramian(m) => json!({
                "kind": "gramian",
                "horizon": m.horizon(),
                "epsilon": m.epsilon(),
            }),
            Metric::Modular(m) => json!({
                "kind": "modular",
                "base": m.base(),
                "weights": m.weights(),
            }),
        }
    }
}

fn build_metric(input: &Input, o: &MetricOverrides) -> Result<Metric, CliError> {
    let file = input.system.metric.as_ref();
    let kind = o
        .kind
        .or(file.map(|b| b.kind))
        .unwrap_or(MetricKind::Gramian);
    let from_file = file.filter(|b| b.kind == kind);
    match kind {
        MetricKind::Gramian => {
            if o.weights.is_some() {
                return Err(CliError::Usage(
                    "--weights applies to the modular metric only".into(),
                ));
            }
            let horizon = o
                .horizon
                .or(from_file.and_then(|b| b.horizon))
                .unwrap_or(GramianMetric::<f64>::DEFAULT_HORIZON);
            let epsilon = o
                .epsilon
                .or(from_file.and_then(|b| b.epsilon))
                .unwrap_or(GramianMetric::<f64>::DEFAULT_EPSILON);
            let a = input.system.graph.adjacency_matrix();
            GramianMetric::new(a, horizon, epsilon)
                .map(Metric::Gramian)
                .map_err(|e| CliError::Usage(e.to_string()))
        }
        MetricKind::Modular => {
            if o.horizon.is_some() || o.epsilon.is_some() {
                return Err(CliError::Usage(
                    "--T and --epsilon apply to the gramian metric only".into(),
                ));
            }
            let weights = o
                .weights
                .clone()
                .or(from_file.and_then(|b| b.weights.clone()))
                .ok_or_else(|| {
                    CliError::Usage("modular metric needs --weights or a [metric] table".into())
                })?;
            check_weights(&weights, input.n()).map_err(CliError::Usage)?;
            let base = from_file.and_then(|b| b.base);
            let metric = match base {
                Some(b) => ModularTestMetric::new(b, weights),
                None => ModularTestMetric::from_weights(weights),
            };
            metric
                .map(Metric::Modular)
                .ok_or_else(|| CliError::Usage("invalid modular weights".into()))
        }
    }
}

fn metric_error(e: MetricError) -> CliError {
    match e {
        MetricError::Factorization(_) | MetricError::Linalg(_) => {
            CliError::Numerical(e.to_string())
        }
        other => CliError::Usage(other.to_string()),
    }
}

fn seed_echo(config: &mut Value, seed: Option<u64>) {
    if let Some(seed) = seed {
        config["seed"] = json!(seed);
    }
}

/// Structural diagnosis of an actuator set.
pub fn check(input: &Input, actuators: &[usize], seed: Option<u64>) -> Result<Report, CliError> {
    let started = Instant::now();
    let s = input.actuators(actuators)?;
    let g = &input.system.graph;
    let scc = g.scc();
    let components: Vec<Value> = scc
        .components
        .iter()
        .enumerate()
        .map(|(c, nodes)| {
            json!({
                "nodes": nodes.iter().map(|v| v + 1).collect::<Vec<_>>(),
                "size": nodes.len(),
                "source": scc.source_components.contains(&c),
            })
        })
        .collect();
    let accessible = !s.is_empty() && g.is_accessible(&s);
    let dilation_free = in_c_k(g, &s, s.len());
    let mut result = json!({
        "n": input.n(),
        "actuators": ids(&s),
        "accessible": accessible,
        "matching_size": matching_number(g, &s),
        "dilation_free": dilation_free,
        "k_min": min_dilation_free_size(g),
        "scc": {
            "count": scc.len(),
            "source_count": scc.source_count(),
            "components": components,
        },
        "structurally_controllable": accessible && dilation_free,
    });
    if let Some(labels) = &input.system.labels {
        result["labels"] = json!(labels);
    }
    let mut config = json!({ "actuators": ids(&s) });
    seed_echo(&mut config, seed);
    Ok(input.report("check", config, result, started))
}

#[derive(Clone, Debug)]
pub struct PlaceOptions {
    pub k: usize,
    pub method: Method,
    pub horizon: Horizon,
    pub metric: MetricOverrides,
    pub threads: usize,
    pub seed: Option<u64>,
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::ForwardGreedy => "fg",
        Method::LongHorizon => "lhfg",
    }
}

fn placement_error(e: PlacementError) -> CliError {
    match e {
        PlacementError::ZeroBudget | PlacementError::BudgetTooLarge { .. } => {
            CliError::Usage(e.to_string())
        }
        PlacementError::MetricSizeMismatch { .. } => CliError::Usage(e.to_string()),
        PlacementError::InfeasibleBudget { .. } => CliError::Infeasible(e.to_string()),
        PlacementError::InfeasibleStart { initial, k } => CliError::Infeasible(format!(
            "initial set {:?} cannot be extended to a dilation-free set of {k} actuators",
            ids(&initial)
        )),
        PlacementError::EmptyCandidate { component, current } => CliError::Infeasible(format!(
            "no admissible actuator in source component {:?} given the chosen nodes {:?}; \
             raise --k so every source component can host one",
            ids(&component),
            ids(&current)
        )),
        PlacementError::Metric(m) => metric_error(m),
    }
}

/// Greedy actuator placement under a budget.
pub fn place_cmd(input: &Input, opts: &PlaceOptions) -> Result<Report, CliError> {
    let started = Instant::now();
    let metric = build_metric(input, &opts.metric)?;
    let mut cfg = PlacementConfig::new(opts.k, opts.method);
    cfg.horizon = opts.horizon;
    cfg.threads = opts.threads;
    let r = place(&input.system.graph, &metric, &cfg).map_err(placement_error)?;
    for w in &r.warnings {
        log::warn!("{w}");
    }
    let trace: Vec<Value> = r
        .trace
        .iter()
        .map(|t| {
            json!({
                "iteration": t.iteration,
                "node": t.node + 1,
                "candidates": t.candidates,
                "rejected": t.rejected.iter().map(|v| v + 1).collect::<Vec<_>>(),
                "metric": format_value(t.metric),
                "rollout": t.rollout.map(format_value),
            })
        })
        .collect();
    let result = json!({
        "initial": ids(&r.initial),
        "set": ids(&r.set),
        "value": format_value(r.value),
        "trace": trace,
        "in_c_k": r.in_c_k,
        "structurally_controllable": r.structurally_controllable,
        "warnings": r.warnings,
    });
    let horizon = match opts.horizon {
        Horizon::Full => json!("full"),
        Horizon::Steps(d) => json!(d),
    };
    let mut config = json!({
        "k": opts.k,
        "method": method_name(opts.method),
        "horizon": horizon,
        "metric": metric.describe(),
    });
    seed_echo(&mut config, opts.seed);
    Ok(input.report("place", config, result, started))
}

fn mode_name(m: SolverMode) -> &'static str {
    match m {
        SolverMode::Exact => "exact",
        SolverMode::Greedy => "greedy",
        SolverMode::Auto => "auto",
    }
}

fn backup_error(e: BackupError) -> CliError {
    match e {
        BackupError::NotControllable(s) => CliError::Infeasible(format!(
            "actuators {:?} are not structurally controllable",
            ids(&s)
        )),
        BackupError::Infeasible { actuator } => CliError::Infeasible(format!(
            "no single backup position recovers actuator {}",
            actuator + 1
        )),
        BackupError::CertificateFailed { actuator, backup } => CliError::Infeasible(format!(
            "backup {} failed the structural re-check for actuator {}",
            backup + 1,
            actuator + 1
        )),
        other => CliError::Usage(other.to_string()),
    }
}

/// Backup positions covering every essential actuator.
pub fn backup_cmd(
    input: &Input,
    actuators: &[usize],
    mode: SolverMode,
    seed: Option<u64>,
) -> Result<Report, CliError> {
    let started = Instant::now();
    let s = input.actuators(actuators)?;
    let plan = backup_plan(&input.system.graph, &s, mode).map_err(backup_error)?;
    let families: Vec<Value> = plan
        .families
        .iter()
        .map(|(a, f)| json!({ "actuator": a + 1, "positions": ids(f) }))
        .collect();
    let certificates: Vec<Value> = plan
        .certificates
        .iter()
        .map(|c| json!({ "actuator": c.actuator + 1, "backup": c.backup.map(|b| b + 1) }))
        .collect();
    let result = json!({
        "primary": ids(&plan.primary),
        "essential": ids(&plan.essential),
        "families": families,
        "backups": ids(&plan.chosen),
        "mode": mode_name(plan.mode),
        "certificates": certificates,
    });
    let mut config = json!({ "actuators": ids(&s), "mode": mode_name(mode) });
    seed_echo(&mut config, seed);
    Ok(input.report("backup", config, result, started))
}

/// Metric value of an actuator set.
pub fn metric_cmd(
    input: &Input,
    actuators: &[usize],
    overrides: &MetricOverrides,
    seed: Option<u64>,
) -> Result<Report, CliError> {
    let started = Instant::now();
    let s = input.actuators(actuators)?;
    let metric = build_metric(input, overrides)?;
    let value = metric.evaluate(&s).map_err(metric_error)?;
    let result = json!({
        "metric": metric.describe(),
        "value": format_value(value),
    });
    let mut config = json!({ "actuators": ids(&s), "metric": metric.describe() });
    seed_echo(&mut config, seed);
    Ok(input.report("metric", config, result, started))
}
