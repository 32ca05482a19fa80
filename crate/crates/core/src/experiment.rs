//! Regret sweeps over budgets, horizons and strategies.
//!
//! A sweep cell is `(budget, multiplier, strategy, trial)` with horizon
//! `T = multiplier · C`. Each cell gets its own environment stream derived
//! from the base seed and the cell fields. The reward table `α` depends only
//! on `(budget, trial)` (or on nothing, with `fix_alpha`), so all strategies
//! and horizons in a trial face the same instance.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::bandit::{exact_rewards, regret_from_rewards, run_strategy, StrategyKind};
use crate::bif::{parse_bif, to_causal_dag};
use crate::error::{Error, Result};
use crate::inference::SimulatedEnvironment;
use crate::model::{
    binary_tree_dag, enumerate_budget_interventions, random_alpha, CausalDag, Instance, Intervention,
    Structure,
};
use crate::rng::{derive_seed, stream};

pub const CSV_HEADER: &str = "instance,strategy,budget,horizon,trials,mean_regret,std_err,runtime_ms";

/// Worker count override for sweeps.
pub const WORKERS_ENV: &str = "CAUSAL_BANDIT_WORKERS";

const ALPHA_TAG: u64 = 0xA1FA;
const PHASE2_TAG: u64 = 0x5A3B;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceSource {
    Tree { height: u32 },
    Bif { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub source: InstanceSource,
    pub budgets: Vec<usize>,
    pub multipliers: Vec<u64>,
    pub trials: usize,
    pub seed: u64,
    pub strategies: Vec<StrategyKind>,
    /// Keep one `α` per budget across trials.
    pub fix_alpha: bool,
    /// Record wall-clock runtimes. Off by default so reports are
    /// reproducible byte for byte.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            source: InstanceSource::Tree { height: 4 },
            budgets: vec![2, 4, 8],
            multipliers: (3..=9).collect(),
            trials: 10,
            seed: 0,
            strategies: StrategyKind::ALL.to_vec(),
            fix_alpha: false,
            timing: false,
        }
    }
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::Config(format!("{key}: cannot parse '{s}'"))))
        .collect()
}

fn scalar<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{value}'")))
}

fn boolean(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => Err(Error::Config(format!("{key}: expected a boolean, got '{other}'"))),
    }
}

impl ExperimentConfig {
    /// Reads `key = value` lines over the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = ExperimentConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
            config
                .set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {}", i + 1, strip(e))))?;
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.replace('-', "_").as_str() {
            "tree_height" => self.source = InstanceSource::Tree { height: scalar(key, value)? },
            "bif" => self.source = InstanceSource::Bif { path: PathBuf::from(value.trim()) },
            "budgets" => self.budgets = list(key, value)?,
            "multipliers" => self.multipliers = list(key, value)?,
            "trials" => self.trials = scalar(key, value)?,
            "seed" => self.seed = scalar(key, value)?,
            "strategies" => {
                let mut kinds: Vec<StrategyKind> = list(key, value)?;
                kinds.sort();
                kinds.dedup();
                self.strategies = kinds;
            }
            "fix_alpha" => self.fix_alpha = boolean(key, value)?,
            "timing" => self.timing = boolean(key, value)?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Applies `key=value` overrides in order.
    pub fn apply_overrides<'a>(&mut self, overrides: impl IntoIterator<Item = &'a str>) -> Result<()> {
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override '{o}' is not key=value")))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.budgets.is_empty() || self.multipliers.is_empty() || self.strategies.is_empty() {
            return Err(Error::Config("budgets, multipliers and strategies must be nonempty".into()));
        }
        if self.budgets.contains(&0) || self.multipliers.contains(&0) {
            return Err(Error::Config("budgets and multipliers must be positive".into()));
        }
        if self.strategies.iter().any(|s| s.is_proposed()) {
            if let Some(m) = self.multipliers.iter().find(|&&m| m < 3) {
                return Err(Error::Config(format!(
                    "multiplier {m} is below 3, which the proposed strategies cannot run"
                )));
            }
        }
        Ok(())
    }

    /// The config as `key=value` text that [`parse`](Self::parse) reads back.
    pub fn to_text(&self) -> String {
        let join = |v: Vec<String>| v.join(",");
        let mut s = String::new();
        match &self.source {
            InstanceSource::Tree { height } => writeln!(s, "tree_height={height}"),
            InstanceSource::Bif { path } => writeln!(s, "bif={}", path.display()),
        }
        .unwrap();
        let _ = writeln!(s, "budgets={}", join(self.budgets.iter().map(|b| b.to_string()).collect()));
        let _ = writeln!(s, "multipliers={}", join(self.multipliers.iter().map(|m| m.to_string()).collect()));
        let _ = writeln!(s, "trials={}", self.trials);
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "strategies={}", join(self.strategies.iter().map(|k| k.name().to_string()).collect()));
        let _ = writeln!(s, "fix_alpha={}", self.fix_alpha);
        let _ = writeln!(s, "timing={}", self.timing);
        s
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::Config(m) => m,
        other => other.to_string(),
    }
}

/// The graph a sweep runs on, with its intervention targets.
#[derive(Debug, Clone)]
pub struct Graph {
    pub label: String,
    pub dag: CausalDag,
    pub targets: Vec<usize>,
}

impl Graph {
    pub fn load(source: &InstanceSource) -> Result<Self> {
        match source {
            InstanceSource::Tree { height } => {
                let (dag, leaves) = binary_tree_dag(*height)?;
                Ok(Graph {
                    label: format!("tree-h{height}"),
                    dag,
                    targets: leaves,
                })
            }
            InstanceSource::Bif { path } => {
                let net = parse_bif(&std::fs::read_to_string(path)?)?;
                let mapped = to_causal_dag(&net)?;
                let label = path
                    .file_stem()
                    .map_or_else(|| net.name.clone(), |s| s.to_string_lossy().into_owned());
                Ok(Graph {
                    label,
                    dag: mapped.dag,
                    targets: mapped.targets,
                })
            }
        }
    }

    pub fn structure(&self, budget: usize) -> Result<Structure> {
        if budget > self.targets.len() {
            return Err(Error::Config(format!(
                "budget {budget} exceeds the {} intervention targets of {}",
                self.targets.len(),
                self.label
            )));
        }
        let arms = enumerate_budget_interventions(&self.dag, &self.targets, budget)?;
        Structure::new(self.dag.clone(), arms)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceSummary {
    pub budget: usize,
    pub nodes: usize,
    pub rows: usize,
    pub arms: usize,
}

/// `N`, `C` and `|A|` per budget.
pub fn summarize(graph: &Graph, budgets: &[usize]) -> Result<Vec<InstanceSummary>> {
    budgets
        .iter()
        .map(|&b| {
            Ok(InstanceSummary {
                budget: b,
                nodes: graph.dag.node_count(),
                rows: graph.dag.row_count(),
                arms: graph.structure(b)?.arm_count(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowOutcome {
    Done {
        mean_regret: f64,
        std_err: f64,
        runtime_ms: f64,
    },
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub instance: String,
    pub strategy: StrategyKind,
    pub budget: usize,
    pub horizon: u64,
    pub trials: usize,
    pub outcome: RowOutcome,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RegretReport {
    pub rows: Vec<ReportRow>,
}

impl RegretReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let tail = match &r.outcome {
                RowOutcome::Done {
                    mean_regret,
                    std_err,
                    runtime_ms,
                } => format!("{mean_regret:.8},{std_err:.8},{runtime_ms:.3}"),
                RowOutcome::Failed(_) => "FAILED,FAILED,FAILED".into(),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{tail}",
                r.instance, r.strategy, r.budget, r.horizon, r.trials
            );
        }
        out
    }

    pub fn failures(&self) -> impl Iterator<Item = (&ReportRow, &str)> {
        self.rows.iter().filter_map(|r| match &r.outcome {
            RowOutcome::Failed(m) => Some((r, m.as_str())),
            RowOutcome::Done { .. } => None,
        })
    }
}

/// Mean and standard error (sample deviation over `√n`; 0 for one value).
pub fn mean_and_std_err(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Seed of the environment stream for one cell.
pub fn cell_seed(base: u64, budget: usize, multiplier: u64, strategy: StrategyKind, trial: usize) -> u64 {
    derive_seed(base, &[budget as u64, multiplier, strategy.id(), trial as u64])
}

/// Seed of `α` for one `(budget, trial)`.
pub fn alpha_seed(config: &ExperimentConfig, budget: usize, trial: usize) -> u64 {
    let trial = if config.fix_alpha { 0 } else { trial as u64 + 1 };
    derive_seed(config.seed, &[ALPHA_TAG, budget as u64, trial])
}

struct TrialSetup {
    instance: Instance,
    rewards: Vec<f64>,
}

fn run_cell(
    setup: &TrialSetup,
    strategy: StrategyKind,
    horizon: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    let start = Instant::now();
    let mut env = SimulatedEnvironment::new(&setup.instance, stream(seed));
    let mut rng = stream(derive_seed(seed, &[PHASE2_TAG]));
    let result = run_strategy(strategy, &mut env, setup.instance.structure(), horizon, &mut rng)?;
    let regret = regret_from_rewards(&setup.rewards, result.chosen)?;
    Ok((regret, start.elapsed().as_secs_f64() * 1e3))
}

fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{WORKERS_ENV} must be a positive integer, got '{v}'")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Internal(e.to_string()))?;
            Ok(pool.install(f))
        }
        Err(_) => Ok(f()),
    }
}

/// Runs every cell and aggregates rows ordered by budget, multiplier and
/// strategy. A failing trial marks its row failed.
pub fn run_sweep(config: &ExperimentConfig) -> Result<RegretReport> {
    config.validate()?;
    let graph = Graph::load(&config.source)?;
    run_sweep_on(config, &graph)
}

/// [`run_sweep`] on an already loaded graph.
pub fn run_sweep_on(config: &ExperimentConfig, graph: &Graph) -> Result<RegretReport> {
    config.validate()?;
    let c = graph.dag.row_count() as u64;
    let structures: Vec<Structure> = config
        .budgets
        .iter()
        .map(|&b| graph.structure(b))
        .collect::<Result<_>>()?;

    with_pool(|| -> Result<RegretReport> {
        let setups: Vec<Vec<TrialSetup>> = structures
            .iter()
            .zip(&config.budgets)
            .map(|(s, &b)| {
                (0..config.trials)
                    .into_par_iter()
                    .map(|t| {
                        let alpha = random_alpha(&graph.dag, alpha_seed(config, b, t));
                        let instance = Instance::from_structure(s.clone(), alpha)?;
                        let rewards = exact_rewards(&instance)?;
                        Ok(TrialSetup { instance, rewards })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;

        let mut cells = Vec::new();
        for (bi, &b) in config.budgets.iter().enumerate() {
            for &m in &config.multipliers {
                for &k in &config.strategies {
                    for t in 0..config.trials {
                        cells.push((bi, b, m, k, t));
                    }
                }
            }
        }
        let outcomes: Vec<Result<(f64, f64)>> = cells
            .par_iter()
            .map(|&(bi, b, m, k, t)| run_cell(&setups[bi][t], k, m * c, cell_seed(config.seed, b, m, k, t)))
            .collect();

        let mut rows = Vec::new();
        for (chunk, results) in cells.chunks(config.trials).zip(outcomes.chunks(config.trials)) {
            let (_, b, m, k, _) = chunk[0];
            let outcome = match results.iter().find_map(|r| r.as_ref().err()) {
                Some(e) => RowOutcome::Failed(e.to_string()),
                None => {
                    let regrets: Vec<f64> = results.iter().map(|r| r.as_ref().unwrap().0).collect();
                    let (mean_regret, std_err) = mean_and_std_err(&regrets);
                    let runtime_ms = if config.timing {
                        results.iter().map(|r| r.as_ref().unwrap().1).sum::<f64>() / results.len() as f64
                    } else {
                        0.0
                    };
                    RowOutcome::Done {
                        mean_regret,
                        std_err,
                        runtime_ms,
                    }
                }
            };
            rows.push(ReportRow {
                instance: graph.label.clone(),
                strategy: k,
                budget: b,
                horizon: m * c,
                trials: config.trials,
                outcome,
            });
        }
        Ok(RegretReport { rows })
    })?
}

/// Intervention set for a graph and budget, for callers outside a sweep.
pub fn budget_interventions(graph: &Graph, budget: usize) -> Result<Vec<Intervention>> {
    Ok(graph.structure(budget)?.interventions().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_through_text() {
        let mut c = ExperimentConfig::default();
        c.apply_overrides(["budgets=1,3", "strategies=uniform,proposed_practical", "fix-alpha=true"])
            .unwrap();
        assert_eq!(ExperimentConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn config_errors() {
        assert!(ExperimentConfig::parse("trials").is_err());
        assert!(ExperimentConfig::parse("colour=red").is_err());
        let c = ExperimentConfig::parse("trials=0").unwrap();
        assert!(c.validate().is_err());
        let c = ExperimentConfig::parse("multipliers=1,2\nstrategies=proposed-paper").unwrap();
        assert!(c.validate().is_err());
        let c = ExperimentConfig::parse("multipliers=1,2\nstrategies=uniform,successive-rejects").unwrap();
        assert!(c.validate().is_ok());
    }

    #[test]
    fn std_err_of_known_values() {
        let (m, s) = mean_and_std_err(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        // Sample variance 5/3, over 4.
        assert!((s - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_and_std_err(&[0.3]), (0.3, 0.0));
    }
}
