//! End-to-end strategies and simple regret.
//!
//! The proposed strategy runs both estimation phases, evaluates
//! `μ̂(A) = P_{α̂}(Y = 1 | do(A))` for every arm and recommends the arm with
//! the largest estimate. The baselines ignore the graph: one pulls arms
//! round-robin, the other is Successive Rejects.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::inference::{exact_mu, mu_from_alpha, Environment};
use crate::model::{Instance, Structure};
use crate::phase1::{per_pair_budget, run_phase1, Phase1Output, Truncation};
use crate::phase2::{run_phase2, Mode, Phase2Output};
use crate::rng::Stream;
use crate::simplex::SolverConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyKind {
    ProposedPaper,
    ProposedPractical,
    SuccessiveRejects,
    Uniform,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [
        StrategyKind::ProposedPaper,
        StrategyKind::ProposedPractical,
        StrategyKind::SuccessiveRejects,
        StrategyKind::Uniform,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::ProposedPaper => "proposed-paper",
            StrategyKind::ProposedPractical => "proposed-practical",
            StrategyKind::SuccessiveRejects => "successive-rejects",
            StrategyKind::Uniform => "uniform",
        }
    }

    /// Stable id used when deriving per-strategy seeds.
    pub fn id(self) -> u64 {
        self as u64
    }

    pub fn is_proposed(self) -> bool {
        matches!(self, StrategyKind::ProposedPaper | StrategyKind::ProposedPractical)
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name() == s.replace('_', "-"))
            .ok_or_else(|| Error::Config(format!("unknown strategy '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyResult {
    /// Index of the recommended arm.
    pub chosen: usize,
    /// Estimated reward for every arm the strategy estimated.
    pub mu_hat: BTreeMap<usize, f64>,
    pub experiments_used: u64,
}

/// Full trace of the proposed strategy.
#[derive(Debug, Clone)]
pub struct CausalBanditRun {
    pub phase1: Phase1Output,
    pub phase2: Phase2Output,
    pub result: StrategyResult,
}

fn argmax(values: impl IntoIterator<Item = (usize, f64)>) -> usize {
    let mut best = (f64::NEG_INFINITY, 0);
    for (arm, v) in values {
        if v > best.0 {
            best = (v, arm);
        }
    }
    best.1
}

/// Experiments the strategy is allowed to consume at horizon `T`.
pub fn contracted_experiments(kind: StrategyKind, structure: &Structure, horizon: u64) -> u64 {
    if kind.is_proposed() {
        let c = structure.dag().row_count() as u64;
        2 * c * (horizon / (3 * c)) + horizon / 3
    } else if kind == StrategyKind::SuccessiveRejects {
        let k = structure.arm_count();
        if k == 1 {
            0
        } else if horizon < k as u64 {
            horizon
        } else {
            // Each rejected arm holds its phase length; the survivor holds the last.
            let schedule = successive_rejects_schedule(k, horizon);
            let total = schedule.iter().sum::<u64>() + schedule.last().copied().unwrap_or(0);
            total.min(horizon)
        }
    } else {
        horizon
    }
}

/// Runs the two-phase strategy. Paper mode truncates with `λ = C³/N` and
/// optimizes the allocation; practical mode never truncates, samples the
/// heuristic allocation and reuses phase-1 experiments.
pub fn run_causal_bandit(
    env: &mut dyn Environment,
    structure: &Structure,
    horizon: u64,
    mode: Mode,
    solver: &SolverConfig,
    rng: &mut Stream,
) -> Result<CausalBanditRun> {
    let truncation = match mode {
        Mode::Paper => Truncation::theoretical(structure.dag()),
        Mode::Practical => Truncation::Disabled,
    };
    run_causal_bandit_with(env, structure, horizon, mode, truncation, solver, rng)
}

/// [`run_causal_bandit`] with an explicit truncation rule.
pub fn run_causal_bandit_with(
    env: &mut dyn Environment,
    structure: &Structure,
    horizon: u64,
    mode: Mode,
    truncation: Truncation,
    solver: &SolverConfig,
    rng: &mut Stream,
) -> Result<CausalBanditRun> {
    per_pair_budget(structure.dag(), horizon)?;
    let phase1 = run_phase1(env, structure, truncation, horizon)?;
    let phase2 = run_phase2(env, structure, &phase1, horizon, mode, solver, rng)?;
    let dag = structure.dag();
    let mut mu_hat = BTreeMap::new();
    for (i, a) in structure.interventions().iter().enumerate() {
        mu_hat.insert(i, mu_from_alpha(&phase2.alpha_hat, dag, a)?);
    }
    let chosen = argmax(mu_hat.iter().map(|(&i, &v)| (i, v)));
    let result = StrategyResult {
        chosen,
        mu_hat,
        experiments_used: phase1.experiments + phase2.experiments,
    };
    Ok(CausalBanditRun {
        phase1,
        phase2,
        result,
    })
}

fn pull(env: &mut dyn Environment, structure: &Structure, arm: usize) -> Result<bool> {
    let a = &structure.interventions()[arm];
    Ok(env.intervene(a)?.get(structure.dag().target()))
}

/// Round-robin over the arms for `T` pulls. Arms never pulled estimate 0.
pub fn run_uniform_baseline(
    env: &mut dyn Environment,
    structure: &Structure,
    horizon: u64,
) -> Result<StrategyResult> {
    if horizon == 0 {
        return Err(Error::Budget {
            what: "the uniform baseline",
            required: 1,
            horizon,
        });
    }
    let k = structure.arm_count();
    let mut pulls = vec![0u64; k];
    let mut wins = vec![0u64; k];
    for t in 0..horizon {
        let arm = (t % k as u64) as usize;
        pulls[arm] += 1;
        wins[arm] += u64::from(pull(env, structure, arm)?);
    }
    let mu_hat: BTreeMap<usize, f64> = (0..k)
        .map(|i| (i, if pulls[i] == 0 { 0.0 } else { wins[i] as f64 / pulls[i] as f64 }))
        .collect();
    Ok(StrategyResult {
        chosen: argmax(mu_hat.iter().map(|(&i, &v)| (i, v))),
        mu_hat,
        experiments_used: horizon,
    })
}

/// Phase lengths `n_k = ⌈(T - K) / (logbar(K) (K + 1 - k))⌉` for
/// `k = 1..K-1`, with `logbar(K) = 1/2 + Σ_{i=2}^{K} 1/i`.
pub fn successive_rejects_schedule(arms: usize, horizon: u64) -> Vec<u64> {
    let k = arms as f64;
    let logbar = 0.5 + (2..=arms).map(|i| 1.0 / i as f64).sum::<f64>();
    let spare = horizon.saturating_sub(arms as u64) as f64;
    (1..arms)
        .map(|phase| (spare / (logbar * (k + 1.0 - phase as f64))).ceil() as u64)
        .collect()
}

/// Successive Rejects. With fewer experiments than arms it pulls arms
/// `0..T` once each and recommends the best of those.
pub fn run_successive_rejects(
    env: &mut dyn Environment,
    structure: &Structure,
    horizon: u64,
) -> Result<StrategyResult> {
    let k = structure.arm_count();
    if k == 1 {
        return Ok(StrategyResult {
            chosen: 0,
            mu_hat: BTreeMap::new(),
            experiments_used: 0,
        });
    }
    if horizon < k as u64 {
        let mut mu_hat = BTreeMap::new();
        for arm in 0..k {
            let v = if (arm as u64) < horizon {
                f64::from(u8::from(pull(env, structure, arm)?))
            } else {
                0.0
            };
            mu_hat.insert(arm, v);
        }
        return Ok(StrategyResult {
            chosen: argmax(mu_hat.iter().map(|(&i, &v)| (i, v))),
            mu_hat,
            experiments_used: horizon,
        });
    }

    let mut active: Vec<usize> = (0..k).collect();
    let mut pulls = vec![0u64; k];
    let mut wins = vec![0u64; k];
    let mut used = 0u64;
    for n_k in successive_rejects_schedule(k, horizon) {
        for &arm in &active {
            while pulls[arm] < n_k && used < horizon {
                wins[arm] += u64::from(pull(env, structure, arm)?);
                pulls[arm] += 1;
                used += 1;
            }
        }
        let mean = |arm: usize| {
            if pulls[arm] == 0 {
                0.0
            } else {
                wins[arm] as f64 / pulls[arm] as f64
            }
        };
        // Reject the worst, highest index on ties.
        let worst = active
            .iter()
            .copied()
            .rev()
            .min_by(|&a, &b| mean(a).total_cmp(&mean(b)))
            .expect("active set is nonempty");
        active.retain(|&a| a != worst);
    }
    let mu_hat: BTreeMap<usize, f64> = (0..k)
        .filter(|&i| pulls[i] > 0)
        .map(|i| (i, wins[i] as f64 / pulls[i] as f64))
        .collect();
    Ok(StrategyResult {
        chosen: active[0],
        mu_hat,
        experiments_used: used,
    })
}

/// Runs any strategy with default solver settings.
pub fn run_strategy(
    kind: StrategyKind,
    env: &mut dyn Environment,
    structure: &Structure,
    horizon: u64,
    rng: &mut Stream,
) -> Result<StrategyResult> {
    let solver = SolverConfig::default();
    match kind {
        StrategyKind::ProposedPaper => {
            Ok(run_causal_bandit(env, structure, horizon, Mode::Paper, &solver, rng)?.result)
        }
        StrategyKind::ProposedPractical => {
            Ok(run_causal_bandit(env, structure, horizon, Mode::Practical, &solver, rng)?.result)
        }
        StrategyKind::SuccessiveRejects => run_successive_rejects(env, structure, horizon),
        StrategyKind::Uniform => run_uniform_baseline(env, structure, horizon),
    }
}

/// `max_A μ(A) - μ(chosen)` from exact rewards.
pub fn simple_regret(instance: &Instance, chosen: usize) -> Result<f64> {
    let mus = exact_rewards(instance)?;
    regret_from_rewards(&mus, chosen)
}

/// Exact `μ(A)` for every arm.
pub fn exact_rewards(instance: &Instance) -> Result<Vec<f64>> {
    instance
        .interventions()
        .iter()
        .map(|a| exact_mu(instance, a))
        .collect()
}

pub fn regret_from_rewards(mus: &[f64], chosen: usize) -> Result<f64> {
    let best = mus.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let got = mus
        .get(chosen)
        .ok_or_else(|| Error::Parameter(format!("arm {chosen} out of {} arms", mus.len())))?;
    Ok(best - got)
}
