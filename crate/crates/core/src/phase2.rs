//! Second estimation phase: a final estimate `α̂` built from experiments
//! whose outcomes update every free node at once.
//!
//! Part 1 repeats each phase-1 pair's arm `Â_{n,π}` another `⌊T/(3C)⌋`
//! times. Part 2 draws `⌊T/3⌋` arms from an allocation `η̂`. In paper mode
//! `η̂` minimizes the plug-in ratio objective over the simplex; in practical
//! mode it is the frequency of each arm among the `Â_{n,π}`, and the phase-1
//! experiments are folded into the counts as well.

use crate::error::{Error, Result};
use crate::inference::Environment;
use crate::model::{AlphaTable, Structure};
use crate::phase1::{check_alpha_update, CountLedger, Phase1Output};
use crate::rng::Stream;
use crate::simplex::{minimize, EtaDistribution, RatioObjective, Solution, SolverConfig};

/// Probabilities below this are zeroed before sampling from `η̂`.
pub const ETA_CLIP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Paper,
    Practical,
}

#[derive(Debug, Clone)]
pub struct Phase2Output {
    /// Frequency estimates before zeroing `D_n`.
    pub raw_alpha: AlphaTable,
    pub alpha_hat: AlphaTable,
    pub counts: CountLedger,
    pub eta: EtaDistribution,
    /// The solver certificate in paper mode.
    pub solution: Option<Solution>,
    pub experiments: u64,
}

/// Plug-in allocation objective. Each `(n, π)` with `π ∉ D_n^↓` becomes a
/// group with weights `β̂_n(π, ·)` and offset `β̂_n(π, Â_{n,π}) / C`; each arm
/// gets the term `β̂_n(π, A)²` (zero whenever `A` fixes `n`).
pub fn build_allocation_objective(
    phase1: &Phase1Output,
    structure: &Structure,
) -> Result<RatioObjective> {
    let dag = structure.dag();
    let arms = structure.interventions();
    let c = dag.row_count() as f64;
    let mut objective = RatioObjective::new(arms.len())?;
    for n in 0..dag.node_count() {
        for pm in 0..dag.parent_rows(n) as u64 {
            if phase1.truncation.d_down(n, pm) {
                continue;
            }
            let weights = phase1.beta_hat.column(n, pm);
            let offset = weights[phase1.best_arm[n][pm as usize]] / c;
            let numerators: Vec<f64> = arms
                .iter()
                .zip(&weights)
                .map(|(a, b)| if a.is_free(n) { b * b } else { 0.0 })
                .collect();
            if numerators.iter().all(|&x| x < crate::simplex::NUMERATOR_FLOOR) {
                continue;
            }
            if offset <= 0.0 {
                return Err(Error::Internal(format!(
                    "node {n} parent mask {pm} has a term but no phase-1 mass"
                )));
            }
            let g = objective.add_group(weights, offset)?;
            for (arm, num) in numerators.into_iter().enumerate() {
                objective.add_term(arm, g, num)?;
            }
        }
    }
    Ok(objective)
}

/// `η[A] = |{(n, π) : Â_{n,π} = A}| / C`.
pub fn heuristic_eta(phase1: &Phase1Output, arms: usize) -> Result<EtaDistribution> {
    let mut weights = vec![0.0; arms];
    let mut total = 0usize;
    for &best in phase1.best_arm.iter().flatten() {
        weights[best] += 1.0;
        total += 1;
    }
    for w in &mut weights {
        *w /= total as f64;
    }
    EtaDistribution::new(weights)
}

pub fn run_phase2(
    env: &mut dyn Environment,
    structure: &Structure,
    phase1: &Phase1Output,
    horizon: u64,
    mode: Mode,
    solver: &SolverConfig,
    rng: &mut Stream,
) -> Result<Phase2Output> {
    let dag = structure.dag();
    let arms = structure.interventions();
    let start = env.experiments();
    let mut ledger = CountLedger::new(dag);

    for n in 0..dag.node_count() {
        for best in &phase1.best_arm[n] {
            let a = &arms[*best];
            for _ in 0..phase1.per_pair {
                let omega = env.intervene(a)?;
                ledger.record(dag, a, &omega);
            }
        }
    }

    let (eta, solution) = match mode {
        Mode::Paper => {
            let solution = minimize(&build_allocation_objective(phase1, structure)?, solver)?;
            (solution.eta.clone(), Some(solution))
        }
        Mode::Practical => (heuristic_eta(phase1, arms.len())?, None),
    };
    let sampler = eta.clipped(ETA_CLIP)?;
    for _ in 0..horizon / 3 {
        let a = &arms[sampler.sample(rng)];
        let omega = env.intervene(a)?;
        ledger.record(dag, a, &omega);
    }
    let experiments = env.experiments() - start;

    if mode == Mode::Practical {
        ledger.merge(&phase1.shared_counts);
    }
    let raw_alpha = ledger.estimates(dag);
    let mut alpha_hat = raw_alpha.clone();
    for n in 0..dag.node_count() {
        for mask in 0..2 * dag.parent_rows(n) as u64 {
            if phase1.truncation.d.contains(n, mask) {
                alpha_hat.set(n, mask, 0.0);
            }
        }
    }
    debug_assert!((0..dag.node_count()).all(|n| {
        let rows = dag.parent_rows(n) as u64;
        (0..rows).all(|pm| raw_alpha.get(n, pm + rows) == check_alpha_update(ledger.get(n, pm), true))
    }));

    Ok(Phase2Output {
        raw_alpha,
        alpha_hat,
        counts: ledger,
        eta,
        solution,
        experiments,
    })
}
