//! Min-max ratio allocation over the probability simplex.
//!
//! Both the experiment design of the second estimation phase and the `γ*`
//! constant are instances of
//!
//! ```text
//! min_η max_A Σ_{(g, c) ∈ terms(A)} c / (⟨w_g, η⟩ + r_g)   s.t. η ∈ Δ(A)
//! ```
//!
//! where each denominator group `g` has a nonnegative weight vector `w_g`
//! over the arms and an offset `r_g ≥ 0`. Every term is a convex function of
//! an affine map, so the objective is a maximum of convex functions. It is
//! minimized with exponentiated-gradient mirror descent on the subgradient
//! of the active arm.
//!
//! The reported lower bound comes from linearizing, at each iterate, a
//! convex combination of arm objectives (the running frequency of active
//! arms, and the active arm alone) and minimizing the linearization over the
//! simplex. Any convex combination of arm objectives is below the max, so
//! the bound is valid; it is not guaranteed to be tight.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::inference::parent_marginals;
use crate::model::Instance;
use crate::rng::Stream;

/// Tolerance on `Σ η = 1`.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// Numerators below this are dropped when terms are added.
pub const NUMERATOR_FLOOR: f64 = 1e-15;

/// Weights of a distribution over the intervention set, in its stored order.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaDistribution(Vec<f64>);

impl EtaDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Parameter("distribution over zero arms".into()));
        }
        if let Some(w) = weights.iter().find(|w| w.is_nan() || **w < 0.0 || w.is_infinite()) {
            return Err(Error::Parameter(format!("invalid simplex weight {w}")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::Parameter(format!("simplex weights sum to {sum}")));
        }
        Ok(EtaDistribution(weights))
    }

    pub fn uniform(arms: usize) -> Self {
        EtaDistribution(vec![1.0 / arms as f64; arms])
    }

    pub fn point(arms: usize, arm: usize) -> Self {
        let mut w = vec![0.0; arms];
        w[arm] = 1.0;
        EtaDistribution(w)
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Zeroes weights below `threshold` and renormalizes.
    pub fn clipped(&self, threshold: f64) -> Result<Self> {
        let mut w: Vec<f64> = self
            .0
            .iter()
            .map(|&x| if x < threshold { 0.0 } else { x })
            .collect();
        let sum: f64 = w.iter().sum();
        if sum <= 0.0 {
            return Err(Error::Parameter(format!(
                "every weight is below the clipping threshold {threshold}"
            )));
        }
        w.iter_mut().for_each(|x| *x /= sum);
        Ok(EtaDistribution(w))
    }

    /// Draws an arm by inverse CDF from one 64-bit uniform.
    pub fn sample(&self, rng: &mut Stream) -> usize {
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (i, &w) in self.0.iter().enumerate() {
            if w > 0.0 {
                acc += w;
                last_positive = i;
                if u < acc {
                    return i;
                }
            }
        }
        last_positive
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Group {
    weights: Vec<f64>,
    offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Term {
    group: usize,
    numerator: f64,
}

/// A min-max ratio objective: per arm, a list of terms that share
/// denominator groups.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioObjective {
    arms: usize,
    groups: Vec<Group>,
    terms: Vec<Vec<Term>>,
}

impl RatioObjective {
    pub fn new(arms: usize) -> Result<Self> {
        if arms == 0 {
            return Err(Error::Parameter("objective over zero arms".into()));
        }
        Ok(RatioObjective {
            arms,
            groups: Vec::new(),
            terms: vec![Vec::new(); arms],
        })
    }

    /// Registers a denominator `⟨weights, η⟩ + offset`; returns its id.
    pub fn add_group(&mut self, weights: Vec<f64>, offset: f64) -> Result<usize> {
        if weights.len() != self.arms {
            return Err(Error::Parameter(format!(
                "denominator has {} weights for {} arms",
                weights.len(),
                self.arms
            )));
        }
        if offset.is_nan() || offset < 0.0 || weights.iter().any(|w| w.is_nan() || *w < 0.0) {
            return Err(Error::Parameter("denominators must be nonnegative".into()));
        }
        self.groups.push(Group { weights, offset });
        Ok(self.groups.len() - 1)
    }

    /// Adds `numerator / denominator(group)` to the sum of `arm`.
    pub fn add_term(&mut self, arm: usize, group: usize, numerator: f64) -> Result<()> {
        if arm >= self.arms || group >= self.groups.len() {
            return Err(Error::Parameter(format!("unknown arm {arm} or group {group}")));
        }
        if numerator >= NUMERATOR_FLOOR {
            self.terms[arm].push(Term { group, numerator });
        }
        Ok(())
    }

    pub fn arm_count(&self) -> usize {
        self.arms
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn term_count(&self) -> usize {
        self.terms.iter().map(Vec::len).sum()
    }

    pub fn arm_terms(&self, arm: usize) -> usize {
        self.terms[arm].len()
    }

    fn denominators(&self, eta: &[f64]) -> Vec<f64> {
        self.groups
            .iter()
            .map(|g| g.offset + g.weights.iter().zip(eta).map(|(w, e)| w * e).sum::<f64>())
            .collect()
    }

    /// Max over arms with the lowest maximizing index; `None` for a zero
    /// denominator under a positive numerator.
    fn max_term_sum(&self, denominators: &[f64]) -> Option<(f64, usize)> {
        let mut best = (f64::NEG_INFINITY, 0);
        for (arm, terms) in self.terms.iter().enumerate() {
            let mut sum = 0.0;
            for t in terms {
                let d = denominators[t.group];
                if d <= 0.0 {
                    return None;
                }
                sum += t.numerator / d;
            }
            if sum > best.0 {
                best = (sum, arm);
            }
        }
        Some(best)
    }
}

/// Objective value at `eta` and the smallest maximizing arm.
pub fn evaluate(objective: &RatioObjective, eta: &EtaDistribution) -> Result<(f64, usize)> {
    if eta.len() != objective.arms {
        return Err(Error::Parameter(format!(
            "distribution over {} arms for an objective over {}",
            eta.len(),
            objective.arms
        )));
    }
    let d = objective.denominators(eta.weights());
    objective.max_term_sum(&d).ok_or_else(|| {
        Error::IllPosedObjective("zero denominator under a positive numerator".into())
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Stop once `gap ≤ tolerance · |value|`.
    pub tolerance: f64,
    /// Step `k` is `step_scale / (√k · ‖g_k‖_∞)`.
    pub step_scale: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 2000,
            tolerance: 1e-4,
            step_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub eta: EtaDistribution,
    pub value: f64,
    pub lower_bound: f64,
    /// `value - lower_bound`, never negative.
    pub gap: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Minimizes the objective over the simplex, returning the best iterate.
pub fn minimize(objective: &RatioObjective, config: &SolverConfig) -> Result<Solution> {
    let k = objective.arms;
    let uniform = EtaDistribution::uniform(k);
    let (start_value, _) = evaluate(objective, &uniform)?;
    if k == 1 {
        return Ok(Solution {
            eta: uniform,
            value: start_value,
            lower_bound: start_value,
            gap: 0.0,
            converged: true,
            iterations: 0,
        });
    }

    let mut log_w = vec![0.0f64; k];
    let mut eta = uniform.0.clone();
    let mut best_value = f64::INFINITY;
    let mut best_eta = eta.clone();
    let mut best_lb = f64::NEG_INFINITY;
    let mut mixture = vec![0.0f64; objective.groups.len()];
    let mut grad = vec![0.0f64; k];
    let mut grad_mix = vec![0.0f64; k];
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=config.max_iters {
        iterations = it;
        let d = objective.denominators(&eta);
        let Some((value, arm)) = objective.max_term_sum(&d) else {
            // An arm's support underflowed to zero; the best iterate stands.
            break;
        };
        if value < best_value {
            best_value = value;
            best_eta.clone_from(&eta);
        }

        grad.iter_mut().for_each(|g| *g = 0.0);
        for t in &objective.terms[arm] {
            let c = t.numerator / (d[t.group] * d[t.group]);
            for (g, w) in grad.iter_mut().zip(&objective.groups[t.group].weights) {
                *g -= c * w;
            }
            mixture[t.group] += t.numerator;
        }

        let scale = 1.0 / it as f64;
        let mut mix_value = 0.0;
        grad_mix.iter_mut().for_each(|g| *g = 0.0);
        for (gi, &m) in mixture.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let coef = m * scale;
            mix_value += coef / d[gi];
            let c = coef / (d[gi] * d[gi]);
            for (g, w) in grad_mix.iter_mut().zip(&objective.groups[gi].weights) {
                *g -= c * w;
            }
        }
        let linear_min = |value: f64, g: &[f64]| {
            let min = g.iter().copied().fold(f64::INFINITY, f64::min);
            let dot: f64 = g.iter().zip(&eta).map(|(a, b)| a * b).sum();
            value + min - dot
        };
        best_lb = best_lb
            .max(linear_min(value, &grad))
            .max(linear_min(mix_value, &grad_mix));

        if best_value - best_lb <= config.tolerance * best_value.abs().max(1e-12) {
            converged = true;
            break;
        }

        let norm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if norm == 0.0 {
            break;
        }
        let step = config.step_scale / ((it as f64).sqrt() * norm);
        for (l, g) in log_w.iter_mut().zip(&grad) {
            *l -= step * g;
        }
        let top = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for (e, l) in eta.iter_mut().zip(&log_w) {
            *e = (l - top).exp();
            sum += *e;
        }
        eta.iter_mut().for_each(|e| *e /= sum);
    }

    let lower_bound = best_lb.min(best_value);
    Ok(Solution {
        eta: EtaDistribution(best_eta),
        value: best_value,
        lower_bound,
        gap: best_value - lower_bound,
        converged,
        iterations,
    })
}

/// Builds the `γ*` objective from the true `β` values: one group per
/// `(n, π)` with `w[A] = β_n(π, A)` and no offset, and a term `β_n(π, A)²`
/// for every arm with `β_n(π, A) > 0`.
pub fn gamma_objective(instance: &Instance) -> Result<RatioObjective> {
    let dag = instance.dag();
    let arms = instance.interventions();
    let mut objective = RatioObjective::new(arms.len())?;
    for n in 0..dag.node_count() {
        let rows = dag.parent_rows(n);
        let mut by_row = vec![vec![0.0; arms.len()]; rows];
        for (j, a) in arms.iter().enumerate() {
            for (pm, b) in parent_marginals(instance.alpha(), dag, n, a)?.into_iter().enumerate() {
                by_row[pm][j] = b;
            }
        }
        for weights in by_row {
            if weights.iter().all(|&b| b <= 0.0) {
                continue;
            }
            let numerators: Vec<f64> = weights.iter().map(|b| b * b).collect();
            let g = objective.add_group(weights, 0.0)?;
            for (j, num) in numerators.into_iter().enumerate() {
                objective.add_term(j, g, num)?;
            }
        }
    }
    Ok(objective)
}

/// `γ*` for the instance, with the solver's certificate.
pub fn gamma_star(instance: &Instance, config: &SolverConfig) -> Result<Solution> {
    minimize(&gamma_objective(instance)?, config)
}
