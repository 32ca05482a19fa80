//! First estimation phase: sequential estimates of `β̂_n` with truncation of
//! rarely observed conditional-probability entries.
//!
//! Nodes are visited in topological order. For node `n`, `β̂_n(π, A)` is
//! evaluated for every parent realization and arm from the truncated
//! estimates `α̌_1, …, α̌_{n-1}` already fixed. The arm maximizing
//! `β̂_n(π, ·)` is then applied `⌊T/(3C)⌋` times to estimate `α̌'_n(π̄)`, and
//! entries with `α̌'_n(π̄) β̂_n(π, Â_{n,π}) ≤ 2e S(λ)` are truncated to zero
//! (the set `G_n`). After the sweep, `H_n` collects the extensions of every
//! `π` with `β̂_n(π, Â_{n,π}) ≤ 8e C² S(λ)`, and `D_n = G_n ∪ H_n`.

use rayon::prelude::*;
use std::f64::consts::E;

use crate::error::{Error, Result};
use crate::inference::{parent_marginals, Environment, Realization};
use crate::model::{AlphaTable, CausalDag, Intervention, Structure};

/// Counts behind one conditional-probability estimate: `t` experiments
/// matched the parent realization, `t_bar` of those also had the node at 1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CountPair {
    pub t: u64,
    pub t_bar: u64,
}

impl CountPair {
    pub fn record(&mut self, node_value: bool) {
        self.t += 1;
        self.t_bar += u64::from(node_value);
    }

    pub fn merge(&mut self, other: CountPair) {
        self.t += other.t;
        self.t_bar += other.t_bar;
    }
}

/// `t̄/t` for parity 1 and `1 - t̄/t` for parity 0. An unobserved parent
/// realization (`t = 0`) estimates 0 for both parities.
pub fn check_alpha_update(counts: CountPair, parity: bool) -> f64 {
    if counts.t == 0 {
        return 0.0;
    }
    let freq = counts.t_bar as f64 / counts.t as f64;
    if parity {
        freq
    } else {
        1.0 - freq
    }
}

/// Per-node, per-parent-realization counts where every experiment updates
/// every node it left free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountLedger {
    counts: Vec<Vec<CountPair>>,
}

impl CountLedger {
    pub fn new(dag: &CausalDag) -> Self {
        CountLedger {
            counts: (0..dag.node_count())
                .map(|n| vec![CountPair::default(); dag.parent_rows(n)])
                .collect(),
        }
    }

    /// Updates `t'_m(ω_{P_m})` and `t̄'_m(ω_{P_m})` for every `m` free in `a`.
    pub fn record(&mut self, dag: &CausalDag, a: &Intervention, omega: &Realization) {
        let bits = omega.bits();
        for m in (0..dag.node_count()).filter(|&m| a.is_free(m)) {
            self.counts[m][dag.parent_mask(m, bits) as usize].record(bits[m]);
        }
    }

    pub fn get(&self, n: usize, parent_mask: u64) -> CountPair {
        self.counts[n][parent_mask as usize]
    }

    pub fn node(&self, n: usize) -> &[CountPair] {
        &self.counts[n]
    }

    pub fn merge(&mut self, other: &CountLedger) {
        for (mine, theirs) in self.counts.iter_mut().zip(&other.counts) {
            for (a, b) in mine.iter_mut().zip(theirs) {
                a.merge(*b);
            }
        }
    }

    /// `Σ_π t'_n(π)`.
    pub fn node_total(&self, n: usize) -> u64 {
        self.counts[n].iter().map(|c| c.t).sum()
    }

    /// Table of `t̄/t` estimates (0 where unobserved).
    pub fn estimates(&self, dag: &CausalDag) -> AlphaTable {
        let mut alpha = AlphaTable::zeros(dag);
        for n in 0..dag.node_count() {
            let rows = dag.parent_rows(n) as u64;
            for pm in 0..rows {
                let c = self.get(n, pm);
                alpha.set(n, pm, check_alpha_update(c, false));
                alpha.set(n, pm + rows, check_alpha_update(c, true));
            }
        }
        alpha
    }
}

/// How entries are truncated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// Threshold `S(λ)` with the given `λ > 0`.
    Threshold { lambda: f64 },
    /// No entry is ever truncated (`λ = 0`).
    Disabled,
}

impl Truncation {
    /// `λ = C³/N`.
    pub fn theoretical(dag: &CausalDag) -> Self {
        let c = dag.row_count() as f64;
        Truncation::Threshold {
            lambda: c * c * c / dag.node_count() as f64,
        }
    }

    pub fn from_lambda(lambda: f64) -> Result<Self> {
        if lambda == 0.0 {
            Ok(Truncation::Disabled)
        } else if lambda > 0.0 && lambda.is_finite() {
            Ok(Truncation::Threshold { lambda })
        } else {
            Err(Error::Parameter(format!("lambda must be >= 0, got {lambda}")))
        }
    }
}

/// `S(λ) = 12 λ N² C log T / T` with the natural logarithm.
pub fn s_lambda(lambda: f64, n_nodes: usize, c: usize, horizon: u64) -> Result<f64> {
    if lambda.is_nan() || lambda <= 0.0 || n_nodes == 0 || c == 0 {
        return Err(Error::Parameter(format!(
            "S(lambda) needs positive inputs, got lambda={lambda}, N={n_nodes}, C={c}"
        )));
    }
    if horizon < 2 {
        return Err(Error::Parameter(format!("S(lambda) needs T >= 2, got {horizon}")));
    }
    let n = n_nodes as f64;
    let t = horizon as f64;
    Ok(12.0 * lambda * n * n * c as f64 * t.ln() / t)
}

/// `β̂_n(π, A)` for every node, parent realization and arm.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaTable {
    arms: usize,
    /// Per node, arm-major: `[arm * C_n + parent_mask]`.
    values: Vec<Vec<f64>>,
}

impl BetaTable {
    fn empty(dag: &CausalDag, arms: usize) -> Self {
        BetaTable {
            arms,
            values: vec![Vec::new(); dag.node_count()],
        }
    }

    fn fill_node(
        &mut self,
        alpha: &AlphaTable,
        dag: &CausalDag,
        arms: &[Intervention],
        n: usize,
    ) -> Result<()> {
        let rows: Vec<Vec<f64>> = arms
            .par_iter()
            .map(|a| parent_marginals(alpha, dag, n, a))
            .collect::<Result<_>>()?;
        self.values[n] = rows.concat();
        Ok(())
    }

    /// Evaluates every entry from `alpha`.
    pub fn from_alpha(alpha: &AlphaTable, dag: &CausalDag, arms: &[Intervention]) -> Result<Self> {
        let mut table = Self::empty(dag, arms.len());
        for n in 0..dag.node_count() {
            table.fill_node(alpha, dag, arms, n)?;
        }
        Ok(table)
    }

    pub fn arm_count(&self) -> usize {
        self.arms
    }

    pub fn get(&self, n: usize, parent_mask: u64, arm: usize) -> f64 {
        let rows = self.values[n].len() / self.arms;
        self.values[n][arm * rows + parent_mask as usize]
    }

    /// `β̂_n(π, ·)` over all arms.
    pub fn column(&self, n: usize, parent_mask: u64) -> Vec<f64> {
        (0..self.arms).map(|a| self.get(n, parent_mask, a)).collect()
    }

    /// Lowest-index arm maximizing `β̂_n(π, ·)`.
    pub fn argmax(&self, n: usize, parent_mask: u64) -> usize {
        let mut best = (f64::NEG_INFINITY, 0);
        for arm in 0..self.arms {
            let v = self.get(n, parent_mask, arm);
            if v > best.0 {
                best = (v, arm);
            }
        }
        best.1
    }
}

/// Per node, membership flags indexed by the `P̄_n` mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowSet(Vec<Vec<bool>>);

impl RowSet {
    fn empty(dag: &CausalDag) -> Self {
        RowSet(
            (0..dag.node_count())
                .map(|n| vec![false; 2 * dag.parent_rows(n)])
                .collect(),
        )
    }

    pub fn contains(&self, n: usize, extended_mask: u64) -> bool {
        self.0[n][extended_mask as usize]
    }

    fn insert(&mut self, n: usize, extended_mask: u64) {
        self.0[n][extended_mask as usize] = true;
    }

    /// Whether both extensions `π̄^0`, `π̄^1` of `parent_mask` are members.
    pub fn contains_both(&self, n: usize, parent_mask: u64) -> bool {
        let half = (self.0[n].len() / 2) as u64;
        self.contains(n, parent_mask) && self.contains(n, parent_mask + half)
    }

    pub fn len(&self) -> usize {
        self.0.iter().flatten().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The families `G_n`, `H_n` and `D_n = G_n ∪ H_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncationSets {
    pub g: RowSet,
    pub h: RowSet,
    pub d: RowSet,
}

impl TruncationSets {
    /// `π ∈ D_n^↓`: both extensions of `π` are in `D_n`.
    pub fn d_down(&self, n: usize, parent_mask: u64) -> bool {
        self.d.contains_both(n, parent_mask)
    }

    pub fn h_down(&self, n: usize, parent_mask: u64) -> bool {
        self.h.contains_both(n, parent_mask)
    }
}

#[derive(Debug, Clone)]
pub struct Phase1Output {
    /// `α̌'`: the untruncated frequency estimates.
    pub raw_alpha: AlphaTable,
    /// `α̌`: `α̌'` with the `G_n` entries zeroed.
    pub check_alpha: AlphaTable,
    pub beta_hat: BetaTable,
    pub truncation: TruncationSets,
    /// `(t_n(π), t̄_n(π))` per node and parent realization.
    pub counts: Vec<Vec<CountPair>>,
    /// `Â_{n,π}` as an arm index.
    pub best_arm: Vec<Vec<usize>>,
    /// Every phase-1 experiment counted for every node it left free.
    pub shared_counts: CountLedger,
    /// `⌊T/(3C)⌋`.
    pub per_pair: u64,
    pub experiments: u64,
    /// `S(λ)`, absent when truncation is disabled.
    pub s_lambda: Option<f64>,
}

/// `⌊T/(3C)⌋`, failing below `T = 3C`.
pub fn per_pair_budget(dag: &CausalDag, horizon: u64) -> Result<u64> {
    let c3 = 3 * dag.row_count() as u64;
    if horizon < c3 {
        return Err(Error::Budget {
            what: "the causal bandit estimation phases",
            required: c3,
            horizon,
        });
    }
    Ok(horizon / c3)
}

pub fn run_phase1(
    env: &mut dyn Environment,
    structure: &Structure,
    truncation: Truncation,
    horizon: u64,
) -> Result<Phase1Output> {
    let dag = structure.dag();
    let arms = structure.interventions();
    let per_pair = per_pair_budget(dag, horizon)?;
    let c = dag.row_count();
    let s = match truncation {
        Truncation::Threshold { lambda } => Some(s_lambda(lambda, dag.node_count(), c, horizon)?),
        Truncation::Disabled => None,
    };
    let start = env.experiments();

    let mut raw_alpha = AlphaTable::zeros(dag);
    let mut check_alpha = AlphaTable::zeros(dag);
    let mut beta_hat = BetaTable::empty(dag, arms.len());
    let mut g = RowSet::empty(dag);
    let mut counts = Vec::with_capacity(dag.node_count());
    let mut best_arm = Vec::with_capacity(dag.node_count());
    let mut shared = CountLedger::new(dag);

    for n in 0..dag.node_count() {
        beta_hat.fill_node(&check_alpha, dag, arms, n)?;
        let rows = dag.parent_rows(n) as u64;
        let mut node_counts = Vec::with_capacity(rows as usize);
        let mut node_best = Vec::with_capacity(rows as usize);
        for pm in 0..rows {
            let best = beta_hat.argmax(n, pm);
            let a = &arms[best];
            let mut pair = CountPair::default();
            for _ in 0..per_pair {
                let omega = env.intervene(a)?;
                shared.record(dag, a, &omega);
                if dag.parent_mask(n, omega.bits()) == pm {
                    pair.record(omega.get(n));
                }
            }
            let b = beta_hat.get(n, pm, best);
            for k in [false, true] {
                let mask = pm + if k { rows } else { 0 };
                let estimate = check_alpha_update(pair, k);
                raw_alpha.set(n, mask, estimate);
                let truncated = s.is_some_and(|s| estimate * b <= 2.0 * E * s);
                if truncated {
                    g.insert(n, mask);
                }
                check_alpha.set(n, mask, if truncated { 0.0 } else { estimate });
            }
            node_counts.push(pair);
            node_best.push(best);
        }
        counts.push(node_counts);
        best_arm.push(node_best);
    }

    let mut h = RowSet::empty(dag);
    if let Some(s) = s {
        let bound = 8.0 * E * (c * c) as f64 * s;
        for (n, node_best) in best_arm.iter().enumerate() {
            let rows = node_best.len() as u64;
            for (pm, &best) in (0..rows).zip(node_best) {
                if beta_hat.get(n, pm, best) <= bound {
                    h.insert(n, pm);
                    h.insert(n, pm + rows);
                }
            }
        }
    }
    let mut d = g.clone();
    for (dn, hn) in d.0.iter_mut().zip(&h.0) {
        for (x, &y) in dn.iter_mut().zip(hn) {
            *x |= y;
        }
    }

    Ok(Phase1Output {
        raw_alpha,
        check_alpha,
        beta_hat,
        truncation: TruncationSets { g, h, d },
        counts,
        best_arm,
        shared_counts: shared,
        per_pair,
        experiments: env.experiments() - start,
        s_lambda: s,
    })
}
