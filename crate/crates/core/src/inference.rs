//! Exact probabilities under hard interventions and the simulated
//! environment.
//!
//! `μ(A)` and `β_n(π, A)` are sums over realizations of products of table
//! entries, one factor per non-intervened node. They are evaluated by a
//! frontier dynamic program: nodes are processed in topological order while
//! a weight vector is kept over the joint values of the free nodes whose
//! values are still needed, either by an unprocessed free child or because
//! they are part of the query. Intervened nodes have known values and never
//! enter the frontier. The cost is exponential only in the frontier width,
//! which is capped by [`FRONTIER_LIMIT`].
//!
//! The same sums evaluated with an arbitrary (possibly truncated or
//! estimated) table give `β̂` and `μ̂`; rows need not sum to one. Nodes that
//! do not influence the query still contribute their row sums, as the sums
//! range over every earlier node.
//!
//! [`brute_force`] enumerates the free-node assignments directly and serves
//! as the independent oracle for the dynamic program.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{AlphaTable, CausalDag, Instance, Intervention, ParentRealization};
use crate::rng::Stream;

/// Maximum number of nodes the dynamic program keeps jointly.
pub const FRONTIER_LIMIT: usize = 20;

/// A full 0/1 realization `ω` of the graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Realization(Vec<bool>);

impl Realization {
    pub fn new(bits: Vec<bool>) -> Self {
        Realization(bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn get(&self, n: usize) -> bool {
        self.0[n]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Whether `ω ∈ B(A)`: consistent with `A` and the target realized as 1.
    pub fn in_reward_set(&self, a: &Intervention) -> bool {
        self.0.last() == Some(&true) && self.respects(a)
    }

    pub fn respects(&self, a: &Intervention) -> bool {
        self.0
            .iter()
            .zip(a.assignment())
            .all(|(&w, v)| v.is_none_or(|v| v == w))
    }
}

impl std::fmt::Display for Realization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Something a learner can experiment on. Each call to
/// [`intervene`](Environment::intervene) consumes one experiment.
pub trait Environment {
    fn node_count(&self) -> usize;

    fn intervene(&mut self, a: &Intervention) -> Result<Realization>;

    /// Experiments consumed so far.
    fn experiments(&self) -> u64;
}

/// Environment backed by a known instance.
#[derive(Debug)]
pub struct SimulatedEnvironment<'a> {
    instance: &'a Instance,
    rng: Stream,
    used: u64,
    cap: Option<u64>,
}

impl<'a> SimulatedEnvironment<'a> {
    pub fn new(instance: &'a Instance, rng: Stream) -> Self {
        SimulatedEnvironment {
            instance,
            rng,
            used: 0,
            cap: None,
        }
    }

    /// Refuses experiments beyond `cap`.
    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = Some(cap);
        self
    }
}

impl Environment for SimulatedEnvironment<'_> {
    fn node_count(&self) -> usize {
        self.instance.dag().node_count()
    }

    fn intervene(&mut self, a: &Intervention) -> Result<Realization> {
        if self.cap.is_some_and(|c| self.used >= c) {
            return Err(Error::EnvironmentExhausted { used: self.used });
        }
        check_len(self.instance.dag(), a)?;
        self.used += 1;
        Ok(sample(self.instance, a, &mut self.rng))
    }

    fn experiments(&self) -> u64 {
        self.used
    }
}

/// Forward-samples the graph under `do(A)`.
pub fn sample(instance: &Instance, a: &Intervention, rng: &mut Stream) -> Realization {
    let dag = instance.dag();
    let alpha = instance.alpha();
    let mut omega = vec![false; dag.node_count()];
    for n in 0..dag.node_count() {
        omega[n] = match a.get(n) {
            Some(v) => v,
            None => {
                let p = alpha.value(n, dag.parent_mask(n, &omega), true);
                rng.gen::<f64>() < p
            }
        };
    }
    Realization(omega)
}

fn check_len(dag: &CausalDag, a: &Intervention) -> Result<()> {
    if a.len() != dag.node_count() {
        return Err(Error::Parameter(format!(
            "intervention {a} has length {}, graph has {} nodes",
            a.len(),
            dag.node_count()
        )));
    }
    Ok(())
}

/// `μ(A) = Prob(V_N = 1 | do(A))` under the instance's true parameters.
pub fn exact_mu(instance: &Instance, a: &Intervention) -> Result<f64> {
    mu_from_alpha(instance.alpha(), instance.dag(), a)
}

/// `β_n(π, A)` under the instance's true parameters.
pub fn exact_beta(
    instance: &Instance,
    n: usize,
    pi: &ParentRealization,
    a: &Intervention,
) -> Result<f64> {
    beta_from_alpha(instance.alpha(), instance.dag(), n, pi, a)
}

/// `Σ_{π ∈ B(A)} Π_{m ∈ I_{N,A}} α_m(π_{P̄_m})` for an arbitrary table.
pub fn mu_from_alpha(alpha: &AlphaTable, dag: &CausalDag, a: &Intervention) -> Result<f64> {
    check_len(dag, a)?;
    let target = dag.target();
    Ok(frontier_marginal(alpha, dag, a, target + 1, &[target])?[1])
}

/// `Σ_{π' ∈ B_n(π, A)} Π_{m ∈ I_{n-1,A}} α_m(π'_{P̄_m})` for an arbitrary
/// table, and 0 when `n` is intervened.
pub fn beta_from_alpha(
    alpha: &AlphaTable,
    dag: &CausalDag,
    n: usize,
    pi: &ParentRealization,
    a: &Intervention,
) -> Result<f64> {
    if pi.scope() != dag.parents(n) {
        return Err(Error::Scope(format!(
            "realization scope {:?} is not the parent set {:?} of node {n}",
            pi.scope(),
            dag.parents(n)
        )));
    }
    Ok(parent_marginals(alpha, dag, n, a)?[pi.bits() as usize])
}

/// `β_n(·, A)` for every parent realization of `n`, indexed by parent mask.
pub fn parent_marginals(
    alpha: &AlphaTable,
    dag: &CausalDag,
    n: usize,
    a: &Intervention,
) -> Result<Vec<f64>> {
    check_len(dag, a)?;
    if !a.is_free(n) {
        return Ok(vec![0.0; dag.parent_rows(n)]);
    }
    frontier_marginal(alpha, dag, a, n, dag.parents(n))
}

/// Sums the product of free-node table entries over every realization of
/// nodes `0..limit` consistent with `A`, grouped by the values of `keep`
/// (sorted, all below `limit`). The result is indexed by the positional mask
/// over `keep`.
pub fn frontier_marginal(
    alpha: &AlphaTable,
    dag: &CausalDag,
    a: &Intervention,
    limit: usize,
    keep: &[usize],
) -> Result<Vec<f64>> {
    if keep.iter().any(|&k| k >= limit) || keep.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Scope(format!(
            "query nodes {keep:?} must be sorted and below {limit}"
        )));
    }
    // Last node that reads each free node's value; query nodes live to the end.
    let mut last_use: Vec<Option<usize>> = vec![None; limit];
    for c in (0..limit).filter(|&c| a.is_free(c)) {
        for &p in dag.parents(c) {
            last_use[p] = Some(c);
        }
    }
    for &k in keep {
        last_use[k] = Some(limit);
    }

    let mut frontier: Vec<usize> = Vec::new();
    let mut position = vec![usize::MAX; limit];
    let mut weights = vec![1.0f64];
    let mut movers: Vec<(usize, usize)> = Vec::new();

    for m in 0..limit {
        if a.is_free(m) {
            let mut fixed_bits = 0usize;
            movers.clear();
            for (j, &p) in dag.parents(m).iter().enumerate() {
                match a.get(p) {
                    Some(v) => fixed_bits |= usize::from(v) << j,
                    None => movers.push((position[p], j)),
                }
            }
            let row_of = |s: usize| {
                movers
                    .iter()
                    .fold(fixed_bits, |r, &(sp, j)| r | (((s >> sp) & 1) << j))
            };
            let row = alpha.node(m);
            let half = row.len() / 2;
            if last_use[m].is_some() {
                if frontier.len() + 1 > FRONTIER_LIMIT {
                    return Err(Error::Capacity {
                        width: frontier.len() + 1,
                        limit: FRONTIER_LIMIT,
                    });
                }
                let len = weights.len();
                let mut next = vec![0.0; 2 * len];
                for (s, &w) in weights.iter().enumerate() {
                    let r = row_of(s);
                    next[s] = w * row[r];
                    next[s + len] = w * row[r + half];
                }
                weights = next;
                position[m] = frontier.len();
                frontier.push(m);
            } else {
                for (s, w) in weights.iter_mut().enumerate() {
                    let r = row_of(s);
                    *w *= row[r] + row[r + half];
                }
            }
        }

        if frontier.iter().any(|&f| last_use[f] == Some(m)) {
            let kept: Vec<usize> = frontier
                .iter()
                .copied()
                .filter(|&f| last_use[f] != Some(m))
                .collect();
            let kept_pos: Vec<usize> = kept.iter().map(|&f| position[f]).collect();
            let mut next = vec![0.0; 1 << kept.len()];
            for (s, &w) in weights.iter().enumerate() {
                let t = kept_pos
                    .iter()
                    .enumerate()
                    .fold(0usize, |t, (i, &sp)| t | (((s >> sp) & 1) << i));
                next[t] += w;
            }
            for (i, &f) in kept.iter().enumerate() {
                position[f] = i;
            }
            frontier = kept;
            weights = next;
        }
    }

    debug_assert!(frontier.iter().all(|f| keep.contains(f)));
    let mut fixed_mask = 0usize;
    let mut free_slots: Vec<(usize, usize)> = Vec::new();
    for (i, &k) in keep.iter().enumerate() {
        match a.get(k) {
            Some(v) => fixed_mask |= usize::from(v) << i,
            None => free_slots.push((position[k], i)),
        }
    }
    let mut out = vec![0.0; 1 << keep.len()];
    for (s, &w) in weights.iter().enumerate() {
        let mask = free_slots
            .iter()
            .fold(fixed_mask, |r, &(sp, i)| r | (((s >> sp) & 1) << i));
        out[mask] += w;
    }
    Ok(out)
}

/// Direct enumeration of the defining sums. Exponential in the number of
/// free nodes; used as the reference for the dynamic program.
pub mod brute_force {
    use super::*;

    /// Largest number of free nodes the enumeration accepts.
    pub const MAX_FREE: usize = 20;

    /// Probability of the full realization `omega` under `do(A)` for the
    /// supplied table (0 when `omega` contradicts `A`).
    pub fn joint(alpha: &AlphaTable, dag: &CausalDag, a: &Intervention, omega: &[bool]) -> f64 {
        let mut p = 1.0;
        for n in 0..omega.len() {
            match a.get(n) {
                Some(v) if v != omega[n] => return 0.0,
                Some(_) => {}
                None => p *= alpha.value(n, dag.parent_mask(n, omega), omega[n]),
            }
        }
        p
    }

    fn enumerate(
        a: &Intervention,
        limit: usize,
        mut visit: impl FnMut(&[bool]),
    ) -> Result<()> {
        let free: Vec<usize> = (0..limit).filter(|&n| a.is_free(n)).collect();
        if free.len() > MAX_FREE {
            return Err(Error::Capacity {
                width: free.len(),
                limit: MAX_FREE,
            });
        }
        let mut omega: Vec<bool> = (0..limit).map(|n| a.get(n).unwrap_or(false)).collect();
        for assignment in 0u64..(1u64 << free.len()) {
            for (i, &n) in free.iter().enumerate() {
                omega[n] = (assignment >> i) & 1 == 1;
            }
            visit(&omega);
        }
        Ok(())
    }

    fn product(alpha: &AlphaTable, dag: &CausalDag, a: &Intervention, omega: &[bool]) -> f64 {
        (0..omega.len())
            .filter(|&m| a.is_free(m))
            .map(|m| alpha.value(m, dag.parent_mask(m, omega), omega[m]))
            .product()
    }

    pub fn mu_from_alpha(alpha: &AlphaTable, dag: &CausalDag, a: &Intervention) -> Result<f64> {
        check_len(dag, a)?;
        let mut total = 0.0;
        enumerate(a, dag.node_count(), |omega| {
            if *omega.last().unwrap() {
                total += product(alpha, dag, a, omega);
            }
        })?;
        Ok(total)
    }

    pub fn beta_from_alpha(
        alpha: &AlphaTable,
        dag: &CausalDag,
        n: usize,
        parent_mask: u64,
        a: &Intervention,
    ) -> Result<f64> {
        check_len(dag, a)?;
        if !a.is_free(n) {
            return Ok(0.0);
        }
        let mut total = 0.0;
        enumerate(a, n, |omega| {
            if dag.parent_mask(n, omega) == parent_mask {
                total += product(alpha, dag, a, omega);
            }
        })?;
        Ok(total)
    }
}
