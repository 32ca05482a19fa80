use itertools::Itertools;
use rand::Rng;

use super::{AlphaTable, CausalDag, Instance, Intervention, MAX_PARENTS};
use crate::error::{Error, Result};
use crate::rng;

/// Complete binary tree of the given height with every edge oriented toward
/// the root.
///
/// Leaves come first (left to right), then each internal level bottom-up, so
/// the root is the last node. Returns the DAG and the leaf indices.
pub fn binary_tree_dag(height: u32) -> Result<(CausalDag, Vec<usize>)> {
    if !(1..=20).contains(&height) {
        return Err(Error::Parameter(format!(
            "tree height must lie in 1..=20, got {height}"
        )));
    }
    let h = height as usize;
    let width = |level: usize| 1usize << (h - level);
    let mut offsets = vec![0usize; h + 1];
    for level in 1..=h {
        offsets[level] = offsets[level - 1] + width(level - 1);
    }
    let node_count = offsets[h] + 1;
    let mut parents = vec![Vec::new(); node_count];
    for level in 1..=h {
        for j in 0..width(level) {
            let below = offsets[level - 1];
            parents[offsets[level] + j] = vec![below + 2 * j, below + 2 * j + 1];
        }
    }
    let leaves = (0..width(0)).collect();
    Ok((CausalDag::new(parents)?, leaves))
}

/// Synthetic instance: complete binary tree, uniform random `α`, and every
/// intervention that sets exactly `budget` leaves to 1 and the other leaves
/// to 0.
pub fn make_binary_tree_instance(height: u32, budget: usize, rng_seed: u64) -> Result<Instance> {
    let (dag, leaves) = binary_tree_dag(height)?;
    if budget == 0 || budget > leaves.len() {
        return Err(Error::Parameter(format!(
            "budget must lie in 1..={}, got {budget}",
            leaves.len()
        )));
    }
    let interventions = enumerate_budget_interventions(&dag, &leaves, budget)?;
    let alpha = random_alpha(&dag, rng_seed);
    Instance::new(dag, alpha, interventions)
}

/// Draws `u ~ U[0,1)` per parent realization and sets `α(π̄^1) = u`,
/// `α(π̄^0) = 1 - u`.
///
/// `u` is a multiple of `2^-53`, so `1 - u` is exact and each row sums to
/// exactly one.
pub fn random_alpha(dag: &CausalDag, rng_seed: u64) -> AlphaTable {
    let mut rng = rng::stream(rng_seed);
    let mut alpha = AlphaTable::zeros(dag);
    for n in 0..dag.node_count() {
        let rows = dag.parent_rows(n) as u64;
        for pm in 0..rows {
            let u: f64 = rng.gen();
            alpha.set(n, pm + rows, u);
            alpha.set(n, pm, 1.0 - u);
        }
    }
    alpha
}

/// One intervention per `budget`-subset of `targets`: the subset is fixed to
/// 1, the remaining targets to 0, every other node is left free. Subsets are
/// produced in lexicographic order of their positions in `targets`.
pub fn enumerate_budget_interventions(
    dag: &CausalDag,
    targets: &[usize],
    budget: usize,
) -> Result<Vec<Intervention>> {
    if budget > targets.len() {
        return Err(Error::Parameter(format!(
            "budget {budget} exceeds the {} target nodes",
            targets.len()
        )));
    }
    let n = dag.node_count();
    if let Some(&bad) = targets.iter().find(|&&t| t >= n) {
        return Err(Error::Parameter(format!("target node {bad} does not exist")));
    }
    if !targets.iter().all_unique() {
        return Err(Error::Parameter("target nodes must be distinct".into()));
    }
    let mut base = vec![None; n];
    for &t in targets {
        base[t] = Some(false);
    }
    Ok(targets
        .iter()
        .combinations(budget)
        .map(|chosen| {
            let mut a = base.clone();
            for &t in chosen {
                a[t] = Some(true);
            }
            Intervention::new(a)
        })
        .collect())
}

/// A soft intervention on one node: its replacement conditional table.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftIntervention {
    pub label: String,
    /// `α_k(π̄, S)` indexed by the `P̄_k` mask of the original graph.
    pub row: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SoftReduction {
    /// Hard-intervention instance with one intervention per soft label.
    pub instance: Instance,
    /// New index of each original node.
    pub original_nodes: Vec<usize>,
    /// New index of the indicator node of each soft label.
    pub label_nodes: Vec<usize>,
}

/// Rewrites soft interventions on `soft_node` as hard interventions.
///
/// One parentless indicator node is added per label, with a single edge into
/// `soft_node`. The indicator nodes take indices `0..s` and the original
/// nodes are shifted by `s`, which keeps the order topological. The new
/// table of `soft_node` reads the label's row when exactly that indicator is
/// 1 and is 0 for every other indicator pattern; intervention `A_S` sets
/// indicator `S` to 1, the other indicators to 0, and leaves everything else
/// free.
///
/// Rows for indicator patterns that are not one-hot are never reached under
/// any `A_S`; they are zero, so [`validate`](super::validate) reports them as
/// complement violations.
pub fn soft_to_hard_reduction(
    dag: &CausalDag,
    alpha: &AlphaTable,
    soft_node: usize,
    soft: &[SoftIntervention],
) -> Result<SoftReduction> {
    let n = dag.node_count();
    if soft.is_empty() {
        return Err(Error::Parameter("soft label set is empty".into()));
    }
    if soft_node >= n {
        return Err(Error::Parameter(format!("soft node {soft_node} does not exist")));
    }
    let s = soft.len();
    let k_parents = dag.parents(soft_node).len();
    if k_parents + s > MAX_PARENTS {
        return Err(Error::Parameter(format!(
            "{s} soft labels would give node {soft_node} more than {MAX_PARENTS} parents"
        )));
    }
    let row_len = 2usize << k_parents;
    if let Some(bad) = soft.iter().find(|x| x.row.len() != row_len) {
        return Err(Error::Parameter(format!(
            "soft row {:?} has {} entries, expected {row_len}",
            bad.label,
            bad.row.len()
        )));
    }

    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); s];
    for old in 0..n {
        let mut ps: Vec<usize> = Vec::with_capacity(dag.parents(old).len() + s);
        if old == soft_node {
            ps.extend(0..s);
        }
        ps.extend(dag.parents(old).iter().map(|&p| p + s));
        parents.push(ps);
    }
    let new_dag = CausalDag::new(parents)?;

    let mut rows: Vec<Vec<f64>> = vec![vec![0.5, 0.5]; s];
    for old in 0..n {
        if old != soft_node {
            rows.push(alpha.node(old).to_vec());
            continue;
        }
        let mut row = vec![0.0; row_len << s];
        for (mask, slot) in row.iter_mut().enumerate() {
            let indicators = mask & ((1 << s) - 1);
            if indicators.count_ones() == 1 {
                let label = indicators.trailing_zeros() as usize;
                *slot = soft[label].row[mask >> s];
            }
        }
        rows.push(row);
    }
    let new_alpha = AlphaTable::new(&new_dag, rows)?;

    let interventions = (0..s)
        .map(|label| {
            let mut a = vec![None; n + s];
            for (j, slot) in a.iter_mut().take(s).enumerate() {
                *slot = Some(j == label);
            }
            Intervention::new(a)
        })
        .collect();

    Ok(SoftReduction {
        instance: Instance::new(new_dag, new_alpha, interventions)?,
        original_nodes: (s..n + s).collect(),
        label_nodes: (0..s).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate;

    #[test]
    fn height_four_tree_has_31_nodes_and_76_rows() {
        let (dag, leaves) = binary_tree_dag(4).unwrap();
        assert_eq!(dag.node_count(), 31);
        assert_eq!(leaves.len(), 16);
        // 15 internal nodes with two parents, 16 parentless leaves.
        assert_eq!(dag.row_count(), 4 * 15 + 16);
        assert_eq!(dag.parents(30), &[28, 29]);
        assert_eq!(dag.parents(16), &[0, 1]);
        assert_eq!(dag.roots(), leaves);
    }

    #[test]
    fn height_one_tree_is_a_star_into_the_root() {
        let (dag, leaves) = binary_tree_dag(1).unwrap();
        assert_eq!(dag.node_count(), 3);
        assert_eq!(leaves, vec![0, 1]);
        assert_eq!(dag.parents(2), &[0, 1]);
        assert_eq!(dag.row_count(), 6);
    }

    #[test]
    fn tree_budget_is_checked() {
        assert!(make_binary_tree_instance(2, 5, 0).is_err());
        assert!(make_binary_tree_instance(2, 0, 0).is_err());
        assert_eq!(make_binary_tree_instance(4, 2, 0).unwrap().interventions().len(), 120);
    }

    #[test]
    fn random_alpha_is_deterministic_and_valid() {
        let (dag, _) = binary_tree_dag(3).unwrap();
        let a = random_alpha(&dag, 11);
        assert_eq!(a, random_alpha(&dag, 11));
        assert!(validate(&dag, &a).is_empty());
        for n in 0..dag.node_count() {
            for pm in 0..dag.parent_rows(n) as u64 {
                assert_eq!(a.value(n, pm, true) + a.value(n, pm, false), 1.0);
            }
        }
    }

    #[test]
    fn different_seeds_give_different_tables() {
        let (dag, _) = binary_tree_dag(2).unwrap();
        let tables: Vec<_> = (0..10).map(|s| random_alpha(&dag, s)).collect();
        for i in 0..tables.len() {
            for j in i + 1..tables.len() {
                assert_ne!(tables[i], tables[j]);
            }
        }
    }

    #[test]
    fn singleton_budget_over_three_targets() {
        let dag = CausalDag::new(vec![vec![], vec![], vec![], vec![0, 1, 2]]).unwrap();
        let set = enumerate_budget_interventions(&dag, &[0, 1, 2], 1).unwrap();
        let text: Vec<_> = set.iter().map(|a| a.to_string()).collect();
        assert_eq!(text, vec!["100*", "010*", "001*"]);
        assert!(enumerate_budget_interventions(&dag, &[0, 1, 2], 4).is_err());
        assert!(enumerate_budget_interventions(&dag, &[0, 0], 1).is_err());
    }

    #[test]
    fn full_budget_gives_the_all_ones_intervention() {
        let (dag, leaves) = binary_tree_dag(4).unwrap();
        let set = enumerate_budget_interventions(&dag, &leaves, 16).unwrap();
        assert_eq!(set.len(), 1);
        assert!(leaves.iter().all(|&l| set[0].get(l) == Some(true)));
    }

    #[test]
    fn reduction_adds_one_node_per_label() {
        let dag = CausalDag::new(vec![vec![], vec![0], vec![0, 1]]).unwrap();
        let alpha = random_alpha(&dag, 3);
        let soft = vec![SoftIntervention {
            label: "s".into(),
            row: vec![0.2, 0.6, 0.8, 0.4],
        }];
        let red = soft_to_hard_reduction(&dag, &alpha, 1, &soft).unwrap();
        assert_eq!(red.instance.dag().node_count(), 4);
        assert_eq!(red.instance.interventions().len(), 1);
        assert_eq!(red.instance.interventions()[0].to_string(), "1***");
        assert_eq!(red.instance.dag().parents(2), &[0, 1]);
        assert!(soft_to_hard_reduction(&dag, &alpha, 1, &[]).is_err());
    }

    #[test]
    fn reduction_only_breaks_complements_on_unreachable_rows() {
        let dag = CausalDag::new(vec![vec![], vec![0], vec![1]]).unwrap();
        let alpha = random_alpha(&dag, 5);
        let soft = vec![
            SoftIntervention { label: "a".into(), row: vec![0.3, 0.1, 0.7, 0.9] },
            SoftIntervention { label: "b".into(), row: vec![0.6, 0.5, 0.4, 0.5] },
        ];
        let red = soft_to_hard_reduction(&dag, &alpha, 1, &soft).unwrap();
        let v = validate(red.instance.dag(), red.instance.alpha());
        // Node 3 has parents (label a, label b, original node 0): eight
        // parent realizations, four of which are one-hot in the indicators.
        assert_eq!(v.len(), 4);
        for x in v {
            assert_eq!(x.node, 3);
            match x.kind {
                crate::model::ViolationKind::ComplementSum { parent_mask, sum } => {
                    assert_ne!((parent_mask & 0b11).count_ones(), 1);
                    assert_eq!(sum, 0.0);
                }
                other => panic!("unexpected violation {other:?}"),
            }
        }
    }
}
