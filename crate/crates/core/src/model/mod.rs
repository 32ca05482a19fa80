//! Causal DAGs over binary variables, conditional-probability tables and
//! hard interventions.
//!
//! Nodes are indexed `0..N` in topological order: every parent of node `n`
//! has an index strictly below `n`, and the last node `N-1` is the target
//! whose probability of realizing `1` is maximized. Realizations over a
//! node's parent set (or over the parent set extended by the node itself)
//! are stored as integer masks, where bit `i` is the value of the `i`-th
//! smallest node in the scope. For the extended scope `P̄_n = P_n ∪ {n}` the
//! node's own value is therefore the highest bit.

mod build;

use std::fmt;

use crate::error::{Error, Result};

pub use build::{
    binary_tree_dag, enumerate_budget_interventions, make_binary_tree_instance, random_alpha,
    soft_to_hard_reduction, SoftIntervention, SoftReduction,
};

/// Largest parent set a node may have; masks are `u64`.
pub const MAX_PARENTS: usize = 62;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalDag {
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl CausalDag {
    /// Builds a DAG from per-node parent lists, rejecting lists that are not
    /// sorted, contain duplicates, or name a node at or above the child.
    ///
    /// Graphs with fewer than three nodes are accepted here (the inference
    /// routines handle them) but reported by [`validate`].
    pub fn new(parents: Vec<Vec<usize>>) -> Result<Self> {
        let dag = Self::from_parents_unchecked(parents);
        let violations: Vec<_> = structural_violations(&dag)
            .into_iter()
            .filter(|v| !matches!(v.kind, ViolationKind::TooFewNodes { .. }))
            .collect();
        if violations.is_empty() {
            Ok(dag)
        } else {
            Err(Error::InvalidModel(violations))
        }
    }

    /// Skips every invariant check. Meant for feeding raw input to
    /// [`validate`]; the other routines assume a well-formed graph.
    pub fn from_parents_unchecked(parents: Vec<Vec<usize>>) -> Self {
        let n = parents.len();
        let mut children = vec![Vec::new(); n];
        for (child, ps) in parents.iter().enumerate() {
            for &p in ps {
                if p < n && !children[p].contains(&child) {
                    children[p].push(child);
                }
            }
        }
        for c in &mut children {
            c.sort_unstable();
        }
        CausalDag { parents, children }
    }

    pub fn node_count(&self) -> usize {
        self.parents.len()
    }

    /// The node whose realization defines the reward.
    pub fn target(&self) -> usize {
        self.parents.len() - 1
    }

    pub fn parents(&self, n: usize) -> &[usize] {
        &self.parents[n]
    }

    pub fn children(&self, n: usize) -> &[usize] {
        &self.children[n]
    }

    /// `C_n = 2^{|P_n|}`: number of parent realizations of node `n`.
    pub fn parent_rows(&self, n: usize) -> usize {
        1usize << self.parents[n].len()
    }

    /// `C = Σ_n C_n`: number of uncertain conditional-probability rows.
    pub fn row_count(&self) -> usize {
        (0..self.node_count()).map(|n| self.parent_rows(n)).sum()
    }

    /// `P̄_n`: the parent set of `n` extended by `n` itself.
    pub fn extended_scope(&self, n: usize) -> Vec<usize> {
        let mut s = self.parents[n].clone();
        s.push(n);
        s
    }

    pub fn roots(&self) -> Vec<usize> {
        (0..self.node_count())
            .filter(|&n| self.parents[n].is_empty())
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    /// Mask of `ω` restricted to the parents of `n`.
    pub fn parent_mask(&self, n: usize, omega: &[bool]) -> u64 {
        self.parents[n]
            .iter()
            .enumerate()
            .fold(0u64, |m, (i, &p)| m | (u64::from(omega[p]) << i))
    }
}

/// A 0/1 assignment to a sorted scope of nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParentRealization {
    scope: Vec<usize>,
    bits: u64,
}

impl ParentRealization {
    pub fn new(scope: Vec<usize>, bits: u64) -> Result<Self> {
        if scope.len() > 63 {
            return Err(Error::Scope(format!("scope of {} nodes is too wide", scope.len())));
        }
        if scope.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Scope(format!("scope {scope:?} is not strictly increasing")));
        }
        if bits >> scope.len() != 0 {
            return Err(Error::Scope(format!(
                "bits {bits:#b} do not fit a scope of {} nodes",
                scope.len()
            )));
        }
        Ok(ParentRealization { scope, bits })
    }

    /// The realization `π` over `P_n` encoded by `mask`.
    pub fn over_parents(dag: &CausalDag, n: usize, mask: u64) -> Result<Self> {
        Self::new(dag.parents(n).to_vec(), mask)
    }

    /// The realization `π̄` over `P̄_n` encoded by `mask`.
    pub fn over_extended(dag: &CausalDag, n: usize, mask: u64) -> Result<Self> {
        Self::new(dag.extended_scope(n), mask)
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.scope.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scope.is_empty()
    }

    /// Value assigned to `node`, if it is in scope.
    pub fn value(&self, node: usize) -> Option<bool> {
        self.scope
            .binary_search(&node)
            .ok()
            .map(|i| (self.bits >> i) & 1 == 1)
    }

    /// `π_S`: the restriction onto `sub_scope`, which must be a subset of the
    /// scope.
    pub fn restrict(&self, sub_scope: &[usize]) -> Result<Self> {
        let mut bits = 0u64;
        for (j, node) in sub_scope.iter().enumerate() {
            let i = self.scope.binary_search(node).map_err(|_| {
                Error::Scope(format!("node {node} is not in scope {:?}", self.scope))
            })?;
            bits |= ((self.bits >> i) & 1) << j;
        }
        Self::new(sub_scope.to_vec(), bits)
    }

    /// `π̄^k`: extends the realization by `node` (which must exceed every
    /// scope member) with value `value`.
    pub fn extend(&self, node: usize, value: bool) -> Result<Self> {
        if self.scope.last().is_some_and(|&l| l >= node) {
            return Err(Error::Scope(format!(
                "cannot extend scope {:?} by node {node}",
                self.scope
            )));
        }
        let mut scope = self.scope.clone();
        scope.push(node);
        Self::new(scope, self.bits | (u64::from(value) << self.scope.len()))
    }
}

impl fmt::Display for ParentRealization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.scope.len() {
            write!(f, "{}", (self.bits >> i) & 1)?;
        }
        Ok(())
    }
}

/// Conditional probabilities `α_n(π̄)` for every node and every realization
/// of its extended scope.
///
/// Tables coming from estimation may be truncated (rows zeroed), so the type
/// itself only enforces the shape; [`validate`] checks ranges and
/// complementarity.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaTable {
    rows: Vec<Vec<f64>>,
}

impl AlphaTable {
    pub fn new(dag: &CausalDag, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != dag.node_count() {
            return Err(Error::Parameter(format!(
                "alpha table has {} nodes, DAG has {}",
                rows.len(),
                dag.node_count()
            )));
        }
        for (n, r) in rows.iter().enumerate() {
            let expected = 2 * dag.parent_rows(n);
            if r.len() != expected {
                return Err(Error::Parameter(format!(
                    "alpha row of node {n} has {} entries, expected {expected}",
                    r.len()
                )));
            }
        }
        Ok(AlphaTable { rows })
    }

    pub fn zeros(dag: &CausalDag) -> Self {
        AlphaTable {
            rows: (0..dag.node_count())
                .map(|n| vec![0.0; 2 * dag.parent_rows(n)])
                .collect(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.rows.len()
    }

    /// Entries of node `n`, indexed by the `P̄_n` mask.
    pub fn node(&self, n: usize) -> &[f64] {
        &self.rows[n]
    }

    pub fn get(&self, n: usize, extended_mask: u64) -> f64 {
        self.rows[n][extended_mask as usize]
    }

    pub fn set(&mut self, n: usize, extended_mask: u64, value: f64) {
        self.rows[n][extended_mask as usize] = value;
    }

    /// `α_n(π̄^k)` for the parent realization `parent_mask`.
    pub fn value(&self, n: usize, parent_mask: u64, k: bool) -> f64 {
        let rows = &self.rows[n];
        let half = rows.len() / 2;
        rows[parent_mask as usize + if k { half } else { 0 }]
    }

    pub fn at(&self, pi: &ParentRealization) -> Result<f64> {
        let n = *pi
            .scope()
            .last()
            .ok_or_else(|| Error::Scope("empty realization has no owning node".into()))?;
        self.rows
            .get(n)
            .and_then(|r| r.get(pi.bits() as usize))
            .copied()
            .ok_or_else(|| Error::Scope(format!("realization {pi} does not index node {n}")))
    }
}

/// Value of a single coordinate of an intervention.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Intervention(Vec<Option<bool>>);

impl Intervention {
    pub fn new(assignment: Vec<Option<bool>>) -> Self {
        Intervention(assignment)
    }

    /// The empty intervention `(*, …, *)`.
    pub fn observational(n: usize) -> Self {
        Intervention(vec![None; n])
    }

    /// Parses a string over `{*, 0, 1}`.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '*' => Ok(None),
                '0' => Ok(Some(false)),
                '1' => Ok(Some(true)),
                other => Err(Error::Parameter(format!(
                    "invalid intervention symbol {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Intervention)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, n: usize) -> Option<bool> {
        self.0[n]
    }

    pub fn is_free(&self, n: usize) -> bool {
        self.0[n].is_none()
    }

    pub fn assignment(&self) -> &[Option<bool>] {
        &self.0
    }

    /// `|A|`: number of intervened nodes.
    pub fn fixed_count(&self) -> usize {
        self.0.iter().filter(|v| v.is_some()).count()
    }
}

impl fmt::Display for Intervention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.0 {
            f.write_str(match v {
                None => "*",
                Some(false) => "0",
                Some(true) => "1",
            })?;
        }
        Ok(())
    }
}

/// What a learner may see: the graph and the intervention set, never `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct Structure {
    dag: CausalDag,
    interventions: Vec<Intervention>,
}

impl Structure {
    pub fn new(dag: CausalDag, interventions: Vec<Intervention>) -> Result<Self> {
        if interventions.is_empty() {
            return Err(Error::Parameter("intervention set is empty".into()));
        }
        if let Some(bad) = interventions.iter().find(|a| a.len() != dag.node_count()) {
            return Err(Error::Parameter(format!(
                "intervention {bad} has length {}, expected {}",
                bad.len(),
                dag.node_count()
            )));
        }
        Ok(Structure { dag, interventions })
    }

    pub fn dag(&self) -> &CausalDag {
        &self.dag
    }

    pub fn interventions(&self) -> &[Intervention] {
        &self.interventions
    }

    pub fn arm_count(&self) -> usize {
        self.interventions.len()
    }
}

/// A full causal bandit instance: structure plus the true parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    structure: Structure,
    alpha: AlphaTable,
}

impl Instance {
    pub fn new(dag: CausalDag, alpha: AlphaTable, interventions: Vec<Intervention>) -> Result<Self> {
        let alpha = AlphaTable::new(&dag, alpha.rows)?;
        Ok(Instance {
            structure: Structure::new(dag, interventions)?,
            alpha,
        })
    }

    pub fn from_structure(structure: Structure, alpha: AlphaTable) -> Result<Self> {
        let alpha = AlphaTable::new(structure.dag(), alpha.rows)?;
        Ok(Instance { structure, alpha })
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn dag(&self) -> &CausalDag {
        &self.structure.dag
    }

    pub fn alpha(&self) -> &AlphaTable {
        &self.alpha
    }

    pub fn interventions(&self) -> &[Intervention] {
        &self.structure.interventions
    }

    pub fn with_interventions(&self, interventions: Vec<Intervention>) -> Result<Self> {
        Ok(Instance {
            structure: Structure::new(self.dag().clone(), interventions)?,
            alpha: self.alpha.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub node: usize,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    TooFewNodes { count: usize },
    ParentOutOfRange { parent: usize },
    TopologicalOrder { parent: usize },
    UnsortedParents,
    DuplicateParent { parent: usize },
    TooManyParents { count: usize },
    TableShape { expected: usize, found: usize },
    ValueOutOfRange { mask: u64, value: f64 },
    ComplementSum { parent_mask: u64, sum: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node {}: ", self.node)?;
        match &self.kind {
            ViolationKind::TooFewNodes { count } => {
                write!(f, "graph has {count} nodes, at least 3 required")
            }
            ViolationKind::ParentOutOfRange { parent } => {
                write!(f, "parent {parent} does not exist")
            }
            ViolationKind::TopologicalOrder { parent } => {
                write!(f, "topological order (parent {parent} is not below the node)")
            }
            ViolationKind::UnsortedParents => write!(f, "parent list is not sorted"),
            ViolationKind::DuplicateParent { parent } => write!(f, "duplicate parent {parent}"),
            ViolationKind::TooManyParents { count } => {
                write!(f, "{count} parents exceed the supported {MAX_PARENTS}")
            }
            ViolationKind::TableShape { expected, found } => {
                write!(f, "alpha row has {found} entries, expected {expected}")
            }
            ViolationKind::ValueOutOfRange { mask, value } => {
                write!(f, "alpha value {value} at mask {mask:#b} is outside [0,1]")
            }
            ViolationKind::ComplementSum { parent_mask, sum } => write!(
                f,
                "complement sum != 1 for parent realization {parent_mask:#b} (sum {sum})"
            ),
        }
    }
}

/// Tolerance for the complement-sum check.
pub const COMPLEMENT_TOLERANCE: f64 = 1e-9;

fn structural_violations(dag: &CausalDag) -> Vec<Violation> {
    let mut out = Vec::new();
    let count = dag.node_count();
    if count < 3 {
        out.push(Violation {
            node: count.saturating_sub(1),
            kind: ViolationKind::TooFewNodes { count },
        });
    }
    for (n, ps) in dag.parents.iter().enumerate() {
        let mut push = |kind| out.push(Violation { node: n, kind });
        if ps.len() > MAX_PARENTS {
            push(ViolationKind::TooManyParents { count: ps.len() });
        }
        for &p in ps {
            if p >= count {
                push(ViolationKind::ParentOutOfRange { parent: p });
            } else if p >= n {
                push(ViolationKind::TopologicalOrder { parent: p });
            }
        }
        for w in ps.windows(2) {
            if w[0] == w[1] {
                push(ViolationKind::DuplicateParent { parent: w[0] });
            } else if w[0] > w[1] {
                push(ViolationKind::UnsortedParents);
            }
        }
    }
    out
}

/// Lists every broken invariant of the DAG and the table; empty means ok.
pub fn validate(dag: &CausalDag, alpha: &AlphaTable) -> Vec<Violation> {
    let mut out = structural_violations(dag);
    if alpha.node_count() != dag.node_count() {
        out.push(Violation {
            node: alpha.node_count().min(dag.node_count()),
            kind: ViolationKind::TableShape {
                expected: dag.node_count(),
                found: alpha.node_count(),
            },
        });
        return out;
    }
    for n in 0..dag.node_count() {
        let row = alpha.node(n);
        let expected = 2usize
            .checked_shl(dag.parents(n).len() as u32)
            .unwrap_or(usize::MAX);
        if row.len() != expected {
            out.push(Violation {
                node: n,
                kind: ViolationKind::TableShape {
                    expected,
                    found: row.len(),
                },
            });
            continue;
        }
        for (mask, &value) in row.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                out.push(Violation {
                    node: n,
                    kind: ViolationKind::ValueOutOfRange {
                        mask: mask as u64,
                        value,
                    },
                });
            }
        }
        let half = row.len() / 2;
        for pm in 0..half {
            let sum = row[pm] + row[pm + half];
            if (sum - 1.0).abs() > COMPLEMENT_TOLERANCE {
                out.push(Violation {
                    node: n,
                    kind: ViolationKind::ComplementSum {
                        parent_mask: pm as u64,
                        sum,
                    },
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain3() -> CausalDag {
        CausalDag::new(vec![vec![], vec![0], vec![1]]).unwrap()
    }

    #[test]
    fn chain_with_complementary_rows_is_valid() {
        let dag = chain3();
        let alpha = AlphaTable::new(
            &dag,
            vec![vec![0.4, 0.6], vec![0.1, 0.7, 0.9, 0.3], vec![0.5, 0.2, 0.5, 0.8]],
        )
        .unwrap();
        assert!(validate(&dag, &alpha).is_empty());
        assert_eq!(dag.row_count(), 5);
    }

    #[test]
    fn parent_at_or_above_node_is_a_topological_violation() {
        let dag = CausalDag::from_parents_unchecked(vec![vec![], vec![2], vec![]]);
        let alpha = AlphaTable::new(&dag, vec![vec![0.5, 0.5], vec![0.5, 0.5, 0.5, 0.5], vec![0.5, 0.5]])
            .unwrap();
        let v = validate(&dag, &alpha);
        assert_eq!(
            v,
            vec![Violation {
                node: 1,
                kind: ViolationKind::TopologicalOrder { parent: 2 }
            }]
        );
        assert!(v[0].to_string().contains("topological order"));
        assert!(CausalDag::new(vec![vec![], vec![2], vec![]]).is_err());
    }

    #[test]
    fn non_complementary_row_is_reported() {
        let dag = chain3();
        let mut alpha = AlphaTable::new(
            &dag,
            vec![vec![0.4, 0.6], vec![0.1, 0.7, 0.9, 0.3], vec![0.5, 0.2, 0.5, 0.8]],
        )
        .unwrap();
        // α_2(π̄^1) = 0.3 and α_2(π̄^0) = 0.8 for parent value 1.
        alpha.set(1, 0b01, 0.8);
        alpha.set(1, 0b11, 0.3);
        let v = validate(&dag, &alpha);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].node, 1);
        assert!(matches!(v[0].kind, ViolationKind::ComplementSum { parent_mask: 1, .. }));
        assert!(v[0].to_string().contains("complement sum != 1"));
    }

    #[test]
    fn duplicate_and_unsorted_parents_are_rejected() {
        let dag = CausalDag::from_parents_unchecked(vec![vec![], vec![], vec![1, 0], vec![0, 0]]);
        let kinds: Vec<_> = structural_violations(&dag).into_iter().map(|v| v.kind).collect();
        assert!(kinds.contains(&ViolationKind::UnsortedParents));
        assert!(kinds.contains(&ViolationKind::DuplicateParent { parent: 0 }));
    }

    #[test]
    fn restrict_copies_bits_positionally() {
        let pi = ParentRealization::new(vec![1, 2, 4], 0b101).unwrap();
        let r = pi.restrict(&[1, 4]).unwrap();
        assert_eq!(r.scope(), &[1, 4]);
        assert_eq!(r.bits(), 0b11);
        assert_eq!(pi.restrict(&[1, 2, 4]).unwrap(), pi);
        let empty = pi.restrict(&[]).unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.bits(), 0);
        assert!(matches!(pi.restrict(&[3]), Err(Error::Scope(_))));
    }

    #[test]
    fn extend_appends_the_owning_node() {
        let pi = ParentRealization::new(vec![0, 3], 0b10).unwrap();
        let up = pi.extend(5, true).unwrap();
        assert_eq!(up.bits(), 0b110);
        assert_eq!(up.value(5), Some(true));
        assert_eq!(up.value(0), Some(false));
        assert!(pi.extend(2, false).is_err());
    }

    #[test]
    fn intervention_round_trips_through_text() {
        let a = Intervention::parse("*01*").unwrap();
        assert_eq!(a.fixed_count(), 2);
        assert_eq!(a.to_string(), "*01*");
        assert!(Intervention::parse("*2").is_err());
    }

    #[test]
    fn structure_rejects_empty_or_misshaped_sets() {
        assert!(Structure::new(chain3(), vec![]).is_err());
        assert!(Structure::new(chain3(), vec![Intervention::observational(2)]).is_err());
    }
}
