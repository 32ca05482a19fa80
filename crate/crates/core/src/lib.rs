//! Causal bandits with arbitrary hard interventions on binary causal DAGs.
//!
//! A learner is given the structure of a causal DAG over binary variables and
//! a set of interventions `A ∈ {*,0,1}^N`. Each experiment applies one
//! intervention and observes a full realization of the graph. The goal is to
//! identify the intervention maximizing `μ(A) = Prob(V_N = 1 | do(A))` with a
//! fixed experiment budget, measured by simple regret.
//!
//! The crate is organized around the pieces of that problem:
//!
//! - [`model`]: DAGs, conditional-probability tables, interventions, and the
//!   instance constructors (synthetic trees, budgeted leaf interventions, the
//!   soft-to-hard intervention reduction).
//! - [`inference`]: exact `μ`/`β` computation by a frontier dynamic program,
//!   a brute-force oracle, and the simulated [`Environment`](inference::Environment).
//! - [`simplex`]: the min-max ratio allocation problem over the probability
//!   simplex and the `γ*` constant.
//! - [`phase1`] and [`phase2`]: the two estimation phases of the proposed
//!   algorithm.
//! - [`bandit`]: the proposed strategy and the best-arm identification
//!   baselines behind one contract, plus simple regret.
//! - [`bif`]: a structure-only parser for Bayesian Interchange Format files.
//! - [`experiment`]: regret sweeps, configuration files and CSV reports.
//!
//! ```
//! use causal_bandit::model::make_binary_tree_instance;
//! use causal_bandit::inference::exact_mu;
//!
//! let instance = make_binary_tree_instance(2, 1, 7).unwrap();
//! assert_eq!(instance.dag().node_count(), 7);
//! let mu = exact_mu(&instance, &instance.interventions()[0]).unwrap();
//! assert!((0.0..=1.0).contains(&mu));
//! ```

pub mod bandit;
pub mod bif;
mod error;
pub mod experiment;
pub mod inference;
pub mod model;
pub mod phase1;
pub mod phase2;
pub mod rng;
pub mod simplex;

pub use error::{Error, Result};
