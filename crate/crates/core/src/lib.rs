//! Doubly robust off-policy learning on manifold-supported covariates.
//!
//! This crate implements a two-stage learning pipeline for logged bandit
//! data whose covariates live on a low-dimensional manifold embedded in a
//! high-dimensional ambient space:
//!
//! 1. **Stage 1** fits nuisance functions on the first data split — one
//!    ReLU network per action for the conditional expected reward, and a
//!    multinomial-logistic network for the logging propensities.
//! 2. **Stage 2** builds per-sample doubly robust score vectors on the
//!    second split and maximizes the resulting empirical reward over a
//!    temperature-softmax network policy class.
//!
//! Continuous actions on `[0, 1]` are handled by uniform discretization
//! into `V` sub-intervals, after which the finite-action pipeline runs
//! verbatim on interval indices.
//!
//! The [`env`] module provides synthetic environments with known reward
//! and propensity functions plus quadrature oracles, so learned policies
//! can be scored against exact expected rewards. The [`eval`] module runs
//! the experiment suites (sample-size ladders, ambient-dimension sweeps,
//! robustness stress tests, discretization checks) with deterministic,
//! seed-derived replication streams.

pub mod config;
pub mod continuous;
pub mod env;
pub mod eval;
pub mod linalg;
pub mod nn;
pub mod pipeline;
pub mod policy;
pub mod seeds;
pub mod stage1;
pub mod stage2;

pub use env::{LoggedDataset, ManifoldEmbedding, SyntheticEnvironment};
pub use nn::{AdamState, GradientBundle, MlpNetwork, MlpSpec};
pub use stage1::{PropensityModel, RewardModelSet};
pub use stage2::{DrScoreMatrix, LearnedPolicy};
