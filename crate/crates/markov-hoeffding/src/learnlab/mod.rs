//! Desk-scale statistical-learning applications of the chain bounds:
//! regression with Markov designs, sparse covariance thresholding,
//! respondent-driven sampling on graphs, and bandits with Markovian
//! rewards. Every experiment is a pure function of its inputs and a seed.

pub mod bandit;
pub mod covariance;
pub mod features;
pub mod rds;
pub mod regression;

pub use bandit::{ucb_bound, ucb_run, BanditArm, RegretTrace};
pub use covariance::{sparse_cov_experiment, threshold_cov};
pub use features::FeatureMap;
pub use rds::{rds_estimate, Graph, RdsReport};
pub use regression::{
    epsilon_n_tail, inverse_perturbation_bound, lasso_re_check, ols_experiment, OlsOutcome,
};
