//! Spectral gaps and Hoeffding-type concentration bounds for finite-state
//! Markov chains.
//!
//! The crate computes, exactly, the three spectral quantities of a finite
//! chain (absolute, right, and spectral-radius lambda), evaluates the family
//! of sub-Gaussian moment and tail bounds those quantities control, and
//! verifies everything against exact matrix-product oracles and seeded
//! simulation. Desk-scale reproductions of the downstream applications
//! (regression with Markov designs, sparse covariance thresholding,
//! respondent-driven sampling, bandits with Markovian rewards, MCMC run
//! planning) live in [`learnlab`].
//!
//! Entry points:
//!
//! * [`chain`] — the [`FiniteChain`] model and its spectral summary.
//! * [`bounds`] — every bound evaluator, from the classical independent case
//!   to burn-in-corrected MCMC planning.
//! * [`sim`] — exact mgf oracles, trajectory sampling, asymptotic variance,
//!   and the lazy-Gaussian counterexample.
//! * [`extremal`] — the eigenvalue machinery behind the bounds: the
//!   `F(r) = 1` secular equation and the two-state extremal chain.
//! * [`learnlab`] — the six statistical-learning applications.
//! * [`cli`] — the command-line front door used by the `markov-hoeffding`
//!   binary.

pub mod bounds;
pub mod chain;
pub mod cli;
pub mod error;
pub mod extremal;
pub mod learnlab;
pub mod operator;
pub mod sim;

pub use bounds::{BoundReport, McmcPlan, StepFunction, TheoremId};
pub use chain::{alpha, leon_perron_kernel, FiniteChain, MeasurePair, NormOrder, SpectralSummary};
pub use error::{Error, Result};
pub use extremal::{SimpleFunction, TwoStateSystem};
pub use sim::{StartSpec, Trajectory};
