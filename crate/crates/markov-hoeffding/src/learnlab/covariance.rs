//! Thresholded covariance estimation over a sparse model class.
//!
//! The population matrix must lie in the class of row-sparse, bounded-diagonal
//! positive semidefinite matrices. Thresholding the sample matrix at
//! `t = 2 sqrt(2 (2+delta) alpha(lambda_r v 0) log d / n)` (the smallest
//! admissible threshold) gives, with probability at least `1 - 2 d^-delta`,
//!
//! ```text
//! |||T_t(Sigma_hat) - Sigma|||_1 <= s (2 t + 3 sqrt(2 (2+delta) alpha log d / n)).
//! ```

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chain::{alpha, FiniteChain};
use crate::error::{Error, Result};
use crate::learnlab::features::FeatureMap;
use crate::operator;
use crate::sim;

/// Elementwise thresholding: entries with `|m_jk| <= t` are zeroed, strict
/// exceedance keeps. Idempotent.
pub fn threshold_cov(m: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    m.map(|v| if v.abs() > t { v } else { 0.0 })
}

/// Simulates the design chain, thresholds the sample second-moment matrix
/// at the smallest admissible level, and reports the realized matrix-1-norm
/// error with its bound.
///
/// `s` is the row-sparsity cap, `m` the diagonal cap, `delta` the exponent
/// of the confidence level `1 - 2 d^-delta`. The feature map must be
/// centered and its exact population matrix must satisfy the model class.
#[allow(clippy::too_many_arguments)]
pub fn sparse_cov_experiment(
    chain: &FiniteChain,
    fmap: &FeatureMap,
    s: usize,
    m: f64,
    delta: f64,
    n: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if !fmap.centered() {
        return Err(Error::ModelViolation(
            "feature map must be exactly centered".into(),
        ));
    }
    if s < 1 || n < 1 || delta <= 0.0 {
        return Err(Error::Invalid("need s >= 1, n >= 1, delta > 0".into()));
    }
    let sigma = fmap.exact_gram(chain)?;
    check_model_class(&sigma, s, m)?;

    let a = alpha(chain.right_lambda().max(0.0))?;
    let dd = fmap.d_feat() as f64;
    let eps_term = (2.0 * (2.0 + delta) * a * dd.ln() / n as f64).sqrt();
    let t = 2.0 * eps_term;
    // Features are bounded by 1, so every sample entry lies in [-1, 1]; a
    // threshold past 1 annihilates the estimate and the regime is vacuous.
    if t > 1.0 {
        return Err(Error::BracketEmpty(format!(
            "threshold {t:.4} exceeds the feature-product range; increase n"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    let path = sim::sample_path_with(chain, chain.stationary().as_slice(), n, &mut rng);
    let design = fmap.design(&path);
    let sample = design.transpose() * &design / n as f64;

    let err = matrix_one_norm(&(threshold_cov(&sample, t) - &sigma));
    let bound = s as f64 * (2.0 * t + 3.0 * eps_term);
    Ok((err, bound))
}

/// Operator 1-norm (maximum absolute column sum; equals the max row sum for
/// the symmetric matrices used here).
pub fn matrix_one_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].abs()).sum())
        .fold(0.0, f64::max)
}

fn check_model_class(sigma: &DMatrix<f64>, s: usize, m: f64) -> Result<()> {
    let d = sigma.nrows();
    for j in 0..d {
        if sigma[(j, j)] > m + 1e-12 {
            return Err(Error::ModelViolation(format!(
                "diagonal entry {j} = {} exceeds cap {m}",
                sigma[(j, j)]
            )));
        }
        let nz = (0..d).filter(|&k| sigma[(j, k)].abs() > 1e-10).count();
        if nz > s {
            return Err(Error::ModelViolation(format!(
                "row {j} has {nz} nonzeros, cap is {s}"
            )));
        }
    }
    let sym = (sigma + sigma.transpose()) * 0.5;
    let min_eig = operator::symmetric_eigenvalues(&sym)
        .last()
        .cloned()
        .unwrap_or(0.0);
    if min_eig < -1e-8 {
        return Err(Error::ModelViolation(format!(
            "population matrix is not positive semidefinite (min eig {min_eig:.3e})"
        )));
    }
    Ok(())
}
