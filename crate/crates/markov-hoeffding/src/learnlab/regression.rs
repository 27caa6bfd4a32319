//! Least squares and lasso feasibility with Markov designs.
//!
//! The design rows are features of a stationary chain path, so the sample
//! second-moment matrix concentrates at the rate of the chain's right
//! spectral gap: the elementwise deviation satisfies
//! `P(eps_n >= eps) <= 2 d^2 exp(-n eps^2 / (2 alpha(lambda_r v 0)))`.
//! Everything downstream (the OLS error bound, the restricted-eigenvalue
//! deflation) is arithmetic on top of that tail.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::chain::{alpha, FiniteChain};
use crate::error::{Error, Result};
use crate::learnlab::features::FeatureMap;
use crate::operator;
use crate::sim;

/// Tail bound on the elementwise deviation of the sample second-moment
/// matrix: `2 d^2 exp(-n eps^2 / (2 alpha(lambda_r v 0)))`.
pub fn epsilon_n_tail(lam_r: f64, d_feat: usize, n: usize, eps: f64) -> Result<f64> {
    if d_feat < 1 || n < 1 {
        return Err(Error::Invalid("d_feat and n must be at least 1".into()));
    }
    if eps < 0.0 {
        return Err(Error::Invalid(format!("eps = {eps} negative")));
    }
    let a = alpha(lam_r.max(0.0))?;
    let d = d_feat as f64;
    Ok(2.0 * d * d * (-(n as f64) * eps * eps / (2.0 * a)).exp())
}

/// The inverse under a spectral-norm perturbation:
/// `|||S1^-1 - S2^-1||| <= |||S1^-1|||^2 |||S1 - S2||| / (1 - |||S1^-1||| |||S1 - S2|||)`,
/// valid while the denominator stays positive.
pub fn inverse_perturbation_bound(s1: &DMatrix<f64>, s2: &DMatrix<f64>) -> Result<f64> {
    if s1.shape() != s2.shape() || !s1.is_square() {
        return Err(Error::Invalid("matrices must be square with equal shape".into()));
    }
    let inv1 = s1.clone().try_inverse().ok_or(Error::SingularSigma)?;
    let inv_norm = operator::largest_singular_value(&inv1);
    let diff_norm = operator::largest_singular_value(&(s1 - s2));
    let product = inv_norm * diff_norm;
    if product >= 1.0 {
        return Err(Error::PerturbationTooLarge(format!(
            "|||S1^-1||| * |||S1 - S2||| = {product} >= 1"
        )));
    }
    Ok(inv_norm * inv_norm * diff_norm / (1.0 - product))
}

/// One seeded least-squares run.
#[derive(Clone, Debug, Serialize)]
pub struct OlsOutcome {
    /// Realized `||beta_hat - beta_star||_2`.
    pub err: f64,
    /// `sigma |||Sigma^-1||| sqrt(8 d (log(1/delta) + log d) / n)`, holding
    /// with probability at least `1 - 4 delta` once `n >= n_min`.
    pub bound: f64,
    /// `ceil(8 alpha(lambda_r v 0) d^2 |||Sigma^-1|||^2 (log(1/delta) + 2 log d))`.
    pub n_min: usize,
}

/// Simulates the design chain, draws Gaussian noise of scale `sigma`, and
/// solves the normal equations `beta_hat = Sigma_hat^-1 (F' y / n)`.
///
/// The path uses stream 0 and the noise stream 1 of the seeded generator.
pub fn ols_experiment(
    chain: &FiniteChain,
    fmap: &FeatureMap,
    beta_star: &[f64],
    sigma: f64,
    n: usize,
    delta: f64,
    seed: u64,
) -> Result<OlsOutcome> {
    let d_feat = fmap.d_feat();
    if beta_star.len() != d_feat {
        return Err(Error::Invalid("beta_star length mismatch".into()));
    }
    if sigma < 0.0 || !(0.0..1.0).contains(&delta) || delta == 0.0 {
        return Err(Error::Invalid("need sigma >= 0 and delta in (0, 1)".into()));
    }
    let gram = fmap.exact_gram(chain)?;
    let inv_norm = inverse_spectral_norm(&gram)?;
    let a = alpha(chain.right_lambda().max(0.0))?;
    let dd = d_feat as f64;
    let n_min = (8.0 * a * dd * dd * inv_norm * inv_norm * ((1.0 / delta).ln() + 2.0 * dd.ln()))
        .ceil() as usize;
    if n < n_min {
        return Err(Error::SampleTooSmall { n, n_min });
    }

    let mut path_rng = ChaCha8Rng::seed_from_u64(seed);
    path_rng.set_stream(0);
    let path = sim::sample_path_with(chain, chain.stationary().as_slice(), n, &mut path_rng);
    let design = fmap.design(&path);

    let mut noise_rng = ChaCha8Rng::seed_from_u64(seed);
    noise_rng.set_stream(1);
    let beta = DMatrix::from_column_slice(d_feat, 1, beta_star);
    let mut y = &design * &beta;
    for i in 0..n {
        let z: f64 = StandardNormal.sample(&mut noise_rng);
        y[(i, 0)] += sigma * z;
    }

    let gram_hat = design.transpose() * &design / n as f64;
    let rhs = design.transpose() * &y / n as f64;
    let beta_hat = gram_hat.lu().solve(&rhs).ok_or(Error::SingularSigma)?;
    let err = (&beta_hat - &beta).norm();
    let bound = sigma * inv_norm * (8.0 * dd * ((1.0 / delta).ln() + dd.ln()) / n as f64).sqrt();
    Ok(OlsOutcome { err, bound, n_min })
}

/// Restricted-eigenvalue constant after the dependence deflation:
/// `kappa = |||Sigma^-1|||^-1 - 16 s sqrt(2 (2+delta) alpha(lambda_r v 0) log d / n)`,
/// and whether the feasibility display
/// `16 |||Sigma^-1||| s sqrt(...) < 1` holds. No lasso solver runs; the
/// check is the contribution.
pub fn lasso_re_check(
    chain: &FiniteChain,
    fmap: &FeatureMap,
    s: usize,
    delta: f64,
    n: usize,
) -> Result<(f64, bool)> {
    if s < 1 || n < 1 || delta <= 0.0 {
        return Err(Error::Invalid("need s >= 1, n >= 1, delta > 0".into()));
    }
    let gram = fmap.exact_gram(chain)?;
    let inv_norm = inverse_spectral_norm(&gram)?;
    let a = alpha(chain.right_lambda().max(0.0))?;
    let dd = fmap.d_feat() as f64;
    let deflation =
        16.0 * s as f64 * (2.0 * (2.0 + delta) * a * dd.ln() / n as f64).sqrt();
    let kappa = 1.0 / inv_norm - deflation;
    let feasible = inv_norm * deflation < 1.0;
    Ok((kappa, feasible))
}

fn inverse_spectral_norm(gram: &DMatrix<f64>) -> Result<f64> {
    let svd = gram.clone().svd(false, false);
    let max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let min = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min <= 1e-12 * max.max(1.0) {
        return Err(Error::SingularSigma);
    }
    Ok(1.0 / min)
}
