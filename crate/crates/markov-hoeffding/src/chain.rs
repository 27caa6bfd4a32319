//! Finite-state Markov chain model.
//!
//! A [`FiniteChain`] is a row-stochastic kernel `P` on `d` states together
//! with its stationary distribution `pi`. Three spectral quantities are
//! computed from it:
//!
//! * `lambda_abs`  — operator norm of `P - Pi` on the weighted space, where
//!   `Pi` is the rank-one kernel whose rows all equal `pi`; `1 - lambda_abs`
//!   is the absolute spectral gap.
//! * `lambda_right` — largest spectrum point of the additive
//!   reversiblization `R = (P + P*)/2` on mean-zero functions; can be
//!   negative. `1 - lambda_right` is the right spectral gap.
//! * `lambda_inf`  — spectral-radius estimate `|||P^k - Pi|||^(1/k)` reported
//!   for `k = 1..k_max`; for reversible chains it coincides with
//!   `lambda_abs`.
//!
//! The dependence penalty entering every Hoeffding-type bound is
//! `alpha(x) = (1 + x) / (1 - x)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator;

const ROW_SUM_TOL: f64 = 1e-9;
const INVARIANCE_TOL: f64 = 1e-10;
/// Spectral gaps this close to zero make `alpha` blow up; bound evaluators
/// treat the chain as gap-exhausted.
pub const GAP_EPS: f64 = 1e-12;

/// The multiplicative dependence penalty `(1 + lam) / (1 - lam)`.
///
/// Errors with [`Error::GapExhausted`] when `lam >= 1 - 1e-12`.
pub fn alpha(lam: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&lam) {
        return Err(Error::Invalid(format!(
            "alpha expects lam in [0, 1), got {lam}"
        )));
    }
    if lam >= 1.0 - GAP_EPS {
        return Err(Error::GapExhausted(format!("lam = {lam}")));
    }
    Ok((1.0 + lam) / (1.0 - lam))
}

/// Row-stochastic kernel on `d` states with its stationary distribution.
///
/// Invariants held after construction: rows sum to 1 within 1e-12, all
/// entries in `[0, 1]`, `pi` strictly positive summing to 1, and
/// `pi' P = pi'` within 1e-10 per coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteChain {
    p: DMatrix<f64>,
    pi: DVector<f64>,
}

impl FiniteChain {
    /// Builds a chain from a kernel alone, solving for the stationary
    /// distribution and requiring it to be unique with full support.
    ///
    /// The solve is the homogeneous linear system `(P' - I) pi = 0`
    /// (nullspace via SVD) with normalization, falling back to power
    /// iteration on the lazy kernel `(P + I)/2` when the direct solve
    /// leaves a residual.
    pub fn from_kernel(p: DMatrix<f64>) -> Result<Self> {
        let p = validate_kernel(p)?;
        let d = p.nrows();
        if d == 1 {
            return Ok(Self {
                p,
                pi: DVector::from_element(1, 1.0),
            });
        }

        let a = p.transpose() - DMatrix::<f64>::identity(d, d);
        let svd = a.clone().svd(false, true);
        let mut sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
        sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let null_count = sv.iter().filter(|&&s| s < 1e-10).count();
        if null_count != 1 {
            return Err(Error::DegenerateStationary(format!(
                "{null_count} invariant distributions (kernel is reducible)"
            )));
        }

        // Right singular vector of the smallest singular value spans the
        // nullspace.
        let v_t = svd.v_t.expect("requested v_t");
        let min_idx = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|(_, x), (_, y)| x.partial_cmp(y).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let mut pi = DVector::from_fn(d, |i, _| v_t[(min_idx, i)]);
        let total: f64 = pi.iter().sum();
        if total.abs() < 1e-12 {
            return Err(Error::DegenerateStationary(
                "nullspace vector has zero mass".into(),
            ));
        }
        pi /= total;

        let residual = invariance_residual(&p, &pi);
        if residual > INVARIANCE_TOL {
            pi = power_iterate_lazy(&p)?;
        }
        finish_with_pi(p, pi)
    }

    /// Builds a chain from a kernel and a known stationary distribution,
    /// validating invariance but not uniqueness.
    ///
    /// Needed for kernels whose stationary distribution is supplied by
    /// construction (mixtures with the identity, for which the invariant
    /// measure is not unique at coefficient 1).
    pub fn with_stationary(p: DMatrix<f64>, pi: DVector<f64>) -> Result<Self> {
        let p = validate_kernel(p)?;
        if pi.len() != p.nrows() {
            return Err(Error::Invalid(format!(
                "pi has length {} but kernel is {}x{}",
                pi.len(),
                p.nrows(),
                p.ncols()
            )));
        }
        let total: f64 = pi.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Invalid(format!("pi sums to {total}")));
        }
        let pi = pi / total;
        finish_with_pi(p, pi)
    }

    /// Number of states.
    pub fn d(&self) -> usize {
        self.p.nrows()
    }

    /// The transition kernel.
    pub fn kernel(&self) -> &DMatrix<f64> {
        &self.p
    }

    /// The stationary distribution.
    pub fn stationary(&self) -> &DVector<f64> {
        &self.pi
    }

    /// Time-reversal kernel `P*(x, y) = pi(y) P(y, x) / pi(x)`.
    ///
    /// The result is row-stochastic and shares the stationary distribution;
    /// `diag(pi) P = (diag(pi) P*)'` holds elementwise.
    pub fn time_reversal(&self) -> DMatrix<f64> {
        let d = self.d();
        DMatrix::from_fn(d, d, |i, j| self.pi[j] * self.p[(j, i)] / self.pi[i])
    }

    /// Additive reversiblization `R = (P + P*)/2`; self-adjoint on the
    /// weighted space (`diag(pi) R` symmetric).
    pub fn additive_reversiblization(&self) -> DMatrix<f64> {
        (&self.p + self.time_reversal()) * 0.5
    }

    /// Operator norm of `P - Pi` on the weighted space; in `[0, 1]`.
    ///
    /// The value 1 is legal (the identity kernel); bound evaluators reject
    /// it downstream.
    pub fn absolute_lambda(&self) -> f64 {
        let m = &self.p - operator::projection_kernel(&self.pi);
        operator::operator_norm(&m, &self.pi).min(1.0)
    }

    /// Largest eigenvalue of the additive reversiblization on mean-zero
    /// functions; may be negative.
    pub fn right_lambda(&self) -> f64 {
        if self.d() == 1 {
            return 0.0;
        }
        let m = self.additive_reversiblization() - operator::projection_kernel(&self.pi);
        operator::self_adjoint_top_eigenvalue(&m, &self.pi).clamp(-1.0, 1.0)
    }

    /// Spectral-radius estimate `|||P^k - Pi|||^(1/k)` at `k = k_max`,
    /// together with the whole sequence for `k = 1..=k_max`.
    ///
    /// No stopping rule is applied; convergence judgment is left to the
    /// caller.
    pub fn spectral_radius_lambda(&self, k_max: usize) -> Result<SpectralRadiusEstimate> {
        if k_max < 1 {
            return Err(Error::Invalid("k_max must be at least 1".into()));
        }
        let a = operator::similarity(
            &(&self.p - operator::projection_kernel(&self.pi)),
            &self.pi,
        );
        let mut power = a.clone();
        let mut sequence = Vec::with_capacity(k_max);
        for k in 1..=k_max {
            let norm = operator::largest_singular_value(&power);
            sequence.push(norm.powf(1.0 / k as f64).min(1.0));
            if k < k_max {
                power = &power * &a;
            }
        }
        Ok(SpectralRadiusEstimate {
            estimate: *sequence.last().unwrap(),
            k_used: k_max,
            sequence,
        })
    }

    /// The `lambda I + (1 - lambda) Pi` kernel with the same gap and
    /// stationary distribution as this chain.
    pub fn leon_perron_version(&self) -> FiniteChain {
        leon_perron_kernel(self.pi.as_slice(), self.absolute_lambda())
            .expect("valid pi and coefficient")
    }

    /// All spectral quantities in one report.
    pub fn spectral_summary(&self, k_max: usize) -> Result<SpectralSummary> {
        let lambda_abs = self.absolute_lambda();
        let lambda_right = self.right_lambda();
        let radius = self.spectral_radius_lambda(k_max)?;
        Ok(SpectralSummary {
            lambda_abs,
            lambda_right,
            lambda_inf_estimate: radius.estimate,
            k_used: radius.k_used,
            k_sequence: radius.sequence,
            alpha_abs: alpha(lambda_abs).ok(),
            alpha_right: alpha(lambda_right.max(0.0)).ok(),
        })
    }
}

/// Mixture kernel `c I + (1 - c) Pi` for a supplied stationary distribution.
///
/// `c = 0` gives the i.i.d. kernel, `c = 1` the identity; the absolute
/// lambda of the result equals `c`.
pub fn leon_perron_kernel(pi: &[f64], c: f64) -> Result<FiniteChain> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::Invalid(format!("coefficient c = {c} outside [0, 1]")));
    }
    let d = pi.len();
    if d == 0 {
        return Err(Error::Invalid("empty stationary vector".into()));
    }
    let total: f64 = pi.iter().sum();
    if (total - 1.0).abs() > 1e-9 || pi.iter().any(|&x| x <= 0.0) {
        return Err(Error::Invalid(
            "pi must be a strictly positive probability vector".into(),
        ));
    }
    let p = DMatrix::from_fn(d, d, |i, j| {
        let diag = if i == j { c } else { 0.0 };
        diag + (1.0 - c) * pi[j] / total
    });
    FiniteChain::with_stationary(p, DVector::from_column_slice(pi))
}

/// Spectral-radius sequence from [`FiniteChain::spectral_radius_lambda`].
#[derive(Clone, Debug, Serialize)]
pub struct SpectralRadiusEstimate {
    pub estimate: f64,
    pub k_used: usize,
    /// `|||P^k - Pi|||^(1/k)` for `k = 1..=k_used`.
    pub sequence: Vec<f64>,
}

/// The three spectral quantities and their dependence penalties.
///
/// `alpha_abs`/`alpha_right` are `None` when the corresponding gap is
/// exhausted (`lambda >= 1 - 1e-12`), which serializes to JSON `null`.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralSummary {
    pub lambda_abs: f64,
    pub lambda_right: f64,
    pub lambda_inf_estimate: f64,
    pub k_used: usize,
    pub k_sequence: Vec<f64>,
    pub alpha_abs: Option<f64>,
    pub alpha_right: Option<f64>,
}

/// Norm order `p` in `(1, inf]` with its Hoelder conjugate `q = p/(p-1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormOrder {
    Finite(f64),
    Infinity,
}

impl NormOrder {
    /// A finite order; errors with [`Error::InvalidP`] unless `p > 1`.
    pub fn finite(p: f64) -> Result<Self> {
        if !p.is_finite() || p <= 1.0 {
            return Err(Error::InvalidP(p));
        }
        Ok(NormOrder::Finite(p))
    }

    /// Hoelder conjugate: `p/(p-1)` for finite `p`, `1` at infinity.
    pub fn conjugate(&self) -> f64 {
        match self {
            NormOrder::Finite(p) => p / (p - 1.0),
            NormOrder::Infinity => 1.0,
        }
    }
}

impl std::fmt::Display for NormOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NormOrder::Finite(p) => write!(f, "{p}"),
            NormOrder::Infinity => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for NormOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "Inf" | "INF" | "infinity" => Ok(NormOrder::Infinity),
            other => {
                let p: f64 = other
                    .parse()
                    .map_err(|_| Error::Invalid(format!("cannot parse norm order {other:?}")))?;
                NormOrder::finite(p)
            }
        }
    }
}

/// An initial measure `nu` absolutely continuous with respect to `pi`,
/// carried together with its density `d nu / d pi` and a norm order.
#[derive(Clone, Debug)]
pub struct MeasurePair {
    nu: DVector<f64>,
    pi: DVector<f64>,
    density: DVector<f64>,
    p: NormOrder,
}

impl MeasurePair {
    pub fn new(nu: &[f64], pi: &DVector<f64>, p: NormOrder) -> Result<Self> {
        if nu.len() != pi.len() {
            return Err(Error::Invalid(format!(
                "nu has length {} but pi has length {}",
                nu.len(),
                pi.len()
            )));
        }
        let total: f64 = nu.iter().sum();
        if (total - 1.0).abs() > 1e-12 || nu.iter().any(|&x| x < -1e-15) {
            return Err(Error::Invalid(format!(
                "nu must be a probability vector (sums to {total})"
            )));
        }
        let nu = DVector::from_column_slice(nu);
        let density = DVector::from_fn(nu.len(), |i, _| nu[i] / pi[i]);
        Ok(Self {
            nu,
            pi: pi.clone(),
            density,
            p,
        })
    }

    /// Stationary start: `nu = pi`, density identically one.
    pub fn stationary(pi: &DVector<f64>, p: NormOrder) -> Self {
        Self {
            nu: pi.clone(),
            pi: pi.clone(),
            density: DVector::from_element(pi.len(), 1.0),
            p,
        }
    }

    pub fn nu(&self) -> &DVector<f64> {
        &self.nu
    }

    pub fn pi(&self) -> &DVector<f64> {
        &self.pi
    }

    /// The density `d nu / d pi`, elementwise `nu_i / pi_i`.
    pub fn density(&self) -> &DVector<f64> {
        &self.density
    }

    pub fn order(&self) -> NormOrder {
        self.p
    }
}

fn validate_kernel(p: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (rows, cols) = p.shape();
    if rows == 0 || rows != cols {
        return Err(Error::Invalid(format!("kernel must be square, got {rows}x{cols}")));
    }
    for i in 0..rows {
        let mut sum = 0.0;
        for j in 0..cols {
            let v = p[(i, j)];
            if !v.is_finite() || !(-ROW_SUM_TOL..=1.0 + ROW_SUM_TOL).contains(&v) {
                return Err(Error::NotStochastic(format!(
                    "entry ({i}, {j}) = {v} outside [0, 1]"
                )));
            }
            sum += v;
        }
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::NotStochastic(format!("row {i} sums to {sum}")));
        }
    }
    // Renormalize so downstream arithmetic sees rows summing to 1 within
    // machine precision, with tiny negative roundoff clamped away.
    let mut p = p;
    for i in 0..rows {
        let mut sum = 0.0;
        for j in 0..cols {
            p[(i, j)] = p[(i, j)].max(0.0);
            sum += p[(i, j)];
        }
        for j in 0..cols {
            p[(i, j)] /= sum;
        }
    }
    Ok(p)
}

fn invariance_residual(p: &DMatrix<f64>, pi: &DVector<f64>) -> f64 {
    let image = p.transpose() * pi;
    (image - pi).amax()
}

fn finish_with_pi(p: DMatrix<f64>, pi: DVector<f64>) -> Result<FiniteChain> {
    if pi.iter().any(|&x| x <= 1e-13) {
        return Err(Error::DegenerateStationary(
            "stationary distribution has a state of zero (or negative) mass".into(),
        ));
    }
    let residual = invariance_residual(&p, &pi);
    if residual > INVARIANCE_TOL {
        return Err(Error::Invalid(format!(
            "pi' P = pi' violated (residual {residual:.3e})"
        )));
    }
    Ok(FiniteChain { p, pi })
}

/// Power iteration on the lazy kernel `(P + I)/2`, which shares the
/// stationary distribution and is aperiodic.
fn power_iterate_lazy(p: &DMatrix<f64>) -> Result<DVector<f64>> {
    let d = p.nrows();
    let lazy = (p + DMatrix::<f64>::identity(d, d)) * 0.5;
    let mut v = DVector::from_element(d, 1.0 / d as f64);
    for _ in 0..1_000_000 {
        let next = lazy.transpose() * &v;
        let diff = (&next - &v).amax();
        v = next;
        let total: f64 = v.iter().sum();
        v /= total;
        if diff < 1e-14 {
            return Ok(v);
        }
    }
    Err(Error::DegenerateStationary(
        "power iteration did not converge".into(),
    ))
}

/// On-disk chain format: the kernel only; `pi` is always recomputed.
#[derive(Debug, Serialize, Deserialize)]
pub struct ChainFile {
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl ChainFile {
    pub fn to_chain(&self) -> Result<FiniteChain> {
        let rows = self.p.len();
        if rows == 0 {
            return Err(Error::Invalid("empty kernel".into()));
        }
        let cols = self.p[0].len();
        if self.p.iter().any(|r| r.len() != cols) {
            return Err(Error::Invalid("ragged kernel rows".into()));
        }
        let m = DMatrix::from_fn(rows, cols, |i, j| self.p[i][j]);
        FiniteChain::from_kernel(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn birth_death() -> FiniteChain {
        let p = DMatrix::from_row_slice(
            3,
            3,
            &[0.5, 0.5, 0.0, 0.25, 0.5, 0.25, 0.0, 0.5, 0.5],
        );
        FiniteChain::from_kernel(p).unwrap()
    }

    fn three_cycle() -> FiniteChain {
        let p = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
        FiniteChain::from_kernel(p).unwrap()
    }

    fn random_chain(rng: &mut ChaCha8Rng, d: usize) -> FiniteChain {
        let p = DMatrix::from_fn(d, d, |_, _| -(1.0 - rng.random::<f64>()).ln());
        FiniteChain::from_kernel(p).unwrap() // rows renormalized by the builder
    }

    #[test]
    fn single_state_chain() {
        let chain = FiniteChain::from_kernel(DMatrix::from_element(1, 1, 1.0)).unwrap();
        assert_eq!(chain.stationary().as_slice(), &[1.0]);
        assert_eq!(chain.absolute_lambda(), 0.0);
    }

    #[test]
    fn symmetric_two_state_stationary_is_uniform() {
        let p = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        let chain = FiniteChain::from_kernel(p).unwrap();
        assert_relative_eq!(chain.stationary()[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(chain.stationary()[1], 0.5, epsilon = 1e-12);
    }

    // Oracle: power-iterate P' from uniform until fixed point, then check
    // detailed balance of the result.
    #[test]
    fn birth_death_stationary_matches_power_iteration() {
        let chain = birth_death();
        let mut v = DVector::from_element(3, 1.0 / 3.0);
        for _ in 0..10_000 {
            v = chain.kernel().transpose() * v;
            let total: f64 = v.iter().sum();
            v /= total;
        }
        for i in 0..3 {
            assert_relative_eq!(chain.stationary()[i], v[i], epsilon = 1e-12);
        }
        let expected = [0.25, 0.5, 0.25];
        for i in 0..3 {
            assert_relative_eq!(chain.stationary()[i], expected[i], epsilon = 1e-12);
        }
        // Detailed balance: pi_i P_ij = pi_j P_ji.
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(
                    chain.stationary()[i] * chain.kernel()[(i, j)],
                    chain.stationary()[j] * chain.kernel()[(j, i)],
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn reducible_kernel_rejected() {
        let p = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert!(matches!(
            FiniteChain::from_kernel(p),
            Err(Error::DegenerateStationary(_))
        ));
    }

    #[test]
    fn absorbing_state_rejected() {
        let p = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.5, 0.5]);
        assert!(matches!(
            FiniteChain::from_kernel(p),
            Err(Error::DegenerateStationary(_))
        ));
    }

    #[test]
    fn off_row_sum_rejected() {
        let p = DMatrix::from_row_slice(2, 2, &[0.6, 0.5, 0.5, 0.5]);
        assert!(matches!(
            FiniteChain::from_kernel(p),
            Err(Error::NotStochastic(_))
        ));
    }

    #[test]
    fn reversal_of_symmetric_chain_is_itself() {
        let p = DMatrix::from_row_slice(2, 2, &[0.3, 0.7, 0.7, 0.3]);
        let chain = FiniteChain::from_kernel(p.clone()).unwrap();
        let rev = chain.time_reversal();
        assert_relative_eq!((rev - p).amax(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn reversal_of_cycle_is_opposite_rotation() {
        let chain = three_cycle();
        let rev = chain.time_reversal();
        let expected =
            DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_relative_eq!((rev - expected).amax(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn reversal_satisfies_balance_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let chain = random_chain(&mut rng, 3);
            let rev = chain.time_reversal();
            let pi = chain.stationary();
            // diag(pi) P = (diag(pi) P*)' elementwise.
            for i in 0..3 {
                for j in 0..3 {
                    assert_relative_eq!(
                        pi[i] * chain.kernel()[(i, j)],
                        pi[j] * rev[(j, i)],
                        epsilon = 1e-12
                    );
                }
            }
            // P* is row-stochastic and pi-invariant.
            for i in 0..3 {
                assert_relative_eq!(rev.row(i).sum(), 1.0, epsilon = 1e-12);
            }
            assert!(invariance_residual(&rev, pi) < 1e-12);
        }
    }

    #[test]
    fn reversiblization_is_weighted_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let chain = random_chain(&mut rng, 4);
            let r = chain.additive_reversiblization();
            let pi = chain.stationary();
            for i in 0..4 {
                for j in 0..4 {
                    assert_relative_eq!(pi[i] * r[(i, j)], pi[j] * r[(j, i)], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn reversiblization_of_reversible_chain_is_p() {
        let chain = birth_death();
        let r = chain.additive_reversiblization();
        assert_relative_eq!((r - chain.kernel()).amax(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn cycle_reversiblization_is_symmetric_circulant() {
        let chain = three_cycle();
        let r = chain.additive_reversiblization();
        let expected = DMatrix::from_row_slice(3, 3, &[0.0, 0.5, 0.5, 0.5, 0.0, 0.5, 0.5, 0.5, 0.0]);
        assert_relative_eq!((r - expected).amax(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn mixture_kernel_rows() {
        let chain = leon_perron_kernel(&[0.25, 0.5, 0.25], 0.0).unwrap();
        for i in 0..3 {
            assert_relative_eq!(chain.kernel()[(i, 0)], 0.25, epsilon = 1e-15);
            assert_relative_eq!(chain.kernel()[(i, 1)], 0.5, epsilon = 1e-15);
        }
        let identity = leon_perron_kernel(&[0.25, 0.5, 0.25], 1.0).unwrap();
        assert_relative_eq!(
            (identity.kernel() - DMatrix::<f64>::identity(3, 3)).amax(),
            0.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(identity.absolute_lambda(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn mixture_kernel_lambda_equals_coefficient() {
        let pi = [0.25, 0.5, 0.25];
        for i in 0..10 {
            let c = i as f64 / 10.0;
            let chain = leon_perron_kernel(&pi, c).unwrap();
            assert!((chain.absolute_lambda() - c).abs() < 1e-12);
            assert!((chain.right_lambda() - c).abs() < 1e-12 || c == 0.0 && chain.right_lambda().abs() < 1e-12);
        }
    }

    // Oracle: reversible chain, so lambda is the largest nontrivial
    // eigenvalue modulus; spectrum of the birth-death kernel is {1, 0.5, 0}.
    #[test]
    fn birth_death_lambda_is_half() {
        let chain = birth_death();
        assert_relative_eq!(chain.absolute_lambda(), 0.5, epsilon = 1e-10);
        assert_relative_eq!(chain.right_lambda(), 0.5, epsilon = 1e-10);
    }

    #[test]
    fn cycle_lambda_is_one() {
        // Nontrivial singular values of a permutation are all 1.
        let chain = three_cycle();
        assert_relative_eq!(chain.absolute_lambda(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn period_two_flip_has_right_lambda_minus_one() {
        let p = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let chain = FiniteChain::from_kernel(p).unwrap();
        assert_relative_eq!(chain.right_lambda(), -1.0, epsilon = 1e-12);
        assert_relative_eq!(chain.absolute_lambda(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn spectral_radius_constant_for_mixture_kernel() {
        let chain = leon_perron_kernel(&[0.2, 0.3, 0.5], 0.4).unwrap();
        let est = chain.spectral_radius_lambda(8).unwrap();
        for v in &est.sequence {
            assert_relative_eq!(*v, 0.4, epsilon = 1e-10);
        }
    }

    #[test]
    fn spectral_radius_equals_lambda_for_reversible() {
        let chain = birth_death();
        let est = chain.spectral_radius_lambda(30).unwrap();
        assert_relative_eq!(est.estimate, chain.absolute_lambda(), epsilon = 1e-6);
    }

    // Doubly stochastic kernel whose mean-zero part is rank one and
    // nilpotent: the norm sequence collapses to the true spectral radius 0
    // at k = 2, strictly below lambda = 1/sqrt(3).
    #[test]
    fn spectral_radius_decays_for_nilpotent_part() {
        let s = 1.0 / 6.0;
        let p = DMatrix::from_row_slice(
            3,
            3,
            &[
                1.0 / 3.0 + s,
                1.0 / 3.0 + s,
                1.0 / 3.0 - 2.0 * s,
                1.0 / 3.0 - s,
                1.0 / 3.0 - s,
                1.0 / 3.0 + 2.0 * s,
                1.0 / 3.0,
                1.0 / 3.0,
                1.0 / 3.0,
            ],
        );
        let chain = FiniteChain::from_kernel(p).unwrap();
        for i in 0..3 {
            assert_relative_eq!(chain.stationary()[i], 1.0 / 3.0, epsilon = 1e-10);
        }
        let lambda = chain.absolute_lambda();
        assert_relative_eq!(lambda, 1.0 / 3.0_f64.sqrt(), epsilon = 1e-10);
        let est = chain.spectral_radius_lambda(4).unwrap();
        assert_relative_eq!(est.sequence[0], lambda, epsilon = 1e-10);
        // Eigenvalue-modulus oracle: the mean-zero part is nilpotent, so the
        // true spectral radius is 0.
        for k in 1..4 {
            assert!(est.sequence[k] < 1e-7, "k={} -> {}", k + 1, est.sequence[k]);
        }
    }

    #[test]
    fn lambda_invariant_under_reversal_and_dominates() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let d = 2 + (rng.random::<u32>() % 5) as usize;
            let chain = random_chain(&mut rng, d);
            let lambda = chain.absolute_lambda();
            let rev = FiniteChain::with_stationary(
                chain.time_reversal(),
                chain.stationary().clone(),
            )
            .unwrap();
            assert!((lambda - rev.absolute_lambda()).abs() < 1e-10);
            assert!(chain.right_lambda() <= lambda + 1e-10);
            let r = FiniteChain::with_stationary(
                chain.additive_reversiblization(),
                chain.stationary().clone(),
            )
            .unwrap();
            assert!(r.absolute_lambda() <= lambda + 1e-10);
            // lambda_inf estimate never exceeds lambda.
            let est = chain.spectral_radius_lambda(6).unwrap();
            assert!(est.estimate <= lambda + 1e-8);
        }
    }

    #[test]
    fn alpha_values() {
        assert_eq!(alpha(0.0).unwrap(), 1.0);
        assert_relative_eq!(alpha(1.0 / 3.0).unwrap(), 2.0, epsilon = 1e-14);
        assert_relative_eq!(alpha(0.9).unwrap(), 19.0, epsilon = 1e-12);
        assert!(matches!(alpha(1.0), Err(Error::GapExhausted(_))));
        assert!(matches!(alpha(-0.2), Err(Error::Invalid(_))));
    }

    #[test]
    fn summary_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let chain = random_chain(&mut rng, 5);
            let s = chain.spectral_summary(10).unwrap();
            assert!(s.lambda_right <= s.lambda_abs + 1e-10);
            assert!(s.lambda_inf_estimate <= s.lambda_abs + 1e-8);
            if let Some(a) = s.alpha_abs {
                assert_relative_eq!(a, (1.0 + s.lambda_abs) / (1.0 - s.lambda_abs));
            }
        }
    }

    #[test]
    fn norm_order_parsing() {
        use std::str::FromStr;
        assert_eq!(NormOrder::from_str("inf").unwrap(), NormOrder::Infinity);
        assert_eq!(NormOrder::from_str("2").unwrap(), NormOrder::Finite(2.0));
        assert!(matches!(NormOrder::from_str("1"), Err(Error::InvalidP(_))));
        assert!(matches!(NormOrder::from_str("0.5"), Err(Error::InvalidP(_))));
        assert_eq!(NormOrder::Finite(2.0).conjugate(), 2.0);
        assert_eq!(NormOrder::Infinity.conjugate(), 1.0);
    }

    #[test]
    fn measure_pair_density() {
        let pi = DVector::from_element(4, 0.25);
        let mp = MeasurePair::new(&[1.0, 0.0, 0.0, 0.0], &pi, NormOrder::Infinity).unwrap();
        assert_eq!(mp.density().as_slice(), &[4.0, 0.0, 0.0, 0.0]);
        // density_i * pi_i = nu_i by construction
        for i in 0..4 {
            assert_eq!(mp.density()[i] * pi[i], mp.nu()[i]);
        }
    }
}
