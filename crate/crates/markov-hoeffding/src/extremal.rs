//! Eigenvalue machinery of the mixture operators behind the bounds.
//!
//! For a simple function taking values `beta_1 > ... > beta_k` with masses
//! `m_j` and a mixture kernel `c I + (1 - c) Pi`, the eigenvalues of the
//! tilted operator `E^{f/2} (cI + (1-c)Pi) E^{f/2}` are the solutions of the
//! secular equation
//!
//! ```text
//! F(r) = sum_j (1 - c) e^{beta_j} m_j / (r - c e^{beta_j}) = 1,
//! ```
//!
//! one root per interval `(c e^{beta_j}, c e^{beta_{j-1}})` (the top bracket
//! closes at `e^{beta_1}`), with the operator norm equal to the largest root.
//! `F` is strictly decreasing between consecutive poles, so bracketed
//! bisection is guaranteed; a couple of Newton steps polish the residual.
//!
//! The two-state system is the extremal comparison chain: a kernel
//! `lam I + (1 - lam) [mu'; mu']` on `{a, b}`, whose tilted largest
//! eigenvalue `theta(t)` obeys the closed quadratic
//!
//! ```text
//! theta^2 - (1 + lam) [(1-p) e^{ta} + p e^{tb}] theta + lam e^{t(a+b)} = 0,
//! p = (lam + (1 - lam) mu) / (1 + lam),
//! ```
//!
//! and is dominated by the sub-Gaussian envelope `theta_tilde(t)`. Any
//! mixture-kernel chain is dominated in convex order by its matched
//! two-state system; [`extremality_gap`] exhibits both sides exactly.

use nalgebra::DVector;
use serde::Serialize;

use crate::bounds::StepFunction;
use crate::chain::{alpha, FiniteChain};
use crate::error::{Error, Result};
use crate::sim;

/// A function with finitely many values `beta_1 > ... > beta_k`, each
/// carrying positive stationary mass; masses sum to one.
#[derive(Clone, Debug, Serialize)]
pub struct SimpleFunction {
    betas: Vec<f64>,
    masses: Vec<f64>,
}

impl SimpleFunction {
    pub fn new(betas: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if betas.is_empty() || betas.len() != masses.len() {
            return Err(Error::Invalid("betas/masses length mismatch".into()));
        }
        if betas.iter().any(|b| !b.is_finite()) {
            return Err(Error::Invalid("non-finite beta".into()));
        }
        if !betas.windows(2).all(|w| w[0] > w[1]) {
            return Err(Error::Invalid("betas must be strictly decreasing".into()));
        }
        if masses.iter().any(|&m| m <= 0.0) {
            return Err(Error::Invalid("masses must be positive".into()));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!("masses sum to {total}")));
        }
        let masses = masses.iter().map(|m| m / total).collect();
        Ok(Self { betas, masses })
    }

    /// Collapses per-state values under a stationary vector into atoms,
    /// merging values within 1e-12 of each other (their masses add).
    pub fn from_values(values: &[f64], pi: &DVector<f64>) -> Result<Self> {
        if values.len() != pi.len() || values.is_empty() {
            return Err(Error::Invalid("values/pi length mismatch".into()));
        }
        let mut pairs: Vec<(f64, f64)> = values
            .iter()
            .zip(pi.iter())
            .map(|(&v, &w)| (v, w))
            .collect();
        pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let mut betas: Vec<f64> = Vec::new();
        let mut masses: Vec<f64> = Vec::new();
        for (v, w) in pairs {
            match betas.last() {
                Some(&last) if (last - v).abs() <= 1e-12 => {
                    *masses.last_mut().unwrap() += w;
                }
                _ => {
                    betas.push(v);
                    masses.push(w);
                }
            }
        }
        Self::new(betas, masses)
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn k(&self) -> usize {
        self.betas.len()
    }

    /// `pi(e^f) = sum_j m_j e^{beta_j}`.
    pub fn exp_mean(&self) -> f64 {
        self.betas
            .iter()
            .zip(self.masses.iter())
            .map(|(b, m)| m * b.exp())
            .sum()
    }
}

/// `F(r) = sum_j (1 - c) e^{beta_j} m_j / (r - c e^{beta_j})`.
///
/// Errors with [`Error::PoleHit`] when `r` is within tolerance of a pole.
pub fn f_of_r(sf: &SimpleFunction, c: f64, r: f64) -> Result<f64> {
    check_coefficient(c)?;
    for b in sf.betas() {
        let pole = c * b.exp();
        if (r - pole).abs() <= 1e-14 * pole.max(1.0) {
            return Err(Error::PoleHit { r, pole });
        }
    }
    Ok(f_of_r_unchecked(sf, c, r))
}

fn f_of_r_unchecked(sf: &SimpleFunction, c: f64, r: f64) -> f64 {
    sf.betas()
        .iter()
        .zip(sf.masses().iter())
        .map(|(b, m)| (1.0 - c) * b.exp() * m / (r - c * b.exp()))
        .sum()
}

fn f_derivative(sf: &SimpleFunction, c: f64, r: f64) -> f64 {
    sf.betas()
        .iter()
        .zip(sf.masses().iter())
        .map(|(b, m)| {
            let den = r - c * b.exp();
            -(1.0 - c) * b.exp() * m / (den * den)
        })
        .sum()
}

fn check_coefficient(c: f64) -> Result<()> {
    if !(0.0..1.0).contains(&c) {
        return Err(Error::Invalid(format!("coefficient c = {c} outside [0, 1)")));
    }
    Ok(())
}

/// All solutions of `F(r) = 1`, descending: `r_j` strictly inside
/// `(c e^{beta_j}, c e^{beta_{j-1}})` with the top bracket reaching
/// `e^{beta_1}`.
///
/// At `c = 0` the operator is rank one and the single root is `pi(e^f)`.
pub fn leon_perron_eigenvalues(sf: &SimpleFunction, c: f64) -> Result<Vec<f64>> {
    check_coefficient(c)?;
    if c == 0.0 {
        return Ok(vec![sf.exp_mean()]);
    }
    let poles: Vec<f64> = sf.betas().iter().map(|b| c * b.exp()).collect();
    let mut roots = Vec::with_capacity(sf.k());
    for j in 0..sf.k() {
        let lo = poles[j];
        let hi = if j == 0 {
            sf.betas()[0].exp()
        } else {
            poles[j - 1]
        };
        roots.push(bracketed_root(sf, c, lo, hi, j == 0)?);
    }
    Ok(roots)
}

/// Operator norm of the tilted mixture operator: the largest root.
pub fn lp_operator_norm(sf: &SimpleFunction, c: f64) -> Result<f64> {
    Ok(leon_perron_eigenvalues(sf, c)?[0])
}

/// Bisection on `(lo, hi)` where `F - 1` changes sign from positive to
/// negative; `hi` is a pole except for the top bracket, whose right end
/// `e^{beta_1}` satisfies `F <= 1` and is expanded geometrically if the
/// evaluation disagrees.
fn bracketed_root(sf: &SimpleFunction, c: f64, lo: f64, hi: f64, top: bool) -> Result<f64> {
    let g = |r: f64| f_of_r_unchecked(sf, c, r) - 1.0;

    let mut delta_lo = 1e-13 * lo.max(1.0);
    let mut lo_eval = lo + delta_lo;
    for _ in 0..12 {
        if lo_eval < hi && g(lo_eval) > 0.0 {
            break;
        }
        delta_lo *= 0.125;
        lo_eval = lo + delta_lo;
    }
    if g(lo_eval) <= 0.0 {
        return Err(Error::BracketFailure(format!(
            "no positive value of F - 1 just right of the pole at {lo} \
             (underflow for extreme beta spans)"
        )));
    }

    let mut hi_eval;
    if top {
        hi_eval = hi;
        let mut expansions = 0;
        while g(hi_eval) > 0.0 {
            hi_eval *= 2.0;
            expansions += 1;
            if expansions > 64 {
                return Err(Error::BracketFailure(
                    "top bracket right end never saw F below 1".into(),
                ));
            }
        }
    } else {
        let mut delta_hi = 1e-13 * hi.max(1.0);
        hi_eval = hi - delta_hi;
        for _ in 0..12 {
            if hi_eval > lo_eval && g(hi_eval) < 0.0 {
                break;
            }
            delta_hi *= 0.125;
            hi_eval = hi - delta_hi;
        }
        if g(hi_eval) >= 0.0 {
            return Err(Error::BracketFailure(format!(
                "no negative value of F - 1 just left of the pole at {hi}"
            )));
        }
    }

    let (mut a, mut b) = (lo_eval, hi_eval);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let v = g(mid);
        if v > 0.0 {
            a = mid;
        } else if v < 0.0 {
            b = mid;
        } else {
            return Ok(mid);
        }
    }
    let mut root = 0.5 * (a + b);
    // Newton polish; F is smooth and strictly decreasing here.
    for _ in 0..2 {
        let gr = g(root);
        let dg = f_derivative(sf, c, root);
        if dg == 0.0 {
            break;
        }
        let next = root - gr / dg;
        if next.is_finite() && next > lo_eval && next < hi_eval {
            root = next;
        } else {
            break;
        }
    }
    Ok(root)
}

/// The extremal two-state system on `{a, b}`: kernel
/// `lam I + (1 - lam) [mu'; mu']` with `mu' = [1 - mu, mu]`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TwoStateSystem {
    pub lambda: f64,
    pub mu: f64,
    pub a: f64,
    pub b: f64,
}

impl TwoStateSystem {
    pub fn new(lambda: f64, mu: f64, a: f64, b: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&lambda) {
            return Err(Error::Invalid(format!("lambda = {lambda} outside [0, 1)")));
        }
        if !(0.0..1.0).contains(&mu) || mu == 0.0 {
            return Err(Error::Invalid(format!("mu = {mu} outside (0, 1)")));
        }
        if a >= b {
            return Err(Error::DegenerateRange(a));
        }
        Ok(Self { lambda, mu, a, b })
    }

    /// `p = (lam + (1 - lam) mu) / (1 + lam)`, always in `(0, 1)`.
    pub fn p(&self) -> f64 {
        (self.lambda + (1.0 - self.lambda) * self.mu) / (1.0 + self.lambda)
    }

    /// Stationary mean `(1 - mu) a + mu b`.
    pub fn mean(&self) -> f64 {
        (1.0 - self.mu) * self.a + self.mu * self.b
    }
}

/// Largest eigenvalue of the tilted two-state kernel: the larger root of
/// `theta^2 - (1+lam)[(1-p)e^{ta} + p e^{tb}] theta + lam e^{t(a+b)}`.
///
/// The discriminant is nonnegative in exact arithmetic (the matrix is
/// symmetrizable); roundoff at tangency is clamped at zero.
pub fn theta(ts: &TwoStateSystem, t: f64) -> f64 {
    let p = ts.p();
    let big_b = (1.0 + ts.lambda) * ((1.0 - p) * (t * ts.a).exp() + p * (t * ts.b).exp());
    let product = ts.lambda * (t * (ts.a + ts.b)).exp();
    let disc = big_b * big_b - 4.0 * product;
    debug_assert!(disc >= -1e-12 * (big_b * big_b).max(1.0), "disc = {disc}");
    (big_b + disc.max(0.0).sqrt()) / 2.0
}

/// Sub-Gaussian envelope
/// `exp(t mean + t^2/2 * alpha(lam) * (b - a)^2 / 4)`; dominates
/// [`theta`] for every `t`.
pub fn theta_tilde(ts: &TwoStateSystem, t: f64) -> f64 {
    let a = alpha(ts.lambda).expect("lambda < 1 by construction");
    let w = ts.b - ts.a;
    (t * ts.mean() + t * t / 2.0 * a * w * w / 4.0).exp()
}

/// The explicit 2x2 chain of the system; stationary distribution
/// `(1 - mu, mu)`, and its absolute lambda equals `lambda` (the kernel is
/// its own mixture version).
pub fn two_state_matrix(ts: &TwoStateSystem) -> FiniteChain {
    let (l, m) = (ts.lambda, ts.mu);
    let p = nalgebra::DMatrix::from_row_slice(
        2,
        2,
        &[
            l + (1.0 - l) * (1.0 - m),
            (1.0 - l) * m,
            (1.0 - l) * (1.0 - m),
            l + (1.0 - l) * m,
        ],
    );
    FiniteChain::with_stationary(p, DVector::from_vec(vec![1.0 - m, m]))
        .expect("two-state kernel is valid by construction")
}

/// Exact mgf of `sum_{i=1}^n f(X_i)` under a mixture kernel (left side),
/// against the exact mgf of the matched two-state system with
/// `mu = (pi(f) - a) / (b - a)` (right side). The left never exceeds the
/// right.
///
/// A degenerate declared range (`a = b`) makes the comparison trivial; both
/// sides are returned equal.
pub fn extremality_gap(
    chain: &FiniteChain,
    f: &StepFunction,
    n: usize,
    t: f64,
) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::Invalid("need at least one step".into()));
    }
    if f.len() != chain.d() {
        return Err(Error::Invalid("function length mismatch".into()));
    }
    let c = mixture_coefficient(chain)?;
    if c >= 1.0 - crate::chain::GAP_EPS {
        return Err(Error::GapExhausted(format!("coefficient c = {c}")));
    }
    let (a, b) = f.range();
    if a == b {
        let v = (t * n as f64 * a).exp();
        return Ok((v, v));
    }

    let fs = vec![f.clone(); n];
    let lhs = sim::exact_log_mgf(chain, chain.stationary().as_slice(), &fs, t)?.exp();

    let mu = (f.mean_under(chain.stationary()) - a) / (b - a);
    let rhs = if mu <= 0.0 {
        // f is a.s. equal to a
        (t * n as f64 * a).exp()
    } else if mu >= 1.0 {
        (t * n as f64 * b).exp()
    } else {
        let ts = TwoStateSystem::new(c, mu, a, b)?;
        let two = two_state_matrix(&ts);
        let y = StepFunction::new(vec![a, b], a, b)?;
        let ys = vec![y; n];
        sim::exact_log_mgf(&two, two.stationary().as_slice(), &ys, t)?.exp()
    };
    Ok((lhs, rhs))
}

/// Recovers `c` from a kernel known to be `c I + (1 - c) Pi`, verifying the
/// shape entrywise.
fn mixture_coefficient(chain: &FiniteChain) -> Result<f64> {
    let d = chain.d();
    if d == 1 {
        return Ok(0.0);
    }
    let pi = chain.stationary();
    let p = chain.kernel();
    let c = ((p[(0, 0)] - pi[0]) / (1.0 - pi[0])).clamp(0.0, 1.0);
    for i in 0..d {
        for j in 0..d {
            let expected = if i == j { c + (1.0 - c) * pi[j] } else { (1.0 - c) * pi[j] };
            if (p[(i, j)] - expected).abs() > 1e-10 {
                return Err(Error::Invalid(
                    "chain is not a mixture of the identity and the stationary projection".into(),
                ));
            }
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::leon_perron_kernel;
    use crate::operator;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_simple(rng: &mut ChaCha8Rng, k: usize) -> SimpleFunction {
        let mut betas: Vec<f64> = (0..k).map(|_| rng.random_range(-2.0..2.0)).collect();
        betas.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for i in 1..k {
            // keep atoms separated
            betas[i] = betas[i].min(betas[i - 1] - 0.1);
        }
        let mut masses: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = masses.iter().sum();
        for m in &mut masses {
            *m /= total;
        }
        SimpleFunction::new(betas, masses).unwrap()
    }

    /// Dense route: the tilted operator on the atom space is the k x k
    /// matrix `diag(e^{beta/2}) (c I + (1-c) 1 m') diag(e^{beta/2})`, and
    /// its eigenvalues in the mass-weighted space are the secular roots.
    fn dense_eigenvalues(sf: &SimpleFunction, c: f64) -> Vec<f64> {
        let k = sf.k();
        let pi = DVector::from_column_slice(sf.masses());
        let m = DMatrix::from_fn(k, k, |i, j| {
            let kernel = if i == j { c + (1.0 - c) * sf.masses()[j] } else { (1.0 - c) * sf.masses()[j] };
            (sf.betas()[i] / 2.0).exp() * kernel * (sf.betas()[j] / 2.0).exp()
        });
        let sym = operator::similarity(&m, &pi);
        let sym = (&sym + sym.transpose()) * 0.5;
        operator::symmetric_eigenvalues(&sym)
    }

    #[test]
    fn f_collapses_at_zero_coefficient() {
        let sf = SimpleFunction::new(vec![1.0, 0.0], vec![0.5, 0.5]).unwrap();
        let r = 2.0;
        assert_relative_eq!(
            f_of_r(&sf, 0.0, r).unwrap(),
            sf.exp_mean() / r,
            epsilon = 1e-14
        );
    }

    #[test]
    fn f_equals_one_at_exp_beta_for_constant() {
        let sf = SimpleFunction::new(vec![0.7], vec![1.0]).unwrap();
        assert_relative_eq!(f_of_r(&sf, 0.5, 0.7_f64.exp()).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn f_worked_arithmetic() {
        // Direct arithmetic oracle: (1-c) e^1 * 0.5 / (2 - 0.5 e) + 0.5 * 1 * 0.5 / 1.5
        let sf = SimpleFunction::new(vec![1.0, 0.0], vec![0.5, 0.5]).unwrap();
        let e = std::f64::consts::E;
        let expected = 0.25 * e / (2.0 - 0.5 * e) + 0.25 / 1.5;
        let got = f_of_r(&sf, 0.5, 2.0).unwrap();
        assert_relative_eq!(got, expected, epsilon = 1e-14);
        assert_relative_eq!(got, 1.2270721, epsilon = 1e-6);
    }

    #[test]
    fn f_pole_guard() {
        let sf = SimpleFunction::new(vec![0.0], vec![1.0]).unwrap();
        assert!(matches!(
            f_of_r(&sf, 0.5, 0.5),
            Err(Error::PoleHit { .. })
        ));
    }

    #[test]
    fn constant_function_root_is_exp_beta() {
        let sf = SimpleFunction::new(vec![0.9], vec![1.0]).unwrap();
        let roots = leon_perron_eigenvalues(&sf, 0.4).unwrap();
        assert_eq!(roots.len(), 1);
        assert_relative_eq!(roots[0], 0.9_f64.exp(), epsilon = 1e-12);
    }

    #[test]
    fn zero_coefficient_root_is_exp_mean() {
        let sf = SimpleFunction::new(vec![1.0, -1.0], vec![0.3, 0.7]).unwrap();
        let roots = leon_perron_eigenvalues(&sf, 0.0).unwrap();
        assert_eq!(roots, vec![sf.exp_mean()]);
        // c = 0 with pi(e^f) = 2: norm is 2 exactly
        let beta = 2.0_f64.ln();
        let sf2 = SimpleFunction::new(vec![beta], vec![1.0]).unwrap();
        assert_relative_eq!(lp_operator_norm(&sf2, 0.0).unwrap(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn markov_operator_norm_on_constants_is_one() {
        let sf = SimpleFunction::new(vec![0.0], vec![1.0]).unwrap();
        for c in [0.0, 0.3, 0.8] {
            assert_relative_eq!(lp_operator_norm(&sf, c).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn roots_match_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let k = rng.random_range(1..=4);
            let sf = random_simple(&mut rng, k);
            let c = rng.random_range(0.05..0.95);
            let roots = leon_perron_eigenvalues(&sf, c).unwrap();
            let dense = dense_eigenvalues(&sf, c);
            assert_eq!(roots.len(), dense.len());
            for (r, d) in roots.iter().zip(dense.iter()) {
                assert_relative_eq!(r, d, epsilon = 1e-8, max_relative = 1e-8);
            }
            // residual and bracket contracts
            let poles: Vec<f64> = sf.betas().iter().map(|b| c * b.exp()).collect();
            for (j, r) in roots.iter().enumerate() {
                assert!((f_of_r(&sf, c, *r).unwrap() - 1.0).abs() < 1e-10);
                assert!(*r > poles[j]);
                if j > 0 {
                    assert!(*r < poles[j - 1]);
                } else {
                    assert!(*r <= sf.betas()[0].exp() + 1e-12);
                }
            }
        }
    }

    #[test]
    fn theta_trivial_points() {
        let ts = TwoStateSystem::new(0.5, 0.5, 0.0, 1.0).unwrap();
        assert_relative_eq!(theta(&ts, 0.0), 1.0, epsilon = 1e-14);

        // lam = 0: two-point mgf
        let ts0 = TwoStateSystem::new(0.0, 0.3, -1.0, 2.0).unwrap();
        let t = 0.8;
        let expected = 0.7 * (-0.8_f64).exp() + 0.3 * (1.6_f64).exp();
        assert_relative_eq!(theta(&ts0, t), expected, epsilon = 1e-13);
    }

    #[test]
    fn theta_matches_dense_two_by_two() {
        let ts = TwoStateSystem::new(0.5, 0.5, 0.0, 1.0).unwrap();
        let t = 1.0;
        let chain = two_state_matrix(&ts);
        let tilt = DMatrix::from_fn(2, 2, |i, j| {
            let y = [ts.a, ts.b];
            (t * y[i] / 2.0).exp() * chain.kernel()[(i, j)] * (t * y[j] / 2.0).exp()
        });
        let top = operator::self_adjoint_top_eigenvalue(&tilt, chain.stationary());
        assert_relative_eq!(theta(&ts, t), top, epsilon = 1e-12, max_relative = 1e-12);
    }

    #[test]
    fn theta_tilde_classical_point() {
        // lam = 0, mu = 1/2, a = -1, b = 1, t = 1 -> exp(1/2)
        let ts = TwoStateSystem::new(0.0, 0.5, -1.0, 1.0).unwrap();
        assert_relative_eq!(theta_tilde(&ts, 1.0), 0.5_f64.exp(), epsilon = 1e-14);
        assert_relative_eq!(theta_tilde(&ts, 0.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn theta_dominated_by_envelope_on_grid() {
        for li in 0..10 {
            let lam = li as f64 / 10.0;
            for mi in 1..10 {
                let mu = mi as f64 / 10.0;
                let ts = TwoStateSystem::new(lam, mu, 0.0, 1.0).unwrap();
                let mut t = -5.0;
                while t <= 5.0 {
                    let th = theta(&ts, t);
                    assert!(th <= theta_tilde(&ts, t) * (1.0 + 1e-12));
                    // proof-side inequality: theta^2 >= lam e^{t(a+b)}
                    assert!(th * th >= ts.lambda * (t * (ts.a + ts.b)).exp() - 1e-12);
                    t += 0.25;
                }
            }
        }
    }

    #[test]
    fn two_state_matrix_entries() {
        let ts = TwoStateSystem::new(0.0, 0.4, 0.0, 1.0).unwrap();
        let chain = two_state_matrix(&ts);
        for i in 0..2 {
            assert_relative_eq!(chain.kernel()[(i, 0)], 0.6, epsilon = 1e-15);
            assert_relative_eq!(chain.kernel()[(i, 1)], 0.4, epsilon = 1e-15);
        }

        let ts = TwoStateSystem::new(0.5, 0.5, 0.0, 1.0).unwrap();
        let chain = two_state_matrix(&ts);
        let expected = DMatrix::from_row_slice(2, 2, &[0.75, 0.25, 0.25, 0.75]);
        assert_relative_eq!((chain.kernel() - expected).amax(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn two_state_matrix_is_own_mixture_version() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let ts = TwoStateSystem::new(
                rng.random_range(0.0..0.95),
                rng.random_range(0.05..0.95),
                0.0,
                1.0,
            )
            .unwrap();
            let chain = two_state_matrix(&ts);
            assert_relative_eq!(chain.absolute_lambda(), ts.lambda, epsilon = 1e-12);
        }
    }

    #[test]
    fn two_state_validation() {
        assert!(matches!(
            TwoStateSystem::new(0.5, 0.5, 1.0, 1.0),
            Err(Error::DegenerateRange(_))
        ));
        assert!(TwoStateSystem::new(1.0, 0.5, 0.0, 1.0).is_err());
        assert!(TwoStateSystem::new(0.5, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn extremality_constant_function() {
        let chain = leon_perron_kernel(&[0.3, 0.7], 0.4).unwrap();
        let f = StepFunction::constant(2, 1.5);
        let (lhs, rhs) = extremality_gap(&chain, &f, 4, 0.6).unwrap();
        let expected = (0.6 * 4.0 * 1.5_f64).exp();
        assert_relative_eq!(lhs, expected, epsilon = 1e-12);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn extremality_two_valued_function_is_tight() {
        // f already two-valued at {a, b}: the pushforwards coincide.
        let chain = leon_perron_kernel(&[0.25, 0.25, 0.5], 0.3).unwrap();
        let f = StepFunction::new(vec![0.0, 1.0, 1.0], 0.0, 1.0).unwrap();
        let (lhs, rhs) = extremality_gap(&chain, &f, 5, 0.9).unwrap();
        assert_relative_eq!(lhs, rhs, epsilon = 1e-12, max_relative = 1e-12);
    }

    #[test]
    fn extremality_holds_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..40 {
            let d = 5;
            let mut pi: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..1.0)).collect();
            let total: f64 = pi.iter().sum();
            pi.iter_mut().for_each(|x| *x /= total);
            let chain = leon_perron_kernel(&pi, 0.4).unwrap();
            let values: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let f = StepFunction::from_values(values).unwrap();
            let (lhs, rhs) = extremality_gap(&chain, &f, 6, 0.7).unwrap();
            assert!(lhs <= rhs * (1.0 + 1e-10), "lhs {lhs} rhs {rhs}");
        }
    }

    #[test]
    fn extremality_rejects_general_kernels() {
        let p = DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.4, 0.6]);
        let chain = FiniteChain::from_kernel(p).unwrap();
        let f = StepFunction::from_values(vec![0.0, 1.0]).unwrap();
        assert!(extremality_gap(&chain, &f, 3, 1.0).is_err());
    }

    #[test]
    fn simple_function_merges_close_values() {
        let pi = DVector::from_vec(vec![0.25, 0.25, 0.25, 0.25]);
        let sf = SimpleFunction::from_values(&[1.0, 1.0 + 1e-15, 0.0, -1.0], &pi).unwrap();
        assert_eq!(sf.k(), 3);
        assert_relative_eq!(sf.masses()[0], 0.5, epsilon = 1e-14);
    }
}
