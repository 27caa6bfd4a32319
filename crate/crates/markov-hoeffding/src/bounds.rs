//! Hoeffding-type bound evaluators.
//!
//! Every bound here controls the moment generating function of a centered
//! sum `S = sum_i f_i(X_i) - sum_i pi(f_i)` by `prefactor * exp(t^2 * proxy / 2)`
//! for a variance proxy built from per-step ranges `[a_i, b_i]` and a
//! spectral quantity of the chain:
//!
//! * classical          — `proxy = sum (b_i - a_i)^2 / 4` (independent case)
//! * stationary         — `alpha(lambda) * sum (b_i - a_i)^2 / 4`
//! * time-independent   — `alpha(lambda_r v 0) * n (b - a)^2 / 4`
//! * non-stationary     — Hoelder correction `q * alpha(lambda)` with
//!   prefactor `||d nu / d pi||_{pi,p}`
//! * burn-in (MCMC)     — prefactor `C_p(nu, n0)` decaying to 1 in the
//!   burn-in length
//! * grouped            — `k alpha(lambda_k^k) * k max_j sum_{i in I_j} ...`
//!   for chains where only `|||P^k - Pi|||^(1/k) < 1`
//! * time-inhomogeneous — per-step gaps, telescoped
//!
//! Tails follow by the Chernoff route as `2 * prefactor * exp(-eps^2 / (2 proxy))`;
//! they are reported raw (never clamped at 1) with a vacuous flag. Large
//! exponents are handled in log space; reports carry the log of the mgf
//! bound alongside.
//!
//! Lambdas are inputs, not recomputed, so bounds can be evaluated for
//! hypothetical gaps; the CLI wires them from the chain module by default.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::chain::{alpha, MeasurePair, NormOrder};
use crate::error::{Error, Result};

/// A function on states with a declared range `[a, b]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    values: Vec<f64>,
    a: f64,
    b: f64,
}

impl StepFunction {
    /// Validates that the declared range contains all values.
    pub fn new(values: Vec<f64>, a: f64, b: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Invalid("empty step function".into()));
        }
        if values.iter().any(|v| !v.is_finite()) || !a.is_finite() || !b.is_finite() {
            return Err(Error::Invalid("non-finite function values or range".into()));
        }
        if a > b {
            return Err(Error::Invalid(format!("range [{a}, {b}] is inverted")));
        }
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if a > lo + 1e-15 || b < hi - 1e-15 {
            return Err(Error::Invalid(format!(
                "declared range [{a}, {b}] does not contain values in [{lo}, {hi}]"
            )));
        }
        Ok(Self { values, a, b })
    }

    /// Tight range: `a = min(values)`, `b = max(values)`.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Invalid("empty step function".into()));
        }
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Self::new(values, lo, hi)
    }

    pub fn constant(d: usize, v: f64) -> Self {
        Self {
            values: vec![v; d],
            a: v,
            b: v,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn range(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    /// Mean under a probability vector.
    pub fn mean_under(&self, pi: &DVector<f64>) -> f64 {
        self.values
            .iter()
            .zip(pi.iter())
            .map(|(v, w)| v * w)
            .sum()
    }

    /// Shifted copy `f - c` with the range shifted alongside.
    pub fn shifted(&self, c: f64) -> StepFunction {
        StepFunction {
            values: self.values.iter().map(|v| v - c).collect(),
            a: self.a - c,
            b: self.b - c,
        }
    }
}

/// On-disk function format; range defaults to the tight hull of the values.
#[derive(Debug, Serialize, Deserialize)]
pub struct FunctionFile {
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

impl FunctionFile {
    pub fn to_step_function(&self) -> Result<StepFunction> {
        match (self.a, self.b) {
            (Some(a), Some(b)) => StepFunction::new(self.values.clone(), a, b),
            (None, None) => StepFunction::from_values(self.values.clone()),
            _ => Err(Error::Invalid(
                "function file must declare both range ends or neither".into(),
            )),
        }
    }
}

/// Which theorem produced a [`BoundReport`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TheoremId {
    Classical,
    T21,
    T22,
    T23,
    T62,
    Ta1,
    Inhomog,
}

/// A bound evaluation with all inputs echoed for audit.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub theorem: TheoremId,
    pub variance_proxy: f64,
    pub prefactor: f64,
    pub t: Option<f64>,
    pub eps: Option<f64>,
    /// `ln(prefactor) + t^2 * proxy / 2`; finite even when the linear-scale
    /// bound overflows.
    pub log_mgf_bound: Option<f64>,
    pub mgf_bound_at_t: Option<f64>,
    pub tail_bound_at_eps: Option<f64>,
    /// Tail bounds above 1 are reported raw; this flags them.
    pub tail_vacuous: bool,
    pub inputs: serde_json::Value,
}

/// Which vector the density norm is taken of.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityShift {
    /// `||d nu / d pi||_{pi,p}`
    Raw,
    /// `||d nu / d pi - 1||_{pi,p}`
    MinusOne,
}

/// Weighted p-norm of the density (or the density minus one).
pub fn density_pnorm(mp: &MeasurePair, shift: DensityShift) -> f64 {
    let g = |i: usize| {
        let v = mp.density()[i];
        match shift {
            DensityShift::Raw => v,
            DensityShift::MinusOne => v - 1.0,
        }
    };
    let d = mp.density().len();
    match mp.order() {
        NormOrder::Infinity => (0..d).map(|i| g(i).abs()).fold(0.0, f64::max),
        NormOrder::Finite(p) => {
            let sum: f64 = (0..d).map(|i| mp.pi()[i] * g(i).abs().powf(p)).sum();
            sum.powf(1.0 / p)
        }
    }
}

fn sum_quarter_widths(ranges: &[(f64, f64)]) -> Result<f64> {
    if ranges.is_empty() {
        return Err(Error::Invalid("empty range list".into()));
    }
    let mut sum = 0.0;
    for &(a, b) in ranges {
        if !a.is_finite() || !b.is_finite() || a > b {
            return Err(Error::Invalid(format!("bad range ({a}, {b})")));
        }
        let w = b - a;
        sum += w * w / 4.0;
    }
    Ok(sum)
}

fn log_mgf_bound(prefactor: f64, proxy: f64, t: f64) -> f64 {
    prefactor.ln() + t * t * proxy / 2.0
}

/// `2 * prefactor * exp(-eps^2 / (2 proxy))` and its vacuousness flag.
///
/// A zero proxy is the degenerate (almost-surely constant) case: the tail is
/// 0 for `eps > 0` and indeterminate at `eps = 0`.
fn tail_bound(prefactor: f64, proxy: f64, eps: f64) -> Result<(f64, bool)> {
    if eps < 0.0 || !eps.is_finite() {
        return Err(Error::Invalid(format!("eps = {eps} must be nonnegative")));
    }
    let value = if proxy == 0.0 {
        if eps > 0.0 {
            0.0
        } else {
            return Err(Error::ZeroProxy);
        }
    } else {
        2.0 * prefactor * (-eps * eps / (2.0 * proxy)).exp()
    };
    Ok((value, value > 1.0))
}

fn assemble(
    theorem: TheoremId,
    proxy: f64,
    prefactor: f64,
    t: f64,
    eps: Option<f64>,
    eps_effective: Option<f64>,
    inputs: serde_json::Value,
) -> Result<BoundReport> {
    let log_mgf = log_mgf_bound(prefactor, proxy, t);
    let (tail, vacuous) = match eps_effective.or(eps) {
        Some(e) => {
            let (v, flag) = tail_bound(prefactor, proxy, e)?;
            (Some(v), flag)
        }
        None => (None, false),
    };
    Ok(BoundReport {
        theorem,
        variance_proxy: proxy,
        prefactor,
        t: Some(t),
        eps,
        log_mgf_bound: Some(log_mgf),
        mgf_bound_at_t: Some(log_mgf.exp()),
        tail_bound_at_eps: tail,
        tail_vacuous: vacuous,
        inputs,
    })
}

/// Independent case: `proxy = sum (b_i - a_i)^2 / 4`.
pub fn classical_hoeffding(ranges: &[(f64, f64)], t: f64, eps: f64) -> Result<BoundReport> {
    let proxy = sum_quarter_widths(ranges)?;
    assemble(
        TheoremId::Classical,
        proxy,
        1.0,
        t,
        Some(eps),
        None,
        serde_json::json!({ "ranges": ranges, "t": t, "eps": eps }),
    )
}

/// Stationary chain, time-dependent functions:
/// `proxy = alpha(lam) * sum (b_i - a_i)^2 / 4`.
pub fn bound_t21(lam: f64, ranges: &[(f64, f64)], t: f64, eps: f64) -> Result<BoundReport> {
    let proxy = alpha(lam)? * sum_quarter_widths(ranges)?;
    assemble(
        TheoremId::T21,
        proxy,
        1.0,
        t,
        Some(eps),
        None,
        serde_json::json!({ "lam": lam, "ranges": ranges, "t": t, "eps": eps }),
    )
}

/// Stationary chain, one function repeated `n` times:
/// `proxy = alpha(lam_r v 0) * n (b - a)^2 / 4`.
///
/// Negative `lam_r` is clamped to zero before the penalty.
pub fn bound_t22(lam_r: f64, range: (f64, f64), n: usize, t: f64, eps: f64) -> Result<BoundReport> {
    if lam_r >= 1.0 - crate::chain::GAP_EPS {
        return Err(Error::GapExhausted(format!("lam_r = {lam_r}")));
    }
    if !(-1.0..1.0).contains(&lam_r) {
        return Err(Error::Invalid(format!("lam_r = {lam_r} outside [-1, 1)")));
    }
    let proxy = alpha(lam_r.max(0.0))? * ((n as f64) * sum_quarter_widths(&[range])?);
    assemble(
        TheoremId::T22,
        proxy,
        1.0,
        t,
        Some(eps),
        None,
        serde_json::json!({ "lam_r": lam_r, "range": range, "n": n, "t": t, "eps": eps }),
    )
}

/// Non-stationary start: prefactor `||d nu / d pi||_{pi,p}` and proxy
/// inflated by the Hoelder conjugate `q = p/(p-1)`.
pub fn bound_t23(
    lam: f64,
    mp: &MeasurePair,
    ranges: &[(f64, f64)],
    t: f64,
    eps: f64,
) -> Result<BoundReport> {
    let q = mp.order().conjugate();
    let prefactor = density_pnorm(mp, DensityShift::Raw);
    let proxy = q * (alpha(lam)? * sum_quarter_widths(ranges)?);
    assemble(
        TheoremId::T23,
        proxy,
        prefactor,
        t,
        Some(eps),
        None,
        serde_json::json!({
            "lam": lam, "p": mp.order().to_string(), "q": q,
            "ranges": ranges, "t": t, "eps": eps
        }),
    )
}

/// Burn-in prefactor `C_p(nu, n0)`, by the norm-order case split.
///
/// Equals 1 exactly when `nu = pi` and `p < infinity`; at `p = infinity` it
/// is the essential sup of the density, independent of `n0`.
pub fn c_p_prefactor(lam: f64, mp: &MeasurePair, n0: usize) -> Result<f64> {
    if lam >= 1.0 {
        return Err(Error::GapExhausted(format!("lam = {lam}")));
    }
    if lam < 0.0 {
        return Err(Error::Invalid(format!("lam = {lam} negative")));
    }
    let n0 = n0 as f64;
    Ok(match mp.order() {
        NormOrder::Infinity => density_pnorm(mp, DensityShift::Raw),
        NormOrder::Finite(p) => {
            let q = mp.order().conjugate();
            let dev = density_pnorm(mp, DensityShift::MinusOne);
            if p < 2.0 {
                1.0 + 2.0_f64.powf(2.0 / p) * lam.powf(2.0 * n0 / q) * dev
            } else if p == 2.0 {
                1.0 + lam.powf(n0) * dev
            } else {
                1.0 + 2.0_f64.powf(2.0 / q) * lam.powf(2.0 * n0 / p) * dev
            }
        }
    })
}

/// MCMC estimate after a burn-in of `n0` steps: prefactor `C_p(nu, n0)`,
/// proxy `q * alpha(lambda_r v 0) * n (b - a)^2 / 4`.
///
/// `eps` here measures the deviation of the empirical *average*
/// `(1/n) sum f(X_i)` from `pi(f)`, matching the planning use; the tail is
/// evaluated at the sum-scale deviation `n * eps`.
#[allow(clippy::too_many_arguments)]
pub fn bound_t62(
    lam: f64,
    lam_r: f64,
    mp: &MeasurePair,
    n0: usize,
    range: (f64, f64),
    n: usize,
    t: f64,
    eps: f64,
) -> Result<BoundReport> {
    if lam_r >= 1.0 - crate::chain::GAP_EPS {
        return Err(Error::GapExhausted(format!("lam_r = {lam_r}")));
    }
    let q = mp.order().conjugate();
    let prefactor = c_p_prefactor(lam, mp, n0)?;
    let proxy = q * (alpha(lam_r.max(0.0))? * ((n as f64) * sum_quarter_widths(&[range])?));
    let eps_sum = (n as f64) * eps;
    assemble(
        TheoremId::T62,
        proxy,
        prefactor,
        t,
        Some(eps),
        Some(eps_sum),
        serde_json::json!({
            "lam": lam, "lam_r": lam_r, "p": mp.order().to_string(), "q": q,
            "n0": n0, "range": range, "n": n, "t": t, "eps": eps,
            "eps_scale": "average"
        }),
    )
}

/// A planned MCMC run: burn-in, prefactor, and the minimal post-burn-in
/// sample count meeting a tail target.
#[derive(Clone, Debug, Serialize)]
pub struct McmcPlan {
    pub n0: usize,
    pub p: String,
    pub q: f64,
    pub c_p: f64,
    pub n_required: usize,
}

/// Smallest integer `n` with the burn-in tail bound at `eps` below `delta`:
/// the closed form `ceil(2 q alpha (b-a)^2/4 log(2 C_p / delta) / eps^2)`,
/// then verified by direct neighborhood evaluation.
#[allow(clippy::too_many_arguments)]
pub fn mcmc_plan(
    lam: f64,
    lam_r: f64,
    mp: &MeasurePair,
    n0: usize,
    range: (f64, f64),
    eps: f64,
    delta: f64,
) -> Result<McmcPlan> {
    if eps <= 0.0 {
        return Err(Error::Invalid(format!("eps = {eps} must be positive")));
    }
    if !(0.0..1.0).contains(&delta) || delta == 0.0 {
        return Err(Error::Invalid(format!("delta = {delta} must be in (0, 1)")));
    }
    let q = mp.order().conjugate();
    let c_p = c_p_prefactor(lam, mp, n0)?;
    let a = alpha(lam_r.max(0.0))?;
    let quarter = sum_quarter_widths(&[range])?;
    let base = 2.0 * q * a * quarter * (2.0 * c_p / delta).ln() / (eps * eps);
    let mut n = base.ceil().max(0.0) as usize;

    let tail_at = |n: usize| -> Result<f64> {
        Ok(bound_t62(lam, lam_r, mp, n0, range, n, 0.0, eps)?
            .tail_bound_at_eps
            .expect("tail populated"))
    };
    // Roundoff guard: the closed form can land one step off the true argmin.
    while tail_at(n)? > delta {
        n += 1;
    }
    while n > 0 && tail_at(n - 1)? <= delta {
        n -= 1;
    }
    Ok(McmcPlan {
        n0,
        p: mp.order().to_string(),
        q,
        c_p,
        n_required: n,
    })
}

/// Time-inhomogeneous proxy from per-step gaps: the telescoped sum
/// `(b_1-a_1)^2/8 + sum_{i=2}^n alpha(lam_{i-1}) ((b_{i-1}-a_{i-1})^2 + (b_i-a_i)^2)/8 + (b_n-a_n)^2/8`,
/// together with the coarser `alpha(max lam) * sum (b_i-a_i)^2/4`.
///
/// Takes `n - 1` gap values for `n` ranges: one per kernel between
/// consecutive steps.
pub fn inhomogeneous_proxy(lams: &[f64], ranges: &[(f64, f64)]) -> Result<(f64, f64)> {
    let n = ranges.len();
    if n == 0 {
        return Err(Error::Invalid("empty range list".into()));
    }
    if lams.len() + 1 != n {
        return Err(Error::Invalid(format!(
            "expected {} gap values for {} ranges, got {}",
            n - 1,
            n,
            lams.len()
        )));
    }
    let w2: Vec<f64> = ranges
        .iter()
        .map(|&(a, b)| {
            if a > b {
                Err(Error::Invalid(format!("bad range ({a}, {b})")))
            } else {
                Ok((b - a) * (b - a))
            }
        })
        .collect::<Result<_>>()?;
    let mut fine = w2[0] / 8.0 + w2[n - 1] / 8.0;
    for i in 1..n {
        fine += alpha(lams[i - 1])? * (w2[i - 1] + w2[i]) / 8.0;
    }
    let lam_max = lams.iter().cloned().fold(0.0_f64, f64::max);
    let coarse = alpha(lam_max)? * w2.iter().sum::<f64>() / 4.0;
    debug_assert!(fine <= coarse * (1.0 + 1e-12) + 1e-300);
    Ok((fine, coarse))
}

/// Report wrapper around [`inhomogeneous_proxy`] using the fine proxy.
pub fn bound_inhomogeneous(
    lams: &[f64],
    ranges: &[(f64, f64)],
    t: f64,
    eps: f64,
) -> Result<BoundReport> {
    let (fine, coarse) = inhomogeneous_proxy(lams, ranges)?;
    assemble(
        TheoremId::Inhomog,
        fine,
        1.0,
        t,
        Some(eps),
        None,
        serde_json::json!({
            "lams": lams, "ranges": ranges, "t": t, "eps": eps,
            "coarse_proxy": coarse
        }),
    )
}

/// Grouped bound for chains with `lambda = 1` but
/// `lambda_k = |||P^k - Pi|||^(1/k) < 1`: indices are split into `k` stride
/// classes `I_j = {i : i = j mod k}` and
/// `proxy = k alpha(lambda_k^k) * k max_j sum_{i in I_j} (b_i - a_i)^2 / 4`.
///
/// No tail is attached; the Chernoff route applies if wanted.
pub fn bound_ta1(lam_k: f64, k: usize, ranges: &[(f64, f64)], t: f64) -> Result<BoundReport> {
    if k < 1 {
        return Err(Error::Invalid("k must be at least 1".into()));
    }
    if lam_k >= 1.0 - crate::chain::GAP_EPS {
        return Err(Error::GapExhausted(format!("lam_k = {lam_k}")));
    }
    if lam_k < 0.0 {
        return Err(Error::Invalid(format!("lam_k = {lam_k} negative")));
    }
    if ranges.is_empty() {
        return Err(Error::Invalid("empty range list".into()));
    }
    let mut max_class = 0.0_f64;
    for j in 0..k {
        let class: Vec<(f64, f64)> = ranges
            .iter()
            .enumerate()
            .filter(|(i, _)| i % k == j)
            .map(|(_, r)| *r)
            .collect();
        if class.is_empty() {
            continue;
        }
        max_class = max_class.max(sum_quarter_widths(&class)?);
    }
    let kf = k as f64;
    let proxy = kf * alpha(lam_k.powi(k as i32))? * (kf * max_class);
    let report = assemble(
        TheoremId::Ta1,
        proxy,
        1.0,
        t,
        None,
        None,
        serde_json::json!({ "lam_k": lam_k, "k": k, "ranges": ranges, "t": t }),
    )?;
    Ok(report)
}
