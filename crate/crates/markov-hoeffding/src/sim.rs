//! Exact oracles and Monte Carlo.
//!
//! The centerpiece is [`exact_log_mgf`]: the moment generating function of
//! `sum_i f_i(X_i)` over a finite chain is a product of diagonal and kernel
//! matrices,
//!
//! ```text
//! E_start[exp(t sum f_i(X_i))] = start' E^{t f_1} (prod_{i=2}^n P E^{t f_i}) 1,
//! ```
//!
//! which this module evaluates in log-stabilized arithmetic. Everything the
//! bound evaluators claim is checked against this oracle. Sampling is
//! inverse-CDF over ChaCha8 streams keyed by `(seed, replicate)`, so every
//! experiment replays bit-exactly and replicates are independent tasks.
//!
//! The lazy-Gaussian construction shows why boundedness cannot be dropped:
//! for the kernel `lam I + (1 - lam) Pi` with a standard Gaussian invariant
//! law, conditioning on the refresh pattern gives
//! `E[exp(t sum X_i)] = E[exp(t^2 sum N_i^2 / 2)]` where `N_i` are the run
//! lengths of the refresh process. [`lazy_gaussian_mgf`] evaluates that
//! expectation exactly by dynamic programming over (position, open run
//! length) — never by naive simulation, whose heavy tails would not
//! converge.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::StepFunction;
use crate::chain::FiniteChain;
use crate::error::{Error, Result};
use crate::operator;

/// Horizon cap for the run-length dynamic program.
pub const LAZY_GAUSSIAN_CAP: usize = 60;

/// Initial distribution of a simulated path.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum StartSpec {
    /// Start from the chain's stationary distribution.
    Stationary,
    /// Start from an explicit probability vector.
    Measure(Vec<f64>),
}

impl StartSpec {
    pub fn resolve(&self, chain: &FiniteChain) -> Result<Vec<f64>> {
        match self {
            StartSpec::Stationary => Ok(chain.stationary().as_slice().to_vec()),
            StartSpec::Measure(v) => {
                validate_start(v, chain.d())?;
                Ok(v.clone())
            }
        }
    }
}

/// A sampled path with its replay key.
#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub states: Vec<usize>,
    pub seed: u64,
    pub start: StartSpec,
}

impl Trajectory {
    /// Dump as `step,state` CSV rows.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "step,state")?;
        for (i, s) in self.states.iter().enumerate() {
            writeln!(w, "{i},{s}")?;
        }
        Ok(())
    }
}

fn validate_start(start: &[f64], d: usize) -> Result<()> {
    if start.len() != d {
        return Err(Error::Invalid(format!(
            "start vector has length {}, chain has {d} states",
            start.len()
        )));
    }
    let total: f64 = start.iter().sum();
    if (total - 1.0).abs() > 1e-9 || start.iter().any(|&x| x < -1e-12) {
        return Err(Error::Invalid(format!(
            "start must be a probability vector (sums to {total})"
        )));
    }
    Ok(())
}

/// Log of `E_start[exp(t sum_{i=1}^n f_i(X_i))]`, exact up to floating
/// error.
///
/// One step function per time index; `X_1 ~ start`. The running vector is
/// renormalized every step with the scale accumulated in log space, so the
/// result is finite for any finite inputs.
pub fn exact_log_mgf(
    chain: &FiniteChain,
    start: &[f64],
    fs: &[StepFunction],
    t: f64,
) -> Result<f64> {
    if fs.is_empty() {
        return Err(Error::Invalid("need at least one step function".into()));
    }
    let d = chain.d();
    validate_start(start, d)?;
    for f in fs {
        if f.len() != d {
            return Err(Error::Invalid(format!(
                "step function has {} values, chain has {d} states",
                f.len()
            )));
        }
    }

    let mut v: Vec<f64> = start.iter().map(|&x| x.max(0.0)).collect();
    let mut log_acc = 0.0;
    absorb_exponent(&mut v, fs[0].values(), t, &mut log_acc)?;
    for f in &fs[1..] {
        v = row_times_kernel(&v, chain.kernel());
        absorb_exponent(&mut v, f.values(), t, &mut log_acc)?;
    }
    Ok(log_acc)
}

/// `exp` of [`exact_log_mgf`]; may overflow to infinity for extreme inputs.
pub fn exact_mgf(chain: &FiniteChain, start: &[f64], fs: &[StepFunction], t: f64) -> Result<f64> {
    Ok(exact_log_mgf(chain, start, fs, t)?.exp())
}

/// Log mgf of the centered sum `sum_i (f_i(X_i) - pi(f_i))`; this is what
/// the bound evaluators control.
pub fn exact_centered_log_mgf(
    chain: &FiniteChain,
    start: &[f64],
    fs: &[StepFunction],
    t: f64,
) -> Result<f64> {
    let raw = exact_log_mgf(chain, start, fs, t)?;
    let center: f64 = fs.iter().map(|f| f.mean_under(chain.stationary())).sum();
    Ok(raw - t * center)
}

/// Multiply the current mass vector by `exp(t f)` elementwise, shifting by
/// the max exponent over states that carry mass and renormalizing.
fn absorb_exponent(v: &mut [f64], f: &[f64], t: f64, log_acc: &mut f64) -> Result<()> {
    let m = v
        .iter()
        .zip(f.iter())
        .filter(|(w, _)| **w > 0.0)
        .map(|(_, x)| t * x)
        .fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return Err(Error::Invalid("mass vector vanished".into()));
    }
    for (w, x) in v.iter_mut().zip(f.iter()) {
        *w *= (t * x - m).exp();
    }
    let s: f64 = v.iter().sum();
    for w in v.iter_mut() {
        *w /= s;
    }
    *log_acc += m + s.ln();
    Ok(())
}

fn row_times_kernel(v: &[f64], p: &DMatrix<f64>) -> Vec<f64> {
    let d = v.len();
    let mut out = vec![0.0; d];
    for (i, &vi) in v.iter().enumerate() {
        if vi == 0.0 {
            continue;
        }
        for j in 0..d {
            out[j] += vi * p[(i, j)];
        }
    }
    out
}

/// Inverse-CDF sampling of an `n`-step path; reproducible given the seed.
pub fn sample_path(
    chain: &FiniteChain,
    start: &StartSpec,
    n: usize,
    seed: u64,
) -> Result<Trajectory> {
    if n < 1 {
        return Err(Error::Invalid("path length must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = sample_path_with(chain, &start.resolve(chain)?, n, &mut rng);
    Ok(Trajectory {
        states,
        seed,
        start: start.clone(),
    })
}

pub(crate) fn sample_path_with(
    chain: &FiniteChain,
    start: &[f64],
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let mut states = Vec::with_capacity(n);
    let mut current = sample_index(start, rng.random::<f64>());
    states.push(current);
    for _ in 1..n {
        current = step_from(chain, current, rng);
        states.push(current);
    }
    states
}

/// One transition out of `state` by inverse CDF over the kernel row.
pub(crate) fn step_from(chain: &FiniteChain, state: usize, rng: &mut ChaCha8Rng) -> usize {
    let u = rng.random::<f64>();
    let p = chain.kernel();
    let d = chain.d();
    let mut acc = 0.0;
    for j in 0..d {
        acc += p[(state, j)];
        if u < acc {
            return j;
        }
    }
    d - 1
}

fn sample_index(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

/// Fraction of replicates with `|sum f_i(X_i) - sum pi(f_i)| > eps`, with a
/// 95% Wilson half-width.
///
/// Replicate `r` draws from stream `r` of the seeded generator, so the
/// estimate is independent of evaluation order.
pub fn empirical_tail(
    chain: &FiniteChain,
    start: &StartSpec,
    fs: &[StepFunction],
    eps: f64,
    reps: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if reps < 100 {
        return Err(Error::Invalid(format!("reps = {reps} below minimum 100")));
    }
    if fs.is_empty() {
        return Err(Error::Invalid("need at least one step function".into()));
    }
    let resolved = start.resolve(chain)?;
    let center: f64 = fs.iter().map(|f| f.mean_under(chain.stationary())).sum();
    let n = fs.len();
    let mut exceed = 0_u64;
    for rep in 0..reps {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(rep as u64);
        let path = sample_path_with(chain, &resolved, n, &mut rng);
        let sum: f64 = path
            .iter()
            .zip(fs.iter())
            .map(|(&x, f)| f.values()[x])
            .sum();
        if (sum - center).abs() > eps {
            exceed += 1;
        }
    }
    let phat = exceed as f64 / reps as f64;
    Ok((phat, wilson_halfwidth(phat, reps)))
}

/// Half-width of the 95% Wilson score interval.
pub fn wilson_halfwidth(phat: f64, n: usize) -> f64 {
    let z = 1.959963984540054_f64;
    let n = n as f64;
    let z2 = z * z;
    z / (1.0 + z2 / n) * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt()
}

/// Exact asymptotic variance
/// `sigma^2 = <f0, (2 (I - (P - Pi))^{-1} - I) f0>_pi` with `f0 = f - pi(f)`,
/// computed by a dense linear solve.
pub fn asymptotic_variance(chain: &FiniteChain, f: &StepFunction) -> Result<f64> {
    let d = chain.d();
    if f.len() != d {
        return Err(Error::Invalid("function length mismatch".into()));
    }
    let pi = chain.stationary();
    let fv = DVector::from_column_slice(f.values());
    let mean = operator::pi_mean(&fv, pi);
    let f0 = fv.map(|x| x - mean);
    let m = DMatrix::<f64>::identity(d, d)
        - (chain.kernel() - operator::projection_kernel(pi));
    let lu = m.clone().lu();
    let x = lu
        .solve(&f0)
        .ok_or_else(|| Error::GapExhausted("I - (P - Pi) is singular".into()))?;
    let residual = (&m * &x - &f0).amax();
    if residual > 1e-8 * (1.0 + f0.amax()) {
        return Err(Error::GapExhausted(format!(
            "near-singular solve (residual {residual:.3e})"
        )));
    }
    Ok(2.0 * operator::pi_inner(&f0, &x, pi) - operator::pi_inner(&f0, &f0, pi))
}

/// Parameters of the lazy-Gaussian chain: kernel `lam I + (1 - lam) Pi`
/// with standard Gaussian invariant law, horizon `n`, exponent scale `t`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LazyGaussianConfig {
    pub lam: f64,
    pub n: usize,
    pub t: f64,
}

/// Log of `E[exp(t^2/2 * sum N_i^2)]` where `N_i` are run lengths of the
/// refresh process (`B_1 = 1`, `B_i ~ Bernoulli(1 - lam)` i.i.d.).
///
/// Dynamic programming over (position, length of the open run); run weights
/// `exp(t^2 l^2 / 2)` are added in log space at run closures, so horizons up
/// to the cap stay exact in doubles.
pub fn lazy_gaussian_mgf(cfg: &LazyGaussianConfig) -> Result<f64> {
    if !(0.0..1.0).contains(&cfg.lam) {
        return Err(Error::Invalid(format!("lam = {} outside [0, 1)", cfg.lam)));
    }
    if cfg.n < 1 {
        return Err(Error::Invalid("horizon must be at least 1".into()));
    }
    if cfg.n > LAZY_GAUSSIAN_CAP {
        return Err(Error::HorizonTooLarge {
            n: cfg.n,
            cap: LAZY_GAUSSIAN_CAP,
        });
    }
    let n = cfg.n;
    let c = cfg.t * cfg.t / 2.0;
    let ln_stay = cfg.lam.ln(); // -inf at lam = 0
    let ln_refresh = (1.0 - cfg.lam).ln();

    // cur[l] = log total weight of histories with an open run of length l.
    let mut cur = vec![f64::NEG_INFINITY; n + 2];
    cur[1] = 0.0;
    for _ in 2..=n {
        let mut next = vec![f64::NEG_INFINITY; n + 2];
        let mut closings = Vec::with_capacity(n);
        for l in 1..=n {
            if cur[l] == f64::NEG_INFINITY {
                continue;
            }
            if ln_stay != f64::NEG_INFINITY {
                next[l + 1] = cur[l] + ln_stay;
            }
            closings.push(cur[l] + ln_refresh + c * (l * l) as f64);
        }
        next[1] = logsumexp(&closings);
        cur = next;
    }
    let finals: Vec<f64> = (1..=n)
        .filter(|&l| cur[l] != f64::NEG_INFINITY)
        .map(|l| cur[l] + c * (l * l) as f64)
        .collect();
    Ok(logsumexp(&finals))
}

fn logsumexp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// One row of the no-linear-proxy witness table.
#[derive(Clone, Debug, Serialize)]
pub struct WitnessRow {
    pub n: usize,
    pub log_mgf: f64,
    pub log_mgf_per_n: f64,
    /// Smallest per-step proxy compatible with the mgf at this horizon,
    /// `2 log mgf / (n t^2)`.
    pub implied_alpha: f64,
}

/// Tabulates `log mgf / n` over a horizon grid for the lazy-Gaussian chain.
///
/// The per-step log mgf grows without bound (quadratic-in-n growth wins), so
/// no variance proxy linear in `n` can hold; the table is the witness.
pub fn no_proxy_witness(lam: f64, t: f64, n_grid: &[usize]) -> Result<Vec<WitnessRow>> {
    if lam <= 0.0 {
        return Err(Error::Invalid("lam must be positive for the witness".into()));
    }
    if t == 0.0 {
        return Err(Error::Invalid("t must be nonzero for the witness".into()));
    }
    n_grid
        .iter()
        .map(|&n| {
            let log_mgf = lazy_gaussian_mgf(&LazyGaussianConfig { lam, n, t })?;
            Ok(WitnessRow {
                n,
                log_mgf,
                log_mgf_per_n: log_mgf / n as f64,
                implied_alpha: 2.0 * log_mgf / (n as f64 * t * t),
            })
        })
        .collect()
}
