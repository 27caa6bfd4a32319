//! Upper-confidence-bound bandit with Markovian rewards.
//!
//! Each arm carries a stationary chain and a reward function into `[0, 1]`;
//! a pulled arm pays the reward of its current state and then advances one
//! step, so an arm's reward stream is a stationary Markov chain sampled at
//! its own pull times. With exploration constant `c > 2 alpha(lambda_r v 0)`
//! the pseudo-regret over `T` rounds is at most
//!
//! ```text
//! sum_{j : gap_j > 0} ( 2 c log T / gap_j + c gap_j / (c - 2 alpha) ).
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::StepFunction;
use crate::chain::{alpha, FiniteChain};
use crate::error::{Error, Result};
use crate::sim;

/// An arm: its chain, its reward function, and the cached right lambda.
#[derive(Clone, Debug)]
pub struct BanditArm {
    chain: FiniteChain,
    reward: StepFunction,
    lam_r: f64,
    mean: f64,
}

impl BanditArm {
    pub fn new(chain: FiniteChain, reward: StepFunction) -> Result<Self> {
        if reward.len() != chain.d() {
            return Err(Error::Invalid("reward length mismatch".into()));
        }
        let (a, b) = reward.range();
        if a < -1e-12 || b > 1.0 + 1e-12 {
            return Err(Error::Invalid(format!(
                "reward range [{a}, {b}] exceeds [0, 1]"
            )));
        }
        let lam_r = chain.right_lambda();
        let mean = reward.mean_under(chain.stationary());
        Ok(Self {
            chain,
            reward,
            lam_r,
            mean,
        })
    }

    pub fn lam_r(&self) -> f64 {
        self.lam_r
    }

    /// Exact stationary mean reward.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn chain(&self) -> &FiniteChain {
        &self.chain
    }
}

/// Pull counts, chosen arms, and the realized pseudo-regret of one run.
#[derive(Clone, Debug, Serialize)]
pub struct RegretTrace {
    /// Arm chosen at each round.
    pub chosen: Vec<usize>,
    /// Final pull counts; they sum to the number of rounds.
    pub counts: Vec<usize>,
    /// `sum_j gap_j N_j(T)` with gaps from exact stationary means.
    pub pseudo_regret: f64,
    /// Regret bound when the exploration constant clears its threshold.
    pub bound: Option<f64>,
}

/// Runs the index policy `argmax_j mean_hat_j + sqrt(c log t / (2 N_j))`
/// for `T` rounds.
///
/// Each arm is pulled once in the first `K` rounds; ties break toward the
/// lowest arm index; arm chains advance only when pulled. Arm `j` draws
/// from stream `j` of the seeded generator, so runs replay bit-exactly.
pub fn ucb_run(arms: &[BanditArm], c: f64, t_rounds: usize, seed: u64) -> Result<RegretTrace> {
    if arms.len() < 2 {
        return Err(Error::Invalid("need at least two arms".into()));
    }
    if c <= 0.0 {
        return Err(Error::Invalid(format!("c = {c} must be positive")));
    }
    if t_rounds < 1 {
        return Err(Error::Invalid("need at least one round".into()));
    }
    let k = arms.len();
    let mut rngs: Vec<ChaCha8Rng> = (0..k)
        .map(|j| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(j as u64);
            rng
        })
        .collect();
    // current state of each arm's chain, drawn from its stationary law
    let mut states: Vec<usize> = arms
        .iter()
        .zip(rngs.iter_mut())
        .map(|(arm, rng)| {
            sim::sample_path_with(arm.chain(), arm.chain().stationary().as_slice(), 1, rng)[0]
        })
        .collect();

    let mut counts = vec![0usize; k];
    let mut sums = vec![0.0f64; k];
    let mut chosen = Vec::with_capacity(t_rounds);

    for round in 1..=t_rounds {
        let j = if round <= k {
            round - 1
        } else {
            let log_t = (round as f64).ln();
            let mut best = 0usize;
            let mut best_index = f64::NEG_INFINITY;
            for j in 0..k {
                let mean_hat = sums[j] / counts[j] as f64;
                let index = mean_hat + (c * log_t / (2.0 * counts[j] as f64)).sqrt();
                if index > best_index {
                    best_index = index;
                    best = j;
                }
            }
            best
        };
        chosen.push(j);
        let reward = arms[j].reward.values()[states[j]];
        sums[j] += reward;
        counts[j] += 1;
        // advance only the pulled arm's chain
        states[j] = sim::step_from(arms[j].chain(), states[j], &mut rngs[j]);
    }

    let best_mean = arms.iter().map(|a| a.mean()).fold(f64::NEG_INFINITY, f64::max);
    let pseudo_regret = arms
        .iter()
        .zip(counts.iter())
        .map(|(arm, &n)| (best_mean - arm.mean()) * n as f64)
        .sum();
    Ok(RegretTrace {
        chosen,
        counts,
        pseudo_regret,
        bound: ucb_bound(arms, c, t_rounds).ok(),
    })
}

/// Regret bound `sum_{gap_j > 0} (2 c log T / gap_j + c gap_j / (c - 2 alpha))`
/// with `alpha` taken at the largest right lambda across arms (conservative
/// for heterogeneous arms).
///
/// Errors with [`Error::CTooSmall`] when `c <= 2 alpha`.
pub fn ucb_bound(arms: &[BanditArm], c: f64, t_rounds: usize) -> Result<f64> {
    if arms.is_empty() || t_rounds < 1 {
        return Err(Error::Invalid("need arms and at least one round".into()));
    }
    let lam = arms.iter().map(|a| a.lam_r()).fold(0.0f64, f64::max);
    let a = alpha(lam.max(0.0))?;
    ucb_bound_with_log(arms, c, a, (t_rounds as f64).ln())
}

fn ucb_bound_with_log(arms: &[BanditArm], c: f64, a: f64, log_t: f64) -> Result<f64> {
    if c <= 2.0 * a {
        return Err(Error::CTooSmall { c, floor: 2.0 * a });
    }
    let best = arms.iter().map(|x| x.mean()).fold(f64::NEG_INFINITY, f64::max);
    Ok(arms
        .iter()
        .map(|arm| {
            let gap = best - arm.mean();
            if gap > 0.0 {
                2.0 * c / gap * log_t + c * gap / (c - 2.0 * a)
            } else {
                0.0
            }
        })
        .sum())
}
