//! Bounded feature maps over chain states.
//!
//! A feature map is a list of columns, each a function on states with
//! sup-norm at most one. Experiments that need the population second-moment
//! matrix get it exactly from the stationary distribution.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::StepFunction;
use crate::chain::FiniteChain;
use crate::error::{Error, Result};
use crate::operator;

/// Feature columns with sup-norm at most 1; `centered` asserts every column
/// has zero stationary mean.
#[derive(Clone, Debug)]
pub struct FeatureMap {
    columns: Vec<StepFunction>,
    centered: bool,
}

impl FeatureMap {
    pub fn new(columns: Vec<StepFunction>) -> Result<Self> {
        validate_columns(&columns)?;
        Ok(Self {
            columns,
            centered: false,
        })
    }

    /// Like [`FeatureMap::new`] but additionally checks every column has
    /// stationary mean zero under the chain.
    pub fn new_centered(columns: Vec<StepFunction>, chain: &FiniteChain) -> Result<Self> {
        validate_columns(&columns)?;
        for (j, col) in columns.iter().enumerate() {
            if col.len() != chain.d() {
                return Err(Error::Invalid("column length mismatch".into()));
            }
            let mean = col.mean_under(chain.stationary());
            if mean.abs() > 1e-10 {
                return Err(Error::Invalid(format!(
                    "column {j} has stationary mean {mean}, expected 0"
                )));
            }
        }
        Ok(Self {
            columns,
            centered: true,
        })
    }

    /// Seeded dictionary: uniform values in `[-1, 1]` per state.
    pub fn seeded(chain: &FiniteChain, d_feat: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = chain.d();
        let columns = (0..d_feat)
            .map(|_| {
                let values: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                StepFunction::new(values, -1.0, 1.0)
            })
            .collect::<Result<_>>()?;
        Self::new(columns)
    }

    /// Seeded dictionary with columns exactly centered under the chain's
    /// stationary distribution, then rescaled back into `[-1, 1]`.
    pub fn seeded_centered(chain: &FiniteChain, d_feat: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = chain.d();
        let pi = chain.stationary();
        let columns = (0..d_feat)
            .map(|_| {
                let mut values: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                let mean: f64 = values.iter().zip(pi.iter()).map(|(v, w)| v * w).sum();
                values.iter_mut().for_each(|v| *v -= mean);
                let sup = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
                if sup > 1.0 {
                    values.iter_mut().for_each(|v| *v /= sup);
                }
                StepFunction::new(values, -1.0, 1.0)
            })
            .collect::<Result<_>>()?;
        Self::new_centered(columns, chain)
    }

    /// Seeded dictionary whose population second-moment matrix is block
    /// diagonal with blocks of the given size: columns are centered and
    /// projected against all earlier blocks in the stationary inner
    /// product, then rescaled to sup-norm one.
    ///
    /// Gives an exactly sparse population matrix with row sparsity at most
    /// `block` for the covariance experiments. Requires
    /// `d_states >= d_feat + 1`.
    pub fn seeded_block_orthogonal(
        chain: &FiniteChain,
        d_feat: usize,
        block: usize,
        seed: u64,
    ) -> Result<Self> {
        if block < 1 {
            return Err(Error::Invalid("block size must be at least 1".into()));
        }
        let d = chain.d();
        if d < d_feat + 1 {
            return Err(Error::Invalid(format!(
                "need at least {} states for {d_feat} orthogonalized features, have {d}",
                d_feat + 1
            )));
        }
        let pi = chain.stationary();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Orthonormal basis of the span of all earlier blocks, plus the
        // constant function (projecting it out is exact centering).
        let mut basis: Vec<DVector<f64>> = vec![DVector::from_element(d, 1.0)];
        let mut columns: Vec<StepFunction> = Vec::with_capacity(d_feat);
        let mut block_members: Vec<DVector<f64>> = Vec::new();

        for j in 0..d_feat {
            let mut v = DVector::zeros(d);
            let mut attempts = 0;
            loop {
                for i in 0..d {
                    v[i] = rng.random_range(-1.0..1.0);
                }
                for q in &basis {
                    let coef = operator::pi_inner(&v, q, pi);
                    v -= q * coef;
                }
                if operator::pi_norm(&v, pi) > 1e-6 {
                    break;
                }
                attempts += 1;
                if attempts > 100 {
                    return Err(Error::Invalid(
                        "could not draw independent feature directions".into(),
                    ));
                }
            }
            let sup = v.amax();
            v /= sup;
            columns.push(StepFunction::new(v.as_slice().to_vec(), -1.0, 1.0)?);
            block_members.push(v);

            let block_done = (j + 1) % block == 0 || j + 1 == d_feat;
            if block_done {
                for mut w in block_members.drain(..) {
                    for q in &basis {
                        let coef = operator::pi_inner(&w, q, pi);
                        w -= q * coef;
                    }
                    let norm = operator::pi_norm(&w, pi);
                    if norm > 1e-9 {
                        basis.push(w / norm);
                    }
                }
            }
        }
        Self::new_centered(columns, chain)
    }

    pub fn d_feat(&self) -> usize {
        self.columns.len()
    }

    pub fn d_states(&self) -> usize {
        self.columns[0].len()
    }

    pub fn centered(&self) -> bool {
        self.centered
    }

    pub fn columns(&self) -> &[StepFunction] {
        &self.columns
    }

    /// Feature vector of a single state.
    pub fn row(&self, x: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c.values()[x]).collect()
    }

    /// Exact population second-moment matrix
    /// `Sigma_jk = sum_x pi(x) f_j(x) f_k(x)`.
    pub fn exact_gram(&self, chain: &FiniteChain) -> Result<DMatrix<f64>> {
        let d = chain.d();
        if self.d_states() != d {
            return Err(Error::Invalid("feature/state dimension mismatch".into()));
        }
        let k = self.d_feat();
        let pi = chain.stationary();
        Ok(DMatrix::from_fn(k, k, |a, b| {
            (0..d)
                .map(|x| pi[x] * self.columns[a].values()[x] * self.columns[b].values()[x])
                .sum()
        }))
    }

    /// Design matrix of a sampled path: row `i` is the feature vector of
    /// state `X_i`.
    pub fn design(&self, path: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(path.len(), self.d_feat(), |i, j| {
            self.columns[j].values()[path[i]]
        })
    }
}

fn validate_columns(columns: &[StepFunction]) -> Result<()> {
    if columns.is_empty() {
        return Err(Error::Invalid("feature map needs at least one column".into()));
    }
    let d = columns[0].len();
    for (j, col) in columns.iter().enumerate() {
        if col.len() != d {
            return Err(Error::Invalid("ragged feature columns".into()));
        }
        let (a, b) = col.range();
        if a < -1.0 - 1e-12 || b > 1.0 + 1e-12 {
            return Err(Error::Invalid(format!(
                "column {j} range [{a}, {b}] exceeds [-1, 1]"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::leon_perron_kernel;
    use approx::assert_relative_eq;

    fn chain6() -> FiniteChain {
        leon_perron_kernel(&[0.1, 0.2, 0.15, 0.25, 0.2, 0.1], 0.5).unwrap()
    }

    #[test]
    fn sup_norm_enforced() {
        let too_big = StepFunction::from_values(vec![0.0, 1.5]).unwrap();
        assert!(FeatureMap::new(vec![too_big]).is_err());
    }

    #[test]
    fn seeded_centered_has_zero_means() {
        let chain = chain6();
        let fm = FeatureMap::seeded_centered(&chain, 3, 7).unwrap();
        assert!(fm.centered());
        for col in fm.columns() {
            assert!(col.mean_under(chain.stationary()).abs() < 1e-12);
            assert!(col.values().iter().all(|v| v.abs() <= 1.0 + 1e-12));
        }
    }

    #[test]
    fn block_orthogonal_gram_is_block_diagonal() {
        let chain = chain6();
        let fm = FeatureMap::seeded_block_orthogonal(&chain, 4, 2, 11).unwrap();
        let gram = fm.exact_gram(&chain).unwrap();
        // cross-block entries vanish
        for a in 0..2 {
            for b in 2..4 {
                assert!(gram[(a, b)].abs() < 1e-12, "({a},{b}) = {}", gram[(a, b)]);
            }
        }
        // row sparsity <= block size
        for a in 0..4 {
            let nz = (0..4).filter(|&b| gram[(a, b)].abs() > 1e-12).count();
            assert!(nz <= 2);
        }
    }

    #[test]
    fn gram_matches_hand_sum() {
        let chain = leon_perron_kernel(&[0.5, 0.5], 0.0).unwrap();
        let f1 = StepFunction::from_values(vec![1.0, -1.0]).unwrap();
        let f2 = StepFunction::from_values(vec![1.0, 1.0]).unwrap();
        let fm = FeatureMap::new(vec![f1, f2]).unwrap();
        let gram = fm.exact_gram(&chain).unwrap();
        assert_relative_eq!(gram[(0, 0)], 1.0);
        assert_relative_eq!(gram[(0, 1)], 0.0);
        assert_relative_eq!(gram[(1, 1)], 1.0);
    }

    #[test]
    fn seeded_is_reproducible() {
        let chain = chain6();
        let a = FeatureMap::seeded(&chain, 3, 42).unwrap();
        let b = FeatureMap::seeded(&chain, 3, 42).unwrap();
        for (x, y) in a.columns().iter().zip(b.columns().iter()) {
            assert_eq!(x.values(), y.values());
        }
    }
}
