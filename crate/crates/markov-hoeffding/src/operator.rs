//! Weighted-space linear algebra helpers.
//!
//! Every operator-theoretic quantity in this crate lives on the Hilbert space
//! of real functions on the state space with the stationary-weighted inner
//! product `<f, g> = sum_x pi(x) f(x) g(x)`. The isometry `h -> D h` with
//! `D = diag(sqrt(pi))` carries that space onto Euclidean space, so weighted
//! operator norms become plain singular values of `D M D^{-1}` and weighted
//! self-adjoint spectra become eigenvalues of a symmetric matrix. All solvers
//! here are dense; state counts are expected to be small.

use nalgebra::{DMatrix, DVector};

/// Rank-one projection kernel: every row equals `pi`.
pub fn projection_kernel(pi: &DVector<f64>) -> DMatrix<f64> {
    let d = pi.len();
    DMatrix::from_fn(d, d, |_, j| pi[j])
}

/// Stationary-weighted inner product `sum_x pi(x) f(x) g(x)`.
pub fn pi_inner(f: &DVector<f64>, g: &DVector<f64>, pi: &DVector<f64>) -> f64 {
    f.iter()
        .zip(g.iter())
        .zip(pi.iter())
        .map(|((a, b), w)| w * a * b)
        .sum()
}

/// Weighted 2-norm of a function.
pub fn pi_norm(f: &DVector<f64>, pi: &DVector<f64>) -> f64 {
    pi_inner(f, f, pi).max(0.0).sqrt()
}

/// Weighted mean `sum_x pi(x) f(x)`.
pub fn pi_mean(f: &DVector<f64>, pi: &DVector<f64>) -> f64 {
    f.iter().zip(pi.iter()).map(|(a, w)| w * a).sum()
}

/// Similarity transform `D M D^{-1}` with `D = diag(sqrt(pi))`.
///
/// Requires `pi` strictly positive.
pub fn similarity(m: &DMatrix<f64>, pi: &DVector<f64>) -> DMatrix<f64> {
    let d = pi.len();
    DMatrix::from_fn(d, d, |i, j| m[(i, j)] * (pi[i] / pi[j]).sqrt())
}

/// Operator norm of `m` acting on the weighted space: the largest singular
/// value of `D M D^{-1}`.
pub fn operator_norm(m: &DMatrix<f64>, pi: &DVector<f64>) -> f64 {
    let s = similarity(m, pi);
    largest_singular_value(&s)
}

/// Largest singular value of a dense matrix.
pub fn largest_singular_value(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let svd = m.clone().svd(false, false);
    svd.singular_values.iter().cloned().fold(0.0, f64::max)
}

/// Largest eigenvalue of a weighted self-adjoint operator `m` (that is,
/// `diag(pi) * m` symmetric), computed from the symmetrized similarity.
pub fn self_adjoint_top_eigenvalue(m: &DMatrix<f64>, pi: &DVector<f64>) -> f64 {
    let s = similarity(m, pi);
    // Roundoff can leave the similarity slightly asymmetric.
    let sym = (&s + s.transpose()) * 0.5;
    symmetric_top_eigenvalue(&sym)
}

/// Largest eigenvalue of a symmetric matrix.
pub fn symmetric_top_eigenvalue(sym: &DMatrix<f64>) -> f64 {
    if sym.nrows() == 0 {
        return 0.0;
    }
    let eig = sym.clone().symmetric_eigen();
    eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// All eigenvalues of a symmetric matrix, descending.
pub fn symmetric_eigenvalues(sym: &DMatrix<f64>) -> Vec<f64> {
    let eig = sym.clone().symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    vals
}
