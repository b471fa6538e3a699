#![allow(dead_code)]

use flop::linalg::{CovarianceMatrix, DataMatrix};
use flop::simulate::{sample_instance, AnmInstance, AnmParams, GraphSpec};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `A·Aᵀ/p + 0.1·I` for a random Gaussian-ish `A`.
pub fn random_spd(p: usize, rng: &mut impl Rng) -> CovarianceMatrix {
    let a = DMatrix::from_fn(p, p, |_, _| rng.random_range(-1.0..1.0));
    let m = &a * a.transpose() / p as f64 + DMatrix::identity(p, p) * 0.1;
    CovarianceMatrix::from_matrix(p, m.transpose().as_slice().to_vec()).unwrap()
}

pub fn submatrix(sigma: &CovarianceMatrix, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| sigma.get(idx[i], idx[j]))
}

pub fn fresh_cholesky(sigma: &CovarianceMatrix, idx: &[usize]) -> DMatrix<f64> {
    submatrix(sigma, idx)
        .cholesky()
        .expect("positive definite")
        .l()
}

/// Mean squared residual of the no-intercept least-squares fit of column `v`
/// on columns `s`, solved by SVD so it shares nothing with the code under test.
pub fn ols_residual_variance(data: &DataMatrix, v: usize, s: &[usize]) -> f64 {
    let n = data.n();
    let y = DVector::from_iterator(n, (0..n).map(|t| data.get(t, v)));
    if s.is_empty() {
        return y.norm_squared() / n as f64;
    }
    let x = DMatrix::from_fn(n, s.len(), |t, j| data.get(t, s[j]));
    let beta = x
        .clone()
        .svd(true, true)
        .solve(&y, 1e-14)
        .expect("least squares");
    (y - x * beta).norm_squared() / n as f64
}

pub fn instance(spec: GraphSpec, params: AnmParams, seed: u64) -> AnmInstance {
    sample_instance(&spec, &params, seed).unwrap()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}
