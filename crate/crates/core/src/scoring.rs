//! Decomposable Gaussian BIC.
//!
//! The local score of node `v` with parent set `P` is
//! `n·ln σ̂²(v | P) + λ·ln(n)·|P|` where `σ̂²` is the maximum-likelihood
//! residual variance. Graph-independent constants are dropped. Lower is better.

use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::linalg::{CholeskyFactor, CovarianceMatrix};

pub const DEFAULT_LAMBDA: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreConfig {
    n: usize,
    lambda: f64,
    log_n: f64,
}

impl ScoreConfig {
    pub fn new(n: usize, lambda: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("sample size {n} < 2")));
        }
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "penalty must be positive, got {lambda}"
            )));
        }
        Ok(Self {
            n,
            lambda,
            log_n: (n as f64).ln(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn log_n(&self) -> f64 {
        self.log_n
    }

    /// Cost of one parent: `λ·ln n`.
    pub fn parent_penalty(&self) -> f64 {
        self.lambda * self.log_n
    }

    /// Local score from a residual variance and a parent count.
    #[inline]
    pub fn from_variance(&self, variance: f64, parents: usize) -> f64 {
        self.n as f64 * variance.ln() + self.parent_penalty() * parents as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LocalScore(pub f64);

impl LocalScore {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Slack below which two scores count as equal: `1e-9·|current| + 1e-9`.
#[inline]
pub fn score_tolerance(current: f64) -> f64 {
    1e-9 * current.abs() + 1e-9
}

/// Strict improvement of `candidate` over `current` beyond float noise.
#[inline]
pub fn is_improvement(candidate: f64, current: f64) -> bool {
    candidate < current - score_tolerance(current)
}

pub fn local_score(
    v: usize,
    parents: &[usize],
    sigma: &CovarianceMatrix,
    cfg: &ScoreConfig,
) -> Result<LocalScore> {
    if parents.contains(&v) {
        return Err(Error::InvalidInput(format!(
            "node {v} listed as its own parent"
        )));
    }
    let factor = CholeskyFactor::factorize(sigma, parents)?;
    let var = factor.conditional_variance(sigma, v)?;
    Ok(LocalScore(cfg.from_variance(var, parents.len())))
}

/// Sum of local scores over all nodes of `dag`.
pub fn total_score(dag: &Dag, sigma: &CovarianceMatrix, cfg: &ScoreConfig) -> Result<f64> {
    if dag.p() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: sigma.dim(),
            found: dag.p(),
        });
    }
    (0..dag.p())
        .map(|v| local_score(v, dag.parents(v), sigma, cfg).map(LocalScore::value))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Dag;
    use crate::linalg::test_support::{ols_residual_variance, random_data};
    use crate::linalg::{covariance, standardize};

    fn setup(
        n: usize,
        p: usize,
        seed: u64,
    ) -> (CovarianceMatrix, ScoreConfig, crate::linalg::DataMatrix) {
        let data = standardize(&random_data(n, p, seed)).unwrap();
        (covariance(&data), ScoreConfig::new(n, 2.0).unwrap(), data)
    }

    #[test]
    fn config_validation() {
        assert!(ScoreConfig::new(1, 2.0).is_err());
        assert!(ScoreConfig::new(10, 0.0).is_err());
        let c = ScoreConfig::new(100, 2.0).unwrap();
        assert_eq!(c.log_n(), 100f64.ln());
    }

    #[test]
    fn empty_parents_score_zero() {
        let (sigma, cfg, _) = setup(50, 3, 1);
        let s = local_score(2, &[], &sigma, &cfg).unwrap();
        assert!(s.value().abs() < 1e-9);
    }

    #[test]
    fn one_parent_closed_form() {
        let (sigma, cfg, _) = setup(80, 2, 2);
        let rho = sigma.get(0, 1);
        let want = 80.0 * (1.0 - rho * rho).ln() + 2.0 * 80f64.ln();
        let got = local_score(1, &[0], &sigma, &cfg).unwrap().value();
        assert!((got - want).abs() < 1e-9);
    }

    #[test]
    fn two_parents_match_ols() {
        let (sigma, cfg, data) = setup(300, 6, 3);
        let want = 300.0 * ols_residual_variance(&data, 4, &[1, 5]).ln() + 4.0 * 300f64.ln();
        let got = local_score(4, &[1, 5], &sigma, &cfg).unwrap().value();
        assert!((got - want).abs() < 1e-8);
    }

    #[test]
    fn self_parent_rejected() {
        let (sigma, cfg, _) = setup(30, 2, 4);
        assert!(local_score(1, &[1], &sigma, &cfg).is_err());
    }

    #[test]
    fn empty_dag_totals_zero() {
        let (sigma, cfg, _) = setup(60, 4, 5);
        assert!(total_score(&Dag::empty(4), &sigma, &cfg).unwrap().abs() < 1e-9);
    }

    #[test]
    fn two_node_score_equivalence() {
        let (sigma, cfg, _) = setup(60, 2, 6);
        let xy = Dag::from_edges(2, &[(0, 1)]).unwrap();
        let yx = Dag::from_edges(2, &[(1, 0)]).unwrap();
        let a = total_score(&xy, &sigma, &cfg).unwrap();
        let b = total_score(&yx, &sigma, &cfg).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn total_is_sum_of_locals() {
        let (sigma, cfg, data) = setup(200, 4, 7);
        let dag = Dag::from_edges(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        let want: f64 = (0..4)
            .map(|v| {
                let pa = dag.parents(v);
                200.0 * ols_residual_variance(&data, v, pa).ln()
                    + 2.0 * 200f64.ln() * pa.len() as f64
            })
            .sum();
        assert!((total_score(&dag, &sigma, &cfg).unwrap() - want).abs() < 1e-8);
    }

    #[test]
    fn useless_parent_costs_exact_penalty() {
        // variable 2 is uncorrelated with both others by construction
        let sigma =
            CovarianceMatrix::from_matrix(3, vec![1.0, 0.5, 0.0, 0.5, 1.0, 0.0, 0.0, 0.0, 1.0])
                .unwrap();
        let cfg = ScoreConfig::new(1000, 2.0).unwrap();
        let a = local_score(1, &[0], &sigma, &cfg).unwrap().value();
        let b = local_score(1, &[0, 2], &sigma, &cfg).unwrap().value();
        assert!(b > a);
        assert!((b - a - cfg.parent_penalty()).abs() < 1e-9);
    }

    #[test]
    fn improvement_tolerance() {
        assert!(is_improvement(-10.0, -9.0));
        assert!(!is_improvement(-10.0, -10.0 + 1e-12));
        assert!(!is_improvement(5.0, 5.0));
    }
}
