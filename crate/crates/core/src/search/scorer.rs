//! Local-score evaluation for one node while its parent set changes one
//! element at a time.

use crate::error::{Error, Result};
use crate::linalg::{dot, CholeskyFactor, CovarianceMatrix, PD_GUARD};
use crate::scoring::ScoreConfig;

/// How conditional variances are obtained during parent selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoringMode {
    /// Keep a Cholesky factor of the current parents and update it in O(k²)
    /// per evaluated addition or removal.
    #[default]
    Incremental,
    /// Refactorize the parent covariance from scratch for every evaluation.
    Naive,
}

/// Pending change prepared by the last candidate evaluation.
#[derive(Debug, Clone)]
enum Pending {
    None,
    Add {
        u: usize,
        row: Vec<f64>,
        diag: f64,
        proj: f64,
    },
    Remove {
        u: usize,
        factor: CholeskyFactor,
        w: Vec<f64>,
    },
}

#[derive(Debug)]
pub(crate) struct NodeScorer<'a> {
    sigma: &'a CovarianceMatrix,
    cfg: ScoreConfig,
    mode: ScoringMode,
    v: usize,
    factor: CholeskyFactor,
    // w = L⁻¹·Σ[parents, v]
    w: Vec<f64>,
    resid: f64,
    pending: Pending,
    evaluations: u64,
}

impl<'a> NodeScorer<'a> {
    pub(crate) fn new(sigma: &'a CovarianceMatrix, cfg: ScoreConfig, mode: ScoringMode) -> Self {
        Self {
            sigma,
            cfg,
            mode,
            v: 0,
            factor: CholeskyFactor::empty(),
            w: Vec::new(),
            resid: 0.0,
            pending: Pending::None,
            evaluations: 0,
        }
    }

    pub(crate) fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub(crate) fn parents(&self) -> &[usize] {
        self.factor.index()
    }

    pub(crate) fn current_score(&self) -> f64 {
        self.cfg.from_variance(self.resid, self.factor.len())
    }

    fn guard(&self, resid: f64) -> Result<f64> {
        if resid <= PD_GUARD {
            Err(Error::NotPositiveDefinite {
                variable: self.v,
                residual: resid,
            })
        } else {
            Ok(resid)
        }
    }

    /// Starts scoring node `v` with the given parents; returns their score.
    pub(crate) fn reset(&mut self, v: usize, parents: &[usize]) -> Result<f64> {
        self.v = v;
        self.factor = CholeskyFactor::factorize(self.sigma, parents)?;
        self.w = self.factor.project(self.sigma, v);
        self.resid = self.guard(self.sigma.get(v, v) - dot(&self.w, &self.w))?;
        self.pending = Pending::None;
        self.evaluations += 1;
        Ok(self.current_score())
    }

    /// Score of `parents ∪ {u}`.
    pub(crate) fn score_with(&mut self, u: usize) -> Result<f64> {
        self.evaluations += 1;
        let k = self.factor.len() + 1;
        let resid = match self.mode {
            ScoringMode::Incremental => {
                let row = self.factor.project(self.sigma, u);
                let d2 = self.sigma.get(u, u) - dot(&row, &row);
                if d2 <= PD_GUARD {
                    return Err(Error::NotPositiveDefinite {
                        variable: u,
                        residual: d2,
                    });
                }
                let diag = d2.sqrt();
                let proj = (self.sigma.get(u, self.v) - dot(&row, &self.w)) / diag;
                self.pending = Pending::Add { u, row, diag, proj };
                self.resid - proj * proj
            }
            ScoringMode::Naive => {
                let mut idx = self.factor.index().to_vec();
                idx.push(u);
                let f = CholeskyFactor::factorize(self.sigma, &idx)?;
                self.pending = Pending::None;
                f.conditional_variance(self.sigma, self.v)?
            }
        };
        Ok(self.cfg.from_variance(self.guard(resid)?, k))
    }

    /// Score of `parents ∖ {u}`.
    pub(crate) fn score_without(&mut self, u: usize) -> Result<f64> {
        self.evaluations += 1;
        let j = self
            .factor
            .position(u)
            .ok_or_else(|| Error::InvalidInput(format!("{u} is not a parent")))?;
        let k = self.factor.len() - 1;
        let resid = match self.mode {
            ScoringMode::Incremental => {
                let mut factor = self.factor.clone();
                factor.remove(j);
                let w = factor.project(self.sigma, self.v);
                let resid = self.sigma.get(self.v, self.v) - dot(&w, &w);
                self.pending = Pending::Remove { u, factor, w };
                resid
            }
            ScoringMode::Naive => {
                let mut idx = self.factor.index().to_vec();
                idx.remove(j);
                let f = CholeskyFactor::factorize(self.sigma, &idx)?;
                self.pending = Pending::None;
                f.conditional_variance(self.sigma, self.v)?
            }
        };
        Ok(self.cfg.from_variance(self.guard(resid)?, k))
    }

    /// Commits `parents ∪ {u}`, reusing the last evaluation when it was for `u`.
    pub(crate) fn add(&mut self, u: usize) -> Result<()> {
        match std::mem::replace(&mut self.pending, Pending::None) {
            Pending::Add {
                u: pu,
                row,
                diag,
                proj,
            } if pu == u => {
                self.factor.push_row(u, &row, diag);
                self.w.push(proj);
                self.resid -= proj * proj;
            }
            _ => {
                let mut idx = self.factor.index().to_vec();
                idx.push(u);
                self.reset(self.v, &idx)?;
            }
        }
        Ok(())
    }

    /// Commits `parents ∖ {u}`.
    pub(crate) fn remove(&mut self, u: usize) -> Result<()> {
        match std::mem::replace(&mut self.pending, Pending::None) {
            Pending::Remove { u: pu, factor, w } if pu == u => {
                self.resid = self.sigma.get(self.v, self.v) - dot(&w, &w);
                self.factor = factor;
                self.w = w;
            }
            _ => {
                let idx: Vec<usize> = self
                    .factor
                    .index()
                    .iter()
                    .copied()
                    .filter(|&x| x != u)
                    .collect();
                self.reset(self.v, &idx)?;
            }
        }
        Ok(())
    }
}
