//! Order-based local search.
//!
//! A [`SearchState`] pairs a topological order with one parent set per node,
//! chosen from the node's prefix by grow-shrink. [`Searcher`] implements the
//! moves: warm-started grow-shrink after a one-element prefix change, the
//! best-reinsertion sweep for a single node, and hill climbing over
//! reinsertions. [`ils`] wraps hill climbing in an iterated local search.

mod ils;
mod scorer;

pub use ils::{
    flop, flop_on_covariance, ils, initial_order, perturb, stream_rng, Budget, FitResult,
    IlsOutcome, InitOrder, SearchConfig,
};
pub use scorer::ScoringMode;

use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::linalg::CovarianceMatrix;
use crate::scoring::{is_improvement, local_score, ScoreConfig};
use scorer::NodeScorer;

/// Hard cap on hill-climbing passes.
pub const MAX_PASSES: usize = 1000;

/// A permutation of `0..p` with its inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Order {
    seq: Vec<usize>,
    pos: Vec<usize>,
}

impl Order {
    pub fn new(seq: Vec<usize>) -> Result<Self> {
        let p = seq.len();
        let mut pos = vec![usize::MAX; p];
        for (i, &v) in seq.iter().enumerate() {
            if v >= p || pos[v] != usize::MAX {
                return Err(Error::InvalidInput(format!("not a permutation: {seq:?}")));
            }
            pos[v] = i;
        }
        Ok(Self { seq, pos })
    }

    pub fn identity(p: usize) -> Self {
        Self {
            seq: (0..p).collect(),
            pos: (0..p).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    pub fn seq(&self) -> &[usize] {
        &self.seq
    }

    pub fn position(&self, v: usize) -> usize {
        self.pos[v]
    }

    /// Nodes strictly before `v`.
    pub fn prefix(&self, v: usize) -> &[usize] {
        &self.seq[..self.pos[v]]
    }

    /// Exchanges the nodes at positions `i` and `j`.
    pub fn swap(&mut self, i: usize, j: usize) {
        self.seq.swap(i, j);
        self.pos[self.seq[i]] = i;
        self.pos[self.seq[j]] = j;
    }
}

/// An order together with the parent sets and local scores it induces.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchState {
    order: Order,
    parents: Vec<Vec<usize>>,
    local: Vec<f64>,
    total: f64,
}

impl SearchState {
    pub fn order(&self) -> &Order {
        &self.order
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn parent_sets(&self) -> &[Vec<usize>] {
        &self.parents
    }

    pub fn local(&self, v: usize) -> f64 {
        self.local[v]
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn p(&self) -> usize {
        self.order.len()
    }

    pub fn to_dag(&self) -> Dag {
        Dag::new(self.parents.clone()).expect("parents are drawn from prefixes")
    }

    /// Every parent precedes its child in the order.
    pub fn parents_respect_order(&self) -> bool {
        self.parents.iter().enumerate().all(|(v, pa)| {
            pa.iter()
                .all(|&u| self.order.position(u) < self.order.position(v))
        })
    }

    /// Local scores recomputed from scratch.
    pub fn recompute_locals(
        &self,
        sigma: &CovarianceMatrix,
        cfg: &ScoreConfig,
    ) -> Result<Vec<f64>> {
        (0..self.p())
            .map(|v| local_score(v, &self.parents[v], sigma, cfg).map(|s| s.value()))
            .collect()
    }

    fn resync_total(&mut self) {
        self.total = self.local.iter().sum();
    }
}

/// Change to a node's prefix since its parents were last fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delta {
    /// Fit from the empty set.
    Cold,
    /// The given node joined the prefix.
    Added(usize),
    /// The given node left the prefix.
    Removed(usize),
}

/// Runs search moves against one covariance matrix.
#[derive(Debug)]
pub struct Searcher<'a> {
    sigma: &'a CovarianceMatrix,
    cfg: ScoreConfig,
    scorer: NodeScorer<'a>,
    trace: Option<Vec<f64>>,
}

impl<'a> Searcher<'a> {
    pub fn new(sigma: &'a CovarianceMatrix, cfg: ScoreConfig, mode: ScoringMode) -> Self {
        Self {
            sigma,
            cfg,
            scorer: NodeScorer::new(sigma, cfg, mode),
            trace: None,
        }
    }

    /// Records the total score after the initial fit and after every
    /// reinsertion performed by [`Searcher::local_search`].
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn take_trace(&mut self) -> Vec<f64> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    /// Number of local-score evaluations performed so far.
    pub fn evaluations(&self) -> u64 {
        self.scorer.evaluations()
    }

    pub fn score_config(&self) -> &ScoreConfig {
        &self.cfg
    }

    fn record(&mut self, total: f64) {
        if let Some(t) = self.trace.as_mut() {
            t.push(total);
        }
    }

    /// Fits every node cold from its prefix.
    pub fn cold_start(&mut self, order: Order) -> Result<SearchState> {
        let p = order.len();
        if p != self.sigma.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.sigma.dim(),
                found: p,
            });
        }
        let mut state = SearchState {
            order,
            parents: vec![Vec::new(); p],
            local: vec![0.0; p],
            total: 0.0,
        };
        for i in 0..p {
            let v = state.order.seq[i];
            self.grow_shrink(&mut state, v, Delta::Cold)?;
        }
        state.resync_total();
        Ok(state)
    }

    /// Refits the parents of `v` after its prefix changed by `delta`.
    ///
    /// A removed node that was not a parent, or an added node that does not
    /// improve the score, leaves the parents untouched. Otherwise grow adds
    /// any improving candidate from the prefix and shrink drops any improving
    /// deletion, repeating until neither changes the set.
    pub fn grow_shrink(&mut self, state: &mut SearchState, v: usize, delta: Delta) -> Result<()> {
        let prev = &state.parents[v];
        let prefix = state.order.prefix(v);
        let scorer = &mut self.scorer;

        let mut current = match delta {
            Delta::Removed(u) => {
                if !prev.contains(&u) {
                    return Ok(());
                }
                scorer.reset(v, prev)?;
                scorer.score_without(u)?;
                scorer.remove(u)?;
                scorer.current_score()
            }
            Delta::Added(u) => {
                let before = scorer.reset(v, prev)?;
                let with = scorer.score_with(u)?;
                if !is_improvement(with, before) {
                    return Ok(());
                }
                scorer.add(u)?;
                scorer.current_score()
            }
            Delta::Cold => scorer.reset(v, &[])?,
        };

        loop {
            loop {
                let mut grew = false;
                for &c in prefix {
                    if scorer.parents().contains(&c) {
                        continue;
                    }
                    if is_improvement(scorer.score_with(c)?, current) {
                        scorer.add(c)?;
                        current = scorer.current_score();
                        grew = true;
                    }
                }
                if !grew {
                    break;
                }
            }
            let mut shrunk_any = false;
            loop {
                let mut shrunk = false;
                for &c in prefix {
                    if !scorer.parents().contains(&c) {
                        continue;
                    }
                    if is_improvement(scorer.score_without(c)?, current) {
                        scorer.remove(c)?;
                        current = scorer.current_score();
                        shrunk = true;
                    }
                }
                if !shrunk {
                    break;
                }
                shrunk_any = true;
            }
            if !shrunk_any {
                break;
            }
        }

        let mut parents = scorer.parents().to_vec();
        parents.sort_unstable();
        state.total += current - state.local[v];
        state.local[v] = current;
        state.parents[v] = parents;
        debug_assert!(state.parents[v]
            .iter()
            .all(|&u| state.order.position(u) < state.order.position(v)));
        Ok(())
    }

    /// Moves `v` to its best-scoring position.
    ///
    /// Sweeps `v` rightward one adjacent swap at a time, refitting only `v`
    /// and the node it passed, then restores the starting state and sweeps
    /// leftward. The best state seen, including the starting one, is kept.
    pub fn reinsert(&mut self, state: &mut SearchState, v: usize) -> Result<()> {
        let p = state.p();
        let start = state.order.position(v);
        let original = state.clone();
        let mut best_total = original.total;
        let mut best: Option<SearchState> = None;

        for j in start + 1..p {
            state.order.swap(j - 1, j);
            let passed = state.order.seq[j - 1];
            self.grow_shrink(state, v, Delta::Added(passed))?;
            self.grow_shrink(state, passed, Delta::Removed(v))?;
            if is_improvement(state.total, best_total) {
                best_total = state.total;
                best = Some(state.clone());
            }
        }

        if start > 0 {
            if start + 1 < p {
                *state = original.clone();
            }
            for j in (0..start).rev() {
                state.order.swap(j, j + 1);
                let passed = state.order.seq[j + 1];
                self.grow_shrink(state, v, Delta::Removed(passed))?;
                self.grow_shrink(state, passed, Delta::Added(v))?;
                if is_improvement(state.total, best_total) {
                    best_total = state.total;
                    best = Some(state.clone());
                }
            }
        }

        *state = best.unwrap_or(original);
        state.resync_total();
        Ok(())
    }

    /// Hill climbing over reinsertion moves from `initial` until a full pass
    /// over the nodes brings no improvement.
    pub fn local_search(&mut self, initial: Order) -> Result<SearchState> {
        let mut state = self.cold_start(initial)?;
        self.record(state.total);
        for _ in 0..MAX_PASSES {
            let before = state.total;
            // nodes in pass-start order
            let nodes = state.order.seq.clone();
            for v in nodes {
                self.reinsert(&mut state, v)?;
                self.record(state.total);
            }
            if !is_improvement(state.total, before) {
                break;
            }
        }
        Ok(state)
    }
}
