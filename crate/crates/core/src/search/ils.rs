use std::time::{Duration, Instant};

use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Order, ScoringMode, SearchState, Searcher};
use crate::error::Result;
use crate::graph::{dag_to_cpdag, Cpdag, Dag};
use crate::linalg::{covariance, greedy_pivot_order, standardize, CovarianceMatrix, DataMatrix};
use crate::scoring::{is_improvement, ScoreConfig, DEFAULT_LAMBDA};

/// When the iterated local search stops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    /// Number of perturb-and-search rounds after the first local search.
    Restarts(usize),
    /// Wall-clock limit, checked between local searches.
    TimeLimit(Duration),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitOrder {
    /// Pivoted-Cholesky order placing strongly correlated nodes together.
    #[default]
    Greedy,
    /// Uniformly random permutation.
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub budget: Budget,
    /// Transpositions per perturbation; `None` means `max(1, round(ln p))`.
    pub swap_count: Option<usize>,
    pub seed: u64,
    pub lambda: f64,
    pub init: InitOrder,
    pub scoring: ScoringMode,
    /// Keep the per-move score trace of every local search.
    pub record_trace: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            budget: Budget::Restarts(0),
            swap_count: None,
            seed: 0,
            lambda: DEFAULT_LAMBDA,
            init: InitOrder::Greedy,
            scoring: ScoringMode::Incremental,
            record_trace: false,
        }
    }
}

impl SearchConfig {
    pub fn with_restarts(restarts: usize) -> Self {
        Self {
            budget: Budget::Restarts(restarts),
            ..Self::default()
        }
    }

    pub fn with_time_limit(limit: Duration) -> Self {
        Self {
            budget: Budget::TimeLimit(limit),
            ..Self::default()
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn init(mut self, init: InitOrder) -> Self {
        self.init = init;
        self
    }

    pub fn scoring(mut self, mode: ScoringMode) -> Self {
        self.scoring = mode;
        self
    }

    pub fn lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn swaps_for(&self, p: usize) -> usize {
        self.swap_count
            .unwrap_or_else(|| ((p as f64).ln().round() as usize).max(1))
    }
}

/// Generator for stream `stream` of `seed`.
///
/// Stream 0 draws the random initial order; stream `r ≥ 1` drives the
/// perturbation before restart `r`. ChaCha8 output is platform independent.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Applies `k` uniformly random transpositions of two distinct positions.
pub fn perturb<R: Rng + ?Sized>(order: &Order, k: usize, rng: &mut R) -> Order {
    let mut out = order.clone();
    let p = out.len();
    if p < 2 {
        return out;
    }
    for _ in 0..k {
        let i = rng.random_range(0..p);
        let mut j = rng.random_range(0..p - 1);
        if j >= i {
            j += 1;
        }
        out.swap(i, j);
    }
    out
}

pub fn initial_order(sigma: &CovarianceMatrix, cfg: &SearchConfig) -> Result<Order> {
    match cfg.init {
        InitOrder::Greedy => Order::new(greedy_pivot_order(sigma)?),
        InitOrder::Random => {
            let mut seq: Vec<usize> = (0..sigma.dim()).collect();
            seq.shuffle(&mut stream_rng(cfg.seed, 0));
            Order::new(seq)
        }
    }
}

#[derive(Debug, Clone)]
pub struct IlsOutcome {
    pub best: SearchState,
    pub restarts_executed: usize,
    /// Best-ever total after the first local search and after each restart.
    pub best_history: Vec<f64>,
    /// Final total of every local search, in execution order.
    pub local_optima: Vec<f64>,
    /// Per-move totals of every local search when tracing is enabled.
    pub traces: Vec<Vec<f64>>,
    pub evaluations: u64,
}

/// Iterated local search: hill-climb from the initial order, then repeatedly
/// perturb the best order found so far and hill-climb again.
pub fn ils(sigma: &CovarianceMatrix, n: usize, cfg: &SearchConfig) -> Result<IlsOutcome> {
    let score = ScoreConfig::new(n, cfg.lambda)?;
    let mut searcher = Searcher::new(sigma, score, cfg.scoring);
    if cfg.record_trace {
        searcher = searcher.with_trace();
    }
    let started = Instant::now();
    let p = sigma.dim();
    let swaps = cfg.swaps_for(p);

    let mut best = searcher.local_search(initial_order(sigma, cfg)?)?;
    let mut out = IlsOutcome {
        best_history: vec![best.total()],
        local_optima: vec![best.total()],
        traces: Vec::new(),
        restarts_executed: 0,
        evaluations: 0,
        best: best.clone(),
    };
    if cfg.record_trace {
        out.traces.push(searcher.take_trace());
    }

    let mut restart = 0usize;
    loop {
        let more = match cfg.budget {
            Budget::Restarts(r) => restart < r,
            Budget::TimeLimit(limit) => started.elapsed() < limit,
        };
        if !more {
            break;
        }
        restart += 1;
        let mut rng = stream_rng(cfg.seed, restart as u64);
        let start = perturb(best.order(), swaps, &mut rng);
        let candidate = searcher.local_search(start)?;
        out.local_optima.push(candidate.total());
        if cfg.record_trace {
            out.traces.push(searcher.take_trace());
        }
        if is_improvement(candidate.total(), best.total()) {
            best = candidate;
        }
        out.best_history.push(best.total());
    }

    out.restarts_executed = restart;
    out.evaluations = searcher.evaluations();
    out.best = best;
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub dag: Dag,
    pub cpdag: Cpdag,
    pub total_bic: f64,
    pub restarts_executed: usize,
    pub wall_time: Duration,
    pub outcome: IlsOutcome,
}

/// Learns a CPDAG from raw data: standardize, build the covariance, run the
/// iterated local search, and convert the best DAG to its class.
pub fn flop(data: &DataMatrix, cfg: &SearchConfig) -> Result<FitResult> {
    let started = Instant::now();
    let sigma = covariance(&standardize(data)?);
    let mut fit = flop_on_covariance(&sigma, data.n(), cfg)?;
    fit.wall_time = started.elapsed();
    Ok(fit)
}

/// Same as [`flop`] for a precomputed (standardized) covariance matrix.
pub fn flop_on_covariance(
    sigma: &CovarianceMatrix,
    n: usize,
    cfg: &SearchConfig,
) -> Result<FitResult> {
    let started = Instant::now();
    let outcome = ils(sigma, n, cfg)?;
    let dag = outcome.best.to_dag();
    let cpdag = dag_to_cpdag(&dag)?;
    Ok(FitResult {
        total_bic: outcome.best.total(),
        restarts_executed: outcome.restarts_executed,
        wall_time: started.elapsed(),
        dag,
        cpdag,
        outcome,
    })
}
