//! Acceptance suite. Runs every headline criterion at its stated tolerance
//! and prints one PASS/FAIL line per criterion; exits non-zero if any fails.
//!
//! Run alone with `cargo test -p flop --test acceptance`.

mod common;

use std::time::{Duration, Instant};

use common::{fresh_cholesky, mean, ols_residual_variance, random_spd, rng};
use flop::exact::{enumerate_all_dags, exact_search_cov};
use flop::graph::shd_cpdag;
use flop::linalg::{covariance, standardize, CholeskyFactor, CovarianceMatrix};
use flop::scoring::{score_tolerance, total_score, ScoreConfig};
use flop::search::{
    flop_on_covariance, initial_order, FitResult, InitOrder, ScoringMode, SearchConfig, Searcher,
};
use flop::simulate::{sample_instance, AnmParams, GraphSpec, Noise};
use rand::Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

/// Totals observed across every traced run in the suite, shared by the
/// monotonicity criterion.
#[derive(Default)]
struct MonotonicityLog {
    runs: usize,
    moves: usize,
    violations: Vec<String>,
}

impl MonotonicityLog {
    fn record(&mut self, label: &str, fit: &FitResult) {
        let out = &fit.outcome;
        for (i, trace) in out.traces.iter().enumerate() {
            self.runs += 1;
            self.moves += trace.len();
            if let Some(k) = trace.windows(2).position(|w| w[1] > w[0]) {
                self.violations
                    .push(format!("{label}: local search {i} rises at move {}", k + 1));
            }
        }
        if let Some(k) = out.best_history.windows(2).position(|w| w[1] > w[0]) {
            self.violations
                .push(format!("{label}: best-ever rises at restart {}", k + 1));
        }
    }
}

fn fit(sigma: &CovarianceMatrix, n: usize, cfg: SearchConfig) -> FitResult {
    let cfg = SearchConfig {
        record_trace: true,
        ..cfg
    };
    flop_on_covariance(sigma, n, &cfg).expect("search succeeds")
}

fn within(started: Instant, limit: Duration) -> String {
    let t = started.elapsed();
    format!("{:.1}s of {}s budget", t.as_secs_f64(), limit.as_secs())
}

fn cholesky_correctness() -> Outcome {
    let started = Instant::now();
    let mut rng = rng(11);
    let mut worst_factor = 0.0f64;
    for _ in 0..1000 {
        let p = rng.random_range(1..=15);
        let sigma = random_spd(p, &mut rng);
        let mut factor = CholeskyFactor::empty();
        for _ in 0..3 * p {
            let absent: Vec<usize> = (0..p).filter(|u| factor.position(*u).is_none()).collect();
            let grow = factor.is_empty() || (!absent.is_empty() && rng.random_bool(0.6));
            if grow {
                let u = absent[rng.random_range(0..absent.len())];
                factor.append(&sigma, u).unwrap();
            } else {
                factor.remove(rng.random_range(0..factor.len()));
            }
            if factor.is_empty() {
                continue;
            }
            let fresh = fresh_cholesky(&sigma, factor.index());
            for i in 0..factor.len() {
                for j in 0..=i {
                    worst_factor = worst_factor.max((factor.get(i, j) - fresh[(i, j)]).abs());
                }
            }
        }
    }

    let mut worst_ols = 0.0f64;
    for seed in 0..50 {
        let inst = sample_instance(
            &GraphSpec::Er { p: 8, degree: 3.0 },
            &AnmParams {
                n: 500,
                ..AnmParams::default()
            },
            seed,
        )
        .unwrap();
        let sigma = covariance(&inst.data);
        let v = (seed as usize) % 8;
        let s: Vec<usize> = (0..8)
            .filter(|&u| u != v && !(u + seed as usize).is_multiple_of(3))
            .collect();
        let factor = CholeskyFactor::factorize(&sigma, &s).unwrap();
        let fast = factor.conditional_variance(&sigma, v).unwrap();
        let ols = ols_residual_variance(&inst.data, v, &s);
        worst_ols = worst_ols.max((fast - ols).abs() / ols);
    }
    let limit = Duration::from_secs(10);
    Outcome::new(
        worst_factor <= 1e-9 && worst_ols <= 1e-8 && started.elapsed() < limit,
        format!(
            "max factor error {worst_factor:.2e}, max OLS rel. error {worst_ols:.2e}, {}",
            within(started, limit)
        ),
    )
}

fn fast_path_equivalence() -> Outcome {
    let started = Instant::now();
    let mut mismatches = 0;
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let p = 5 + (seed as usize % 11);
        let inst = sample_instance(
            &GraphSpec::Er { p, degree: 3.0 },
            &AnmParams::default(),
            1000 + seed,
        )
        .unwrap();
        let sigma = covariance(&inst.data);
        let cfg = SearchConfig::with_restarts(3).seed(seed);
        let fast = flop_on_covariance(&sigma, 1000, &cfg).unwrap();
        let naive =
            flop_on_covariance(&sigma, 1000, &cfg.clone().scoring(ScoringMode::Naive)).unwrap();
        let gap = (fast.total_bic - naive.total_bic).abs();
        worst = worst.max(gap);
        if fast.dag.parent_sets() != naive.dag.parent_sets() || gap > 1e-8 {
            mismatches += 1;
        }
    }
    let limit = Duration::from_secs(60);
    Outcome::new(
        mismatches == 0 && started.elapsed() < limit,
        format!(
            "{mismatches}/100 mismatches, max total gap {worst:.2e}, {}",
            within(started, limit)
        ),
    )
}

fn exact_vs_enumeration() -> Outcome {
    let started = Instant::now();
    let all: Vec<_> = enumerate_all_dags(4).unwrap().collect();
    let mut mismatches = 0;
    for seed in 0..50 {
        let inst = sample_instance(
            &GraphSpec::Er { p: 4, degree: 1.5 },
            &AnmParams {
                n: 500,
                ..AnmParams::default()
            },
            2000 + seed,
        )
        .unwrap();
        let sigma = covariance(&inst.data);
        let cfg = ScoreConfig::new(500, 2.0).unwrap();
        let exact = exact_search_cov(&sigma, &cfg, None).unwrap();
        let brute = all
            .iter()
            .map(|g| total_score(g, &sigma, &cfg).unwrap())
            .fold(f64::INFINITY, f64::min);
        if (exact.total - brute).abs() > 1e-8 {
            mismatches += 1;
        }
    }
    let limit = Duration::from_secs(60);
    Outcome::new(
        mismatches == 0 && started.elapsed() < limit,
        format!(
            "{mismatches}/50 mismatches over {} DAGs, {}",
            all.len(),
            within(started, limit)
        ),
    )
}

fn global_optimality(log: &mut MonotonicityLog) -> Outcome {
    let started = Instant::now();
    let n = 10_000;
    let (mut dominated, mut attained) = (0, 0);
    for seed in 0..50 {
        let inst = sample_instance(
            &GraphSpec::Er { p: 12, degree: 4.0 },
            &AnmParams {
                n,
                ..AnmParams::default()
            },
            3000 + seed,
        )
        .unwrap();
        let sigma = covariance(&inst.data);
        let exact = exact_search_cov(&sigma, &ScoreConfig::new(n, 2.0).unwrap(), None).unwrap();
        let learned = fit(&sigma, n, SearchConfig::with_restarts(100).seed(seed));
        log.record("p=12 dominance", &learned);
        let tol = score_tolerance(exact.total);
        if exact.total <= learned.total_bic + tol {
            dominated += 1;
        }
        if (exact.total - learned.total_bic).abs() <= tol {
            attained += 1;
        }
    }
    let limit = Duration::from_secs(600);
    Outcome::new(
        dominated == 50 && attained >= 40 && started.elapsed() < limit,
        format!(
            "exact ≤ FLOP₁₀₀ on {dominated}/50, optimum attained on {attained}/50 (need ≥ 40), {}",
            within(started, limit)
        ),
    )
}

struct RecoveryStats {
    recovered: usize,
    shd: Vec<f64>,
}

fn recovery(
    spec: GraphSpec,
    params: AnmParams,
    seed_base: u64,
    cfg: impl Fn(u64) -> SearchConfig,
    label: &str,
    log: &mut MonotonicityLog,
) -> RecoveryStats {
    let mut stats = RecoveryStats {
        recovered: 0,
        shd: Vec::new(),
    };
    for seed in 0..50 {
        let inst = sample_instance(&spec, &params, seed_base + seed).unwrap();
        let sigma = covariance(&inst.data);
        let learned = fit(&sigma, params.n, cfg(seed));
        log.record(label, &learned);
        let shd = shd_cpdag(&learned.cpdag, &inst.truth_cpdag).unwrap();
        stats.recovered += usize::from(shd == 0);
        stats.shd.push(shd as f64);
    }
    stats
}

fn er_recovery(log: &mut MonotonicityLog) -> Outcome {
    let started = Instant::now();
    let spec = GraphSpec::Er { p: 50, degree: 8.0 };
    let params = AnmParams::default();
    let f20 = recovery(
        spec.clone(),
        params,
        4000,
        |s| SearchConfig::with_restarts(20).seed(s),
        "ER FLOP₂₀",
        log,
    );
    let f0 = recovery(
        spec,
        params,
        4000,
        |s| SearchConfig::with_restarts(0).seed(s),
        "ER FLOP₀",
        log,
    );
    let (m20, m0) = (mean(&f20.shd), mean(&f0.shd));
    let limit = Duration::from_secs(900);
    Outcome::new(
        f20.recovered >= 20 && m20 <= m0 && started.elapsed() < limit,
        format!(
            "FLOP₂₀ recovered {}/50 (need ≥ 20), mean SHD FLOP₂₀ {m20:.2} vs FLOP₀ {m0:.2}, {}",
            f20.recovered,
            within(started, limit)
        ),
    )
}

fn path_recovery(log: &mut MonotonicityLog) -> Outcome {
    let started = Instant::now();
    let spec = GraphSpec::Path { p: 50 };
    let params = AnmParams::default();
    let greedy = recovery(
        spec.clone(),
        params,
        5000,
        |s| SearchConfig::with_restarts(0).seed(s),
        "path greedy",
        log,
    );
    let random = recovery(
        spec,
        params,
        5000,
        |s| {
            SearchConfig::with_restarts(0)
                .seed(s)
                .init(InitOrder::Random)
        },
        "path random",
        log,
    );
    let (mg, mr) = (mean(&greedy.shd), mean(&random.shd));
    let limit = Duration::from_secs(300);
    Outcome::new(
        greedy.recovered >= 25 && mg < mr && started.elapsed() < limit,
        format!(
            "greedy FLOP₀ recovered {}/50 (need ≥ 25), mean SHD greedy {mg:.2} vs random {mr:.2} (random recovered {}), {}",
            greedy.recovered,
            random.recovered,
            within(started, limit)
        ),
    )
}

fn uniform_noise_recovery(log: &mut MonotonicityLog) -> Outcome {
    let started = Instant::now();
    let params = AnmParams {
        noise: Noise::Uniform { a: -1.0, b: 1.0 },
        ..AnmParams::default()
    };
    let stats = recovery(
        GraphSpec::Er { p: 50, degree: 8.0 },
        params,
        6000,
        |s| SearchConfig::with_restarts(20).seed(s),
        "uniform FLOP₂₀",
        log,
    );
    let limit = Duration::from_secs(900);
    Outcome::new(
        stats.recovered >= 18 && started.elapsed() < limit,
        format!(
            "FLOP₂₀ recovered {}/50 (need ≥ 18), mean SHD {:.2}, {}",
            stats.recovered,
            mean(&stats.shd),
            within(started, limit)
        ),
    )
}

fn monotonicity(log: &MonotonicityLog) -> Outcome {
    Outcome::new(
        log.violations.is_empty() && log.runs > 0,
        format!(
            "{} violations over {} traced local searches ({} accepted moves){}",
            log.violations.len(),
            log.runs,
            log.moves,
            log.violations
                .first()
                .map(|v| format!("; first: {v}"))
                .unwrap_or_default()
        ),
    )
}

fn large_sample_consistency() -> Outcome {
    let n = 1_000_000;
    let mut equal = 0;
    for seed in 0..40 {
        let inst = sample_instance(
            &GraphSpec::Er { p: 6, degree: 2.0 },
            &AnmParams {
                n,
                ..AnmParams::default()
            },
            7000 + seed,
        )
        .unwrap();
        let sigma = covariance(&inst.data);
        let learned =
            flop_on_covariance(&sigma, n, &SearchConfig::with_restarts(20).seed(seed)).unwrap();
        equal += usize::from(shd_cpdag(&learned.cpdag, &inst.truth_cpdag).unwrap() == 0);
    }
    Outcome::new(
        equal >= 36,
        format!("CPDAG equals truth on {equal}/40 (need ≥ 36)"),
    )
}

/// Not a headline criterion: single local search at p = 200 and the
/// incremental-vs-naive speed ratio at p = 100.
fn scaling() -> Outcome {
    let big = sample_instance(
        &GraphSpec::Er {
            p: 200,
            degree: 8.0,
        },
        &AnmParams::default(),
        8000,
    )
    .unwrap();
    let sigma = covariance(&big.data);
    let started = Instant::now();
    let cfg = SearchConfig::with_restarts(0);
    let _ = flop_on_covariance(&sigma, 1000, &cfg).unwrap();
    let t200 = started.elapsed();

    let mid = sample_instance(
        &GraphSpec::Er {
            p: 100,
            degree: 8.0,
        },
        &AnmParams::default(),
        8001,
    )
    .unwrap();
    let sigma = covariance(&standardize(&mid.data).unwrap());
    let order = initial_order(&sigma, &cfg).unwrap();
    let time = |mode| {
        let started = Instant::now();
        let state = Searcher::new(&sigma, ScoreConfig::new(1000, 2.0).unwrap(), mode)
            .local_search(order.clone())
            .unwrap();
        (started.elapsed(), state.total())
    };
    let (fast, a) = time(ScoringMode::Incremental);
    let (slow, b) = time(ScoringMode::Naive);
    let ratio = slow.as_secs_f64() / fast.as_secs_f64();
    Outcome::new(
        t200 < Duration::from_secs(60) && ratio > 2.0 && (a - b).abs() < 1e-8,
        format!(
            "p=200 local search {:.2}s (limit 60s); p=100 naive/incremental = {ratio:.1}x (need > 2x)",
            t200.as_secs_f64()
        ),
    )
}

fn main() {
    let mut log = MonotonicityLog::default();
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut run = |name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let outcome = f();
        println!(
            "[{}] {name}: {}",
            if outcome.passed { "PASS" } else { "FAIL" },
            outcome.detail
        );
        results.push((name, outcome));
    };

    run("cholesky correctness", &mut cholesky_correctness);
    run("fast-path equivalence", &mut fast_path_equivalence);
    run("exact oracle vs enumeration", &mut exact_vs_enumeration);
    run("global-optimality dominance (ER p=12)", &mut || {
        global_optimality(&mut log)
    });
    run("ER p=50 recovery", &mut || er_recovery(&mut log));
    run("path p=50 recovery", &mut || path_recovery(&mut log));
    run("uniform-noise recovery", &mut || {
        uniform_noise_recovery(&mut log)
    });
    run("hill-climbing monotonicity", &mut || monotonicity(&log));
    run(
        "large-sample consistency (6 nodes, n=1e6)",
        &mut large_sample_consistency,
    );
    run("scaling (informational)", &mut scaling);

    let failed: Vec<&str> = results
        .iter()
        .filter(|(_, o)| !o.passed)
        .map(|(n, _)| *n)
        .collect();
    println!(
        "acceptance: {} passed, {} failed",
        results.len() - failed.len(),
        failed.len()
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
