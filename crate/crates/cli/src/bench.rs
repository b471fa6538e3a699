use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use clap::Args;
use flop::exact::exact_search_cov;
use flop::graph::{dag_to_cpdag, shd_cpdag};
use flop::io::format_g17;
use flop::linalg::{covariance, standardize};
use flop::scoring::{total_score, ScoreConfig};
use flop::search::{flop_on_covariance, SearchConfig};
use flop::simulate::{sample_instance, AnmParams, GraphSpec, Noise};
use flop::{Error, Result};
use rayon::prelude::*;

use crate::Init;

pub const REPORT_HEADER: &str =
    "seed,algo,shd,recovered,learned_bic,truth_bic,wall_time_s,restarts_executed";

#[derive(Debug, Clone, Copy, PartialEq)]
enum Algo {
    Flop { restarts: usize },
    Exact,
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algo::Flop { restarts } => write!(f, "flop{restarts}"),
            Algo::Exact => f.write_str("exact"),
        }
    }
}

/// One `--algos` value: `flop:R1,R2,...` or `exact`.
#[derive(Debug, Clone)]
struct AlgoList(Vec<Algo>);

impl FromStr for AlgoList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.split_once(':') {
            None if s == "exact" => Ok(AlgoList(vec![Algo::Exact])),
            Some(("flop", list)) => list
                .split(',')
                .map(|r| {
                    r.trim()
                        .parse()
                        .map(|restarts| Algo::Flop { restarts })
                        .map_err(|_| format!("bad restart count `{r}`"))
                })
                .collect::<std::result::Result<_, _>>()
                .map(AlgoList),
            _ => Err(format!("expected flop:R[,R...] or exact, got `{s}`")),
        }
    }
}

#[derive(Args)]
pub struct BenchArgs {
    /// Graph model: er:P,D | sf:P,K | path:P | file:PATH
    #[arg(long)]
    suite: GraphSpec,
    /// Algorithms, e.g. `flop:0,20` or `exact`; repeatable.
    #[arg(long, required = true, num_args = 1..)]
    algos: Vec<AlgoList>,
    /// Number of instances; seeds run from --first-seed upward.
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    first_seed: u64,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value = "gaussian:0.5,2.0")]
    noise: Noise,
    #[arg(long)]
    raw: bool,
    #[arg(long, value_enum, default_value = "greedy")]
    init: Init,
    #[arg(long, default_value_t = flop::scoring::DEFAULT_LAMBDA)]
    penalty: f64,
    /// Worker threads; each instance is solved single-threaded.
    #[arg(long)]
    jobs: Option<usize>,
    /// Report CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone)]
struct Row {
    seed: u64,
    algo: Algo,
    shd: usize,
    learned_bic: f64,
    truth_bic: f64,
    wall_time_s: f64,
    restarts_executed: usize,
}

impl Row {
    fn recovered(&self) -> bool {
        self.shd == 0
    }
}

fn run_seed(args: &BenchArgs, algos: &[Algo], seed: u64) -> Result<Vec<Row>> {
    let params = AnmParams {
        noise: args.noise,
        n: args.n,
        standardize: !args.raw,
        ..AnmParams::default()
    };
    let inst = sample_instance(&args.suite, &params, seed)?;
    let sigma = covariance(&standardize(&inst.data)?);
    let cfg = ScoreConfig::new(args.n, args.penalty)?;
    let truth_bic = total_score(&inst.truth, &sigma, &cfg)?;

    algos
        .iter()
        .map(|&algo| {
            let started = Instant::now();
            let (dag, learned_bic, restarts_executed) = match algo {
                Algo::Flop { restarts } => {
                    let search = SearchConfig::with_restarts(restarts)
                        .seed(seed)
                        .init(args.init.into())
                        .lambda(args.penalty);
                    let fit = flop_on_covariance(&sigma, args.n, &search)?;
                    (fit.dag, fit.total_bic, fit.restarts_executed)
                }
                Algo::Exact => {
                    let r = exact_search_cov(&sigma, &cfg, None)?;
                    (r.dag, r.total, 0)
                }
            };
            let wall_time_s = started.elapsed().as_secs_f64();
            Ok(Row {
                seed,
                algo,
                shd: shd_cpdag(&dag_to_cpdag(&dag)?, &inst.truth_cpdag)?,
                learned_bic,
                truth_bic,
                wall_time_s,
                restarts_executed,
            })
        })
        .collect()
}

fn report(rows: &[Row]) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{:.3},{}",
            r.seed,
            r.algo,
            r.shd,
            u8::from(r.recovered()),
            format_g17(r.learned_bic),
            format_g17(r.truth_bic),
            r.wall_time_s,
            r.restarts_executed
        );
    }
    out
}

fn print_summary(algos: &[Algo], rows: &[Row]) {
    println!("algo,instances,mean_shd,recovery,mean_wall_time_s,learned_beats_truth");
    for &algo in algos {
        let mine: Vec<&Row> = rows.iter().filter(|r| r.algo == algo).collect();
        let k = mine.len() as f64;
        let mean = |f: &dyn Fn(&Row) -> f64| mine.iter().map(|r| f(r)).sum::<f64>() / k;
        println!(
            "{algo},{},{:.3},{:.3},{:.3},{:.3}",
            mine.len(),
            mean(&|r| r.shd as f64),
            mean(&|r| f64::from(u8::from(r.recovered()))),
            mean(&|r| r.wall_time_s),
            mean(&|r| f64::from(u8::from(flop::scoring::is_improvement(
                r.learned_bic,
                r.truth_bic
            )))),
        );
    }
}

pub fn run(args: BenchArgs) -> Result<()> {
    let mut algos: Vec<Algo> = Vec::new();
    for a in args.algos.iter().flat_map(|l| &l.0) {
        if !algos.contains(a) {
            algos.push(*a);
        }
    }
    let seeds: Vec<u64> = (args.first_seed..args.first_seed + args.seeds).collect();
    let work = || -> Result<Vec<Row>> {
        let per_seed: Vec<Vec<Row>> = seeds
            .par_iter()
            .map(|&s| run_seed(&args, &algos, s))
            .collect::<Result<_>>()?;
        Ok(per_seed.into_iter().flatten().collect())
    };
    let rows = match args.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidInput(e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    std::fs::write(&args.out, report(&rows))?;
    print_summary(&algos, &rows);
    Ok(())
}
