//! `flop` command-line interface: fit, simulate, eval, exact and bench.
//!
//! Exit codes: 0 success, 1 other failure, 2 malformed input, 3 numerical
//! failure, 4 too many variables for exact search.

mod bench;
mod eval;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use flop::exact::exact_search;
use flop::graph::{write_graph, ToGraphText};
use flop::io::{format_g17, read_csv, write_csv};
use flop::search::{flop, InitOrder, SearchConfig};
use flop::simulate::{sample_instance, AnmParams, GraphSpec, Noise};
use flop::{Error, Result};

#[derive(Parser)]
#[command(
    name = "flop",
    version,
    about = "Order-based BIC structure learning for linear Gaussian models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a CPDAG from a CSV data file.
    Fit(FitArgs),
    /// Sample a random graph, weights and data.
    Simulate(SimulateArgs),
    /// Compare a learned graph against a target graph.
    Eval(eval::EvalArgs),
    /// Exact BIC optimum by dynamic programming (at most 20 variables).
    Exact(ExactArgs),
    /// Run the simulate → fit → eval pipeline over many seeds.
    Bench(bench::BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Init {
    Greedy,
    Random,
}

impl From<Init> for InitOrder {
    fn from(init: Init) -> Self {
        match init {
            Init::Greedy => InitOrder::Greedy,
            Init::Random => InitOrder::Random,
        }
    }
}

#[derive(Args)]
struct DataArgs {
    /// CSV file with one column per variable.
    #[arg(long)]
    data: PathBuf,
    /// The file has no header row; columns are named x0, x1, ...
    #[arg(long)]
    no_header: bool,
    /// BIC penalty multiplier λ.
    #[arg(long, default_value_t = flop::scoring::DEFAULT_LAMBDA)]
    penalty: f64,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    input: DataArgs,
    /// Number of perturbation restarts after the first local search.
    #[arg(long, conflicts_with = "time_limit")]
    restarts: Option<usize>,
    /// Time budget in seconds, checked between local searches.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "greedy")]
    init: Init,
    /// Output graph file (CPDAG text format).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// er:P,D | sf:P,K | path:P | file:PATH
    #[arg(long)]
    graph: GraphSpec,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// gaussian:VAR_LOW,VAR_HIGH | uniform:A,B
    #[arg(long, default_value = "gaussian:0.5,2.0")]
    noise: Noise,
    /// Keep the raw scale instead of standardizing columns.
    #[arg(long)]
    raw: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Writes PREFIX.data.csv, PREFIX.truth.graph and PREFIX.truth-cpdag.graph.
    #[arg(long)]
    out_prefix: String,
}

#[derive(Args)]
struct ExactArgs {
    #[command(flatten)]
    input: DataArgs,
    /// Largest parent set considered.
    #[arg(long)]
    max_indegree: Option<usize>,
    /// Also write the optimal DAG to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn search_config(args: &FitArgs) -> Result<SearchConfig> {
    let cfg = match (args.restarts, args.time_limit) {
        (_, Some(secs)) if !(secs >= 0.0 && secs.is_finite()) => {
            return Err(Error::InvalidInput(format!("invalid time limit {secs}")));
        }
        (_, Some(secs)) => SearchConfig::with_time_limit(Duration::from_secs_f64(secs)),
        (Some(r), None) => SearchConfig::with_restarts(r),
        (None, None) => SearchConfig::default(),
    };
    Ok(cfg
        .seed(args.seed)
        .init(args.init.into())
        .lambda(args.input.penalty))
}

fn fit(args: FitArgs) -> Result<()> {
    let input = read_csv(&args.input.data, !args.input.no_header)?;
    let result = flop(&input.data, &search_config(&args)?)?;
    let cpdag = result.cpdag.with_labels(input.labels)?;
    write_graph(&args.out, &cpdag)?;
    println!("total_bic: {}", format_g17(result.total_bic));
    println!("wall_time_s: {:.3}", result.wall_time.as_secs_f64());
    println!("restarts_executed: {}", result.restarts_executed);
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let params = AnmParams {
        noise: args.noise,
        n: args.n,
        standardize: !args.raw,
        ..AnmParams::default()
    };
    let inst = sample_instance(&args.graph, &params, args.seed)?;
    let prefix = &args.out_prefix;
    write_csv(
        format!("{prefix}.data.csv"),
        inst.truth.labels(),
        &inst.data,
    )?;
    write_graph(format!("{prefix}.truth.graph"), &inst.truth)?;
    write_graph(format!("{prefix}.truth-cpdag.graph"), &inst.truth_cpdag)?;
    println!("graph: {}", args.graph);
    println!("noise: {}", args.noise);
    println!("n: {}", args.n);
    println!("edges: {}", inst.truth.edge_count());
    Ok(())
}

fn exact(args: ExactArgs) -> Result<()> {
    let input = read_csv(&args.input.data, !args.input.no_header)?;
    let result = exact_search(&input.data, args.input.penalty, args.max_indegree)?;
    let dag = result.dag.with_labels(input.labels)?;
    if let Some(out) = &args.out {
        write_graph(out, &dag)?;
    }
    print!("{}", dag.to_graph_text());
    println!("total_bic: {}", format_g17(result.total));
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::TooManyVariables(_) => 4,
        e if e.is_numerical() => 3,
        e if e.is_parse() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(args) => fit(args),
        Command::Simulate(args) => simulate(args),
        Command::Eval(args) => eval::run(args),
        Command::Exact(args) => exact(args),
        Command::Bench(args) => bench::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
