use std::path::{Path, PathBuf};

use clap::Args;
use flop::graph::{dag_to_cpdag, io::read_graph, shd_cpdag, Cpdag};
use flop::io::{format_g17, read_csv};
use flop::linalg::{covariance, standardize, DataMatrix};
use flop::scoring::{is_improvement, total_score, ScoreConfig};
use flop::{Error, Result};

#[derive(Args)]
pub struct EvalArgs {
    /// Learned graph file.
    #[arg(long)]
    learned: PathBuf,
    /// Target graph file. DAG files are compared through their CPDAG.
    #[arg(long)]
    truth: PathBuf,
    /// Data to score both graphs on.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, requires = "data")]
    no_header: bool,
    #[arg(long, default_value_t = flop::scoring::DEFAULT_LAMBDA)]
    penalty: f64,
}

/// Reads a graph file as an equivalence class. A file without undirected
/// edges is read as a DAG and converted, which is the identity for a CPDAG
/// whose edges are all compelled.
pub fn read_class(path: &Path) -> Result<Cpdag> {
    let text = read_graph(path)?;
    if text.undirected.is_empty() {
        dag_to_cpdag(&text.into_dag()?)
    } else {
        text.into_cpdag()
    }
}

/// Position of each of `from`'s labels within `to`.
fn label_map(from: &[String], to: &[String], what: &str) -> Result<Vec<usize>> {
    let mismatch = || {
        Error::InvalidInput(format!(
            "{what} labels [{}] do not match [{}]",
            from.join(","),
            to.join(",")
        ))
    };
    if from.len() != to.len() {
        return Err(mismatch());
    }
    from.iter()
        .map(|l| to.iter().position(|m| m == l).ok_or_else(mismatch))
        .collect()
}

/// Re-indexes `g` so its labels appear in the order of `labels`.
fn align(g: &Cpdag, labels: &[String]) -> Result<Cpdag> {
    let map = label_map(g.labels(), labels, "truth")?;
    Cpdag::new(
        labels.len(),
        g.directed().iter().map(|&(u, v)| (map[u], map[v])),
        g.undirected().iter().map(|&(u, v)| (map[u], map[v])),
    )?
    .with_labels(labels.to_vec())
}

fn reorder_columns(data: &DataMatrix, map: &[usize]) -> Result<DataMatrix> {
    // map[j] = graph index of data column j; invert to pick columns in graph order
    let mut pick = vec![0; map.len()];
    for (j, &g) in map.iter().enumerate() {
        pick[g] = j;
    }
    let values = data
        .rows()
        .flat_map(|row| pick.iter().map(move |&j| row[j]))
        .collect();
    DataMatrix::new(data.n(), data.p(), values)
}

pub fn run(args: EvalArgs) -> Result<()> {
    let learned = read_class(&args.learned)?;
    let truth = align(&read_class(&args.truth)?, learned.labels())?;
    println!("shd: {}", shd_cpdag(&learned, &truth)?);

    if let Some(path) = &args.data {
        let input = read_csv(path, !args.no_header)?;
        let map = label_map(&input.labels, learned.labels(), "data")?;
        let data = reorder_columns(&input.data, &map)?;
        let sigma = covariance(&standardize(&data)?);
        let cfg = ScoreConfig::new(data.n(), args.penalty)?;
        let learned_bic = total_score(&learned.consistent_extension()?, &sigma, &cfg)?;
        let truth_bic = total_score(&truth.consistent_extension()?, &sigma, &cfg)?;
        println!("learned_bic: {}", format_g17(learned_bic));
        println!("truth_bic: {}", format_g17(truth_bic));
        println!(
            "learned_beats_truth: {}",
            is_improvement(learned_bic, truth_bic)
        );
    }
    Ok(())
}
