//! Benchmark instances: random graphs and linear additive noise data.
//!
//! Every instance is a pure function of `(spec, params, seed)`. The seed
//! drives one ChaCha8 generator per phase, selected by stream id:
//! 0 graph, 1 edge weights, 2 noise scales, 3 observations.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graph::{dag_to_cpdag, read_edge_list, Cpdag, Dag};
use crate::linalg::{standardize, DataMatrix};

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSpec {
    /// Erdős–Rényi skeleton with expected average degree `degree`.
    Er { p: usize, degree: f64 },
    /// Scale-free: star on `k + 1` nodes grown by preferential attachment.
    Sf { p: usize, k: usize },
    /// Directed path through all nodes.
    Path { p: usize },
    /// Fixed DAG read from an edge-list file.
    File(PathBuf),
}

impl GraphSpec {
    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        match *self {
            GraphSpec::Er { p, degree } if p < 1 || !degree.is_finite() || degree < 0.0 => {
                bad(format!("invalid ER spec p={p}, degree={degree}"))
            }
            GraphSpec::Sf { p, k } if p < 1 || k < 1 => {
                bad(format!("invalid SF spec p={p}, k={k}"))
            }
            GraphSpec::Path { p } if p < 1 => bad("path needs p >= 1".into()),
            _ => Ok(()),
        }
    }
}

fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad number `{x}` in {what}")))
        })
        .collect()
}

impl FromStr for GraphSpec {
    type Err = Error;

    /// `er:P,D`, `sf:P,K`, `path:P` or `file:PATH`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidInput(format!("graph spec `{s}` lacks `kind:`")))?;
        let spec = match kind {
            "er" => match parse_list::<f64>(args, s)?.as_slice() {
                &[p, d] if p >= 1.0 && p.fract() == 0.0 => GraphSpec::Er {
                    p: p as usize,
                    degree: d,
                },
                _ => return Err(Error::InvalidInput(format!("expected er:P,D, got `{s}`"))),
            },
            "sf" => match parse_list::<usize>(args, s)?.as_slice() {
                &[p, k] => GraphSpec::Sf { p, k },
                _ => return Err(Error::InvalidInput(format!("expected sf:P,K, got `{s}`"))),
            },
            "path" => match parse_list::<usize>(args, s)?.as_slice() {
                &[p] => GraphSpec::Path { p },
                _ => return Err(Error::InvalidInput(format!("expected path:P, got `{s}`"))),
            },
            "file" => GraphSpec::File(PathBuf::from(args)),
            _ => return Err(Error::InvalidInput(format!("unknown graph kind `{kind}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Er { p, degree } => write!(f, "er:{p},{degree}"),
            GraphSpec::Sf { p, k } => write!(f, "sf:{p},{k}"),
            GraphSpec::Path { p } => write!(f, "path:{p}"),
            GraphSpec::File(path) => write!(f, "file:{}", path.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Noise {
    /// Zero-mean Gaussian whose variance is drawn per node from `[low, high]`.
    Gaussian { var_low: f64, var_high: f64 },
    /// Uniform on `[a, b]`, identical for all nodes.
    Uniform { a: f64, b: f64 },
}

impl FromStr for Noise {
    type Err = Error;

    /// `gaussian:LOW,HIGH` or `uniform:A,B`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidInput(format!("noise spec `{s}` lacks `kind:`")))?;
        let v = parse_list::<f64>(args, s)?;
        let noise = match (kind, v.as_slice()) {
            ("gaussian", &[lo, hi]) => Noise::Gaussian {
                var_low: lo,
                var_high: hi,
            },
            ("uniform", &[a, b]) => Noise::Uniform { a, b },
            _ => return Err(Error::InvalidInput(format!("malformed noise spec `{s}`"))),
        };
        noise.validate()?;
        Ok(noise)
    }
}

impl fmt::Display for Noise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Noise::Gaussian { var_low, var_high } => {
                write!(f, "gaussian:{var_low:?},{var_high:?}")
            }
            Noise::Uniform { a, b } => write!(f, "uniform:{a:?},{b:?}"),
        }
    }
}

impl Noise {
    fn validate(&self) -> Result<()> {
        match *self {
            Noise::Gaussian { var_low, var_high } if var_low > 0.0 && var_low <= var_high => Ok(()),
            Noise::Uniform { a, b } if a < b && a.is_finite() && b.is_finite() => Ok(()),
            _ => Err(Error::InvalidInput(format!("invalid noise law {self:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnmParams {
    pub weight_low: f64,
    pub weight_high: f64,
    pub noise: Noise,
    pub n: usize,
    pub standardize: bool,
}

impl Default for AnmParams {
    fn default() -> Self {
        Self {
            weight_low: 0.25,
            weight_high: 1.0,
            noise: Noise::Gaussian {
                var_low: 0.5,
                var_high: 2.0,
            },
            n: 1000,
            standardize: true,
        }
    }
}

impl AnmParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.weight_low && self.weight_low < self.weight_high) {
            return Err(Error::InvalidInput(format!(
                "weight range [{}, {}] is invalid",
                self.weight_low, self.weight_high
            )));
        }
        if self.n < 2 {
            return Err(Error::InvalidInput(format!("n = {} < 2", self.n)));
        }
        self.noise.validate()
    }
}

#[derive(Debug, Clone)]
pub struct AnmInstance {
    pub truth: Dag,
    pub truth_cpdag: Cpdag,
    /// Row-major `p × p`; entry `(i, j)` is the coefficient of edge `i → j`.
    pub weights: Vec<f64>,
    /// Noise variance per node.
    pub noise_variances: Vec<f64>,
    pub data: DataMatrix,
    pub seed: u64,
}

impl AnmInstance {
    pub fn p(&self) -> usize {
        self.truth.p()
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.p() + j]
    }

    /// Population covariance of the unstandardized model,
    /// `(I − Wᵀ)⁻¹ D (I − W)⁻¹`, built in topological order.
    pub fn population_covariance(&self) -> Vec<f64> {
        let p = self.p();
        let mut cov = vec![0.0; p * p];
        let order = self.truth.topological_order().expect("acyclic");
        for (k, &v) in order.iter().enumerate() {
            let pa = self.truth.parents(v);
            for &u in &order[..k] {
                let c: f64 = pa.iter().map(|&a| self.weight(a, v) * cov[a * p + u]).sum();
                cov[v * p + u] = c;
                cov[u * p + v] = c;
            }
            let mut var = self.noise_variances[v];
            for &a in pa {
                for &b in pa {
                    var += self.weight(a, v) * self.weight(b, v) * cov[a * p + b];
                }
            }
            cov[v * p + v] = var;
        }
        cov
    }
}

fn phase_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn orient_by_random_order<R: Rng + ?Sized>(
    p: usize,
    skeleton: &[(usize, usize)],
    rng: &mut R,
) -> Result<Dag> {
    let mut order: Vec<usize> = (0..p).collect();
    order.shuffle(rng);
    let mut rank = vec![0; p];
    order.iter().enumerate().for_each(|(i, &v)| rank[v] = i);
    let edges: Vec<(usize, usize)> = skeleton
        .iter()
        .map(|&(a, b)| if rank[a] < rank[b] { (a, b) } else { (b, a) })
        .collect();
    Dag::from_edges(p, &edges)
}

/// Draws a DAG according to `spec`.
///
/// ER and SF skeletons are oriented along a uniformly random order; a path is
/// laid along a uniformly random permutation of the nodes; file graphs keep
/// their stored orientation.
pub fn generate_graph<R: Rng + ?Sized>(spec: &GraphSpec, rng: &mut R) -> Result<Dag> {
    spec.validate()?;
    match *spec {
        GraphSpec::Er { p, degree } => {
            let prob = if p > 1 {
                (degree / (p - 1) as f64).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut skeleton = Vec::new();
            for i in 0..p {
                for j in i + 1..p {
                    if rng.random_bool(prob) {
                        skeleton.push((i, j));
                    }
                }
            }
            orient_by_random_order(p, &skeleton, rng)
        }
        GraphSpec::Sf { p, k } => {
            let seed_size = (k + 1).min(p);
            let mut skeleton: Vec<(usize, usize)> = (1..seed_size).map(|i| (0, i)).collect();
            let mut degree = vec![0usize; p];
            degree[0] = seed_size - 1;
            degree[1..seed_size].iter_mut().for_each(|d| *d = 1);
            for new in seed_size..p {
                let mut chosen: Vec<usize> = Vec::with_capacity(k);
                for _ in 0..k {
                    let total: usize = (0..new)
                        .filter(|u| !chosen.contains(u))
                        .map(|u| degree[u])
                        .sum();
                    let mut r = rng.random_range(0..total);
                    let pick = (0..new)
                        .filter(|u| !chosen.contains(u))
                        .find(|&u| {
                            if r < degree[u] {
                                true
                            } else {
                                r -= degree[u];
                                false
                            }
                        })
                        .expect("weights cover the draw");
                    chosen.push(pick);
                }
                for &u in &chosen {
                    degree[u] += 1;
                    skeleton.push((u, new));
                }
                degree[new] = k;
            }
            orient_by_random_order(p, &skeleton, rng)
        }
        GraphSpec::Path { p } => {
            let mut order: Vec<usize> = (0..p).collect();
            order.shuffle(rng);
            let edges: Vec<(usize, usize)> = order.windows(2).map(|w| (w[0], w[1])).collect();
            Dag::from_edges(p, &edges)
        }
        GraphSpec::File(ref path) => read_edge_list(path),
    }
}

/// Generates a graph and `params.n` observations of the linear model
/// `X = WᵀX + N`.
pub fn sample_instance(spec: &GraphSpec, params: &AnmParams, seed: u64) -> Result<AnmInstance> {
    params.validate()?;
    let truth = generate_graph(spec, &mut phase_rng(seed, 0))?;
    let p = truth.p();

    let mut wrng = phase_rng(seed, 1);
    let mut weights = vec![0.0; p * p];
    for (u, v) in truth.edges() {
        let mag = wrng.random_range(params.weight_low..=params.weight_high);
        let sign = if wrng.random_bool(0.5) { 1.0 } else { -1.0 };
        weights[u * p + v] = sign * mag;
    }

    let mut nrng = phase_rng(seed, 2);
    let noise_variances: Vec<f64> = match params.noise {
        Noise::Gaussian { var_low, var_high } => (0..p)
            .map(|_| {
                if var_low == var_high {
                    var_low
                } else {
                    nrng.random_range(var_low..=var_high)
                }
            })
            .collect(),
        Noise::Uniform { a, b } => vec![(b - a).powi(2) / 12.0; p],
    };
    let noise_sd: Vec<f64> = noise_variances.iter().map(|v| v.sqrt()).collect();

    let order = truth.topological_order().expect("acyclic");
    let mut drng = phase_rng(seed, 3);
    let n = params.n;
    let mut values = vec![0.0; n * p];
    for row in values.chunks_exact_mut(p) {
        for &v in &order {
            let signal: f64 = truth
                .parents(v)
                .iter()
                .map(|&u| weights[u * p + v] * row[u])
                .sum();
            let eps = match params.noise {
                Noise::Gaussian { .. } => noise_sd[v] * drng.sample::<f64, _>(StandardNormal),
                Noise::Uniform { a, b } => drng.random_range(a..b),
            };
            row[v] = signal + eps;
        }
    }
    let mut data = DataMatrix::new(n, p, values)?;
    if params.standardize {
        data = standardize(&data)?;
    }
    let truth_cpdag = dag_to_cpdag(&truth)?;
    Ok(AnmInstance {
        truth,
        truth_cpdag,
        weights,
        noise_variances,
        data,
        seed,
    })
}
