//! Exact BIC minimization by dynamic programming over node subsets.
//!
//! Three tables are built: local scores of every candidate parent set, the
//! best parent set contained in each candidate set, and for each node subset
//! the best sink and accumulated score. Memory and time are `O(p·2^p)`.

use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::linalg::{covariance, dot, standardize, CholeskyFactor, CovarianceMatrix, DataMatrix};
use crate::scoring::{total_score, ScoreConfig};

pub const MAX_EXACT_VARIABLES: usize = 20;
pub const MAX_ENUMERATION_VARIABLES: usize = 5;

#[derive(Debug, Clone)]
pub struct ExactResult {
    pub dag: Dag,
    pub total: f64,
}

/// Best parent choice for one node over all candidate sets, indexed by masks
/// over the other nodes (bit `i` = `i`-th other node in ascending id order).
struct ParentTable {
    others: Vec<usize>,
    best_score: Vec<f64>,
    best_mask: Vec<u32>,
}

/// Maps a mask over all nodes (without bit `v`) to a mask over the others of `v`.
#[inline]
fn compress(mask: u32, v: usize) -> u32 {
    let low = mask & ((1u32 << v) - 1);
    let high = (mask >> (v + 1)) << v;
    low | high
}

/// Candidate `a` beats `b` at equal score: fewer parents, then the
/// lexicographically smaller sorted id list.
#[inline]
fn tie_prefers(a: u32, b: u32) -> bool {
    let (ca, cb) = (a.count_ones(), b.count_ones());
    if ca != cb {
        return ca < cb;
    }
    let d = a ^ b;
    d != 0 && (a & d & d.wrapping_neg()) != 0
}

fn local_scores(
    sigma: &CovarianceMatrix,
    cfg: &ScoreConfig,
    v: usize,
    others: &[usize],
    max_indegree: usize,
) -> Result<Vec<f64>> {
    let mut scores = vec![f64::INFINITY; 1usize << others.len()];
    let mut factor = CholeskyFactor::empty();
    let mut w = Vec::with_capacity(others.len());
    let resid = sigma.get(v, v);
    scores[0] = cfg.from_variance(resid, 0);

    // depth-first over subsets in increasing element order, one append each
    #[allow(clippy::too_many_arguments)]
    fn visit(
        sigma: &CovarianceMatrix,
        cfg: &ScoreConfig,
        v: usize,
        others: &[usize],
        max_indegree: usize,
        start: usize,
        mask: u32,
        resid: f64,
        factor: &mut CholeskyFactor,
        w: &mut Vec<f64>,
        scores: &mut [f64],
    ) -> Result<()> {
        if factor.len() >= max_indegree {
            return Ok(());
        }
        for i in start..others.len() {
            let u = others[i];
            factor.append(sigma, u)?;
            let k = factor.len();
            let row = factor.row(k - 1);
            let z = (sigma.get(u, v) - dot(&row[..k - 1], w)) / row[k - 1];
            let r = resid - z * z;
            if r <= crate::linalg::PD_GUARD {
                return Err(Error::NotPositiveDefinite {
                    variable: v,
                    residual: r,
                });
            }
            let m = mask | (1 << i);
            scores[m as usize] = cfg.from_variance(r, k);
            w.push(z);
            visit(
                sigma,
                cfg,
                v,
                others,
                max_indegree,
                i + 1,
                m,
                r,
                factor,
                w,
                scores,
            )?;
            w.pop();
            factor.pop();
        }
        Ok(())
    }

    visit(
        sigma,
        cfg,
        v,
        others,
        max_indegree,
        0,
        0,
        resid,
        &mut factor,
        &mut w,
        &mut scores,
    )?;
    Ok(scores)
}

fn parent_table(
    sigma: &CovarianceMatrix,
    cfg: &ScoreConfig,
    v: usize,
    max_indegree: usize,
) -> Result<ParentTable> {
    let p = sigma.dim();
    let others: Vec<usize> = (0..p).filter(|&u| u != v).collect();
    let mut best_score = local_scores(sigma, cfg, v, &others, max_indegree)?;
    let mut best_mask: Vec<u32> = (0..best_score.len() as u32).collect();
    // subset-lattice minimization; subsets precede supersets in index order
    for c in 1..best_score.len() {
        let mut bits = c as u32;
        while bits != 0 {
            let low = bits & bits.wrapping_neg();
            bits ^= low;
            let sub = c & !(low as usize);
            let (s, m) = (best_score[sub], best_mask[sub]);
            if s < best_score[c] || (s == best_score[c] && tie_prefers(m, best_mask[c])) {
                best_score[c] = s;
                best_mask[c] = m;
            }
        }
    }
    Ok(ParentTable {
        others,
        best_score,
        best_mask,
    })
}

/// Global BIC optimum over all DAGs on the columns of `data`, after
/// standardization.
pub fn exact_search(
    data: &DataMatrix,
    lambda: f64,
    max_indegree: Option<usize>,
) -> Result<ExactResult> {
    if data.p() > MAX_EXACT_VARIABLES {
        return Err(Error::TooManyVariables(data.p()));
    }
    let sigma = covariance(&standardize(data)?);
    let cfg = ScoreConfig::new(data.n(), lambda)?;
    exact_search_cov(&sigma, &cfg, max_indegree)
}

pub fn exact_search_cov(
    sigma: &CovarianceMatrix,
    cfg: &ScoreConfig,
    max_indegree: Option<usize>,
) -> Result<ExactResult> {
    let p = sigma.dim();
    if p > MAX_EXACT_VARIABLES {
        return Err(Error::TooManyVariables(p));
    }
    let max_indegree = max_indegree.unwrap_or(p).min(p.saturating_sub(1));
    let tables: Vec<ParentTable> = (0..p)
        .map(|v| parent_table(sigma, cfg, v, max_indegree))
        .collect::<Result<_>>()?;

    let full = (1usize << p) - 1;
    let mut best = vec![f64::INFINITY; full + 1];
    let mut sink = vec![0u8; full + 1];
    best[0] = 0.0;
    for s in 1..=full {
        let mut bits = s;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let rest = s & !(1 << v);
            let cand = best[rest] + tables[v].best_score[compress(rest as u32, v) as usize];
            if cand < best[s] {
                best[s] = cand;
                sink[s] = v as u8;
            }
        }
    }

    let mut parents = vec![Vec::new(); p];
    let mut s = full;
    while s != 0 {
        let v = sink[s] as usize;
        let rest = s & !(1 << v);
        let t = &tables[v];
        let mask = t.best_mask[compress(rest as u32, v) as usize];
        parents[v] = (0..t.others.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| t.others[i])
            .collect();
        s = rest;
    }
    let dag = Dag::new(parents)?;
    let total = best[full];
    debug_assert!({
        let check = total_score(&dag, sigma, cfg)?;
        (check - total).abs() <= 1e-8 * total.abs().max(1.0)
    });
    Ok(ExactResult { dag, total })
}

/// Every labeled DAG on `p ≤ 5` nodes, each exactly once.
pub fn enumerate_all_dags(p: usize) -> Result<impl Iterator<Item = Dag>> {
    if p > MAX_ENUMERATION_VARIABLES {
        return Err(Error::TooManyVariables(p));
    }
    let pairs: Vec<(usize, usize)> = (0..p)
        .flat_map(|i| (i + 1..p).map(move |j| (i, j)))
        .collect();
    let count = 3usize.pow(pairs.len() as u32);
    Ok((0..count).filter_map(move |mut code| {
        let mut edges = Vec::new();
        for &(i, j) in &pairs {
            match code % 3 {
                1 => edges.push((i, j)),
                2 => edges.push((j, i)),
                _ => {}
            }
            code /= 3;
        }
        Dag::from_edges(p, &edges).ok()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{sample_instance, AnmParams, GraphSpec};

    #[test]
    fn dag_counts() {
        let counts: Vec<usize> = (1..=5)
            .map(|p| enumerate_all_dags(p).unwrap().count())
            .collect();
        assert_eq!(counts, vec![1, 3, 25, 543, 29281]);
        assert!(enumerate_all_dags(6).is_err());
    }

    /// Robinson's recurrence a(n) = Σ (-1)^(k+1) C(n,k) 2^(k(n-k)) a(n-k).
    #[test]
    fn robinson_recurrence_agrees() {
        fn binom(n: i64, k: i64) -> i64 {
            (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
        }
        let mut a = vec![1i64];
        for n in 1..=4i64 {
            let s: i64 = (1..=n)
                .map(|k| {
                    let sign = if k % 2 == 1 { 1 } else { -1 };
                    sign * binom(n, k) * (1i64 << (k * (n - k))) * a[(n - k) as usize]
                })
                .sum();
            a.push(s);
        }
        assert_eq!(a[4], 543);
        assert_eq!(enumerate_all_dags(4).unwrap().count() as i64, a[4]);
    }

    #[test]
    fn enumerated_graphs_are_distinct_and_acyclic() {
        let all: Vec<Dag> = enumerate_all_dags(4).unwrap().collect();
        let set: std::collections::HashSet<_> =
            all.iter().map(|g| g.parent_sets().to_vec()).collect();
        assert_eq!(set.len(), all.len());
        assert!(all.iter().all(|g| g.topological_order().is_some()));
    }

    #[test]
    fn single_variable() {
        let data = DataMatrix::new(3, 1, vec![1.0, 2.0, 4.0]).unwrap();
        let r = exact_search(&data, 2.0, None).unwrap();
        assert_eq!(r.dag.edge_count(), 0);
        assert!(r.total.abs() < 1e-9);
    }

    #[test]
    fn too_many_variables() {
        let data = DataMatrix::new(2, 21, (0..42).map(|x| x as f64).collect()).unwrap();
        assert!(matches!(
            exact_search(&data, 2.0, None),
            Err(Error::TooManyVariables(21))
        ));
    }

    #[test]
    fn matches_enumeration_on_four_nodes() {
        for seed in 0..5 {
            let inst = sample_instance(
                &GraphSpec::Er { p: 4, degree: 1.5 },
                &AnmParams {
                    n: 200,
                    ..AnmParams::default()
                },
                seed,
            )
            .unwrap();
            let sigma = covariance(&inst.data);
            let cfg = ScoreConfig::new(200, 2.0).unwrap();
            let r = exact_search_cov(&sigma, &cfg, None).unwrap();
            let brute = enumerate_all_dags(4)
                .unwrap()
                .map(|g| total_score(&g, &sigma, &cfg).unwrap())
                .fold(f64::INFINITY, f64::min);
            assert!((r.total - brute).abs() < 1e-8, "seed {seed}");
            let rescored = total_score(&r.dag, &sigma, &cfg).unwrap();
            assert!((rescored - r.total).abs() < 1e-8);
        }
    }

    #[test]
    fn independent_columns_large_penalty_give_empty_graph() {
        let inst = sample_instance(
            &GraphSpec::Er { p: 8, degree: 0.0 },
            &AnmParams {
                n: 300,
                ..AnmParams::default()
            },
            1,
        )
        .unwrap();
        let r = exact_search(&inst.data, 50.0, None).unwrap();
        assert_eq!(r.dag.edge_count(), 0);
    }

    #[test]
    fn indegree_cap_is_respected() {
        let inst = sample_instance(
            &GraphSpec::Er { p: 7, degree: 4.0 },
            &AnmParams {
                n: 2000,
                ..AnmParams::default()
            },
            2,
        )
        .unwrap();
        let capped = exact_search(&inst.data, 2.0, Some(1)).unwrap();
        assert!((0..7).all(|v| capped.dag.parents(v).len() <= 1));
        let free = exact_search(&inst.data, 2.0, None).unwrap();
        assert!(free.total <= capped.total + 1e-9);
    }

    #[test]
    fn tie_rule() {
        assert!(tie_prefers(0b001, 0b110));
        assert!(tie_prefers(0b011, 0b110));
        assert!(!tie_prefers(0b110, 0b011));
        assert!(!tie_prefers(0b101, 0b101));
    }
}
