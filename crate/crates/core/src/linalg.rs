//! Numerical kernel: data standardization, covariance, and a Cholesky factor
//! of covariance submatrices that supports O(k²) appends and removals.
//!
//! All variances use the maximum-likelihood convention (divide by `n`).

use crate::error::{Error, Result};

/// Residual variances at or below this value are treated as a loss of
/// positive-definiteness. Absolute, on the standardized scale.
pub const PD_GUARD: f64 = 1e-12;

/// Dense `n × p` observation matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n: usize,
    p: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    pub fn new(n: usize, p: usize, values: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 observations, got {n}"
            )));
        }
        if p < 1 {
            return Err(Error::InvalidInput("need at least one variable".into()));
        }
        if values.len() != n * p {
            return Err(Error::DimensionMismatch {
                expected: n * p,
                found: values.len(),
            });
        }
        if let Some(k) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite entry at row {}, column {}",
                k / p,
                k % p
            )));
        }
        Ok(Self { n, p, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * p);
        for (t, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::InvalidInput(format!(
                    "row {t} has {} entries, expected {p}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::new(rows.len(), p, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn get(&self, t: usize, j: usize) -> f64 {
        self.values[t * self.p + j]
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.values[t * self.p..(t + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.p)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Centers every column and scales it to unit maximum-likelihood standard
/// deviation.
pub fn standardize(data: &DataMatrix) -> Result<DataMatrix> {
    let (n, p) = (data.n, data.p);
    let nf = n as f64;
    let mut mean = vec![0.0; p];
    for row in data.rows() {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= nf);

    let mut var = vec![0.0; p];
    let mut max_abs = vec![0.0f64; p];
    for row in data.rows() {
        for j in 0..p {
            let d = row[j] - mean[j];
            var[j] += d * d;
            max_abs[j] = max_abs[j].max(row[j].abs());
        }
    }
    let mut sd = vec![0.0; p];
    for j in 0..p {
        let s = (var[j] / nf).sqrt();
        // a constant column leaves only rounding noise in the centered values
        if !s.is_finite() || s <= 4.0 * f64::EPSILON * max_abs[j] {
            return Err(Error::ZeroVarianceColumn(j));
        }
        sd[j] = s;
    }

    let mut values = Vec::with_capacity(n * p);
    for row in data.rows() {
        values.extend((0..p).map(|j| (row[j] - mean[j]) / sd[j]));
    }
    Ok(DataMatrix { n, p, values })
}

/// Symmetric positive-definite `p × p` matrix of second moments.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    p: usize,
    sigma: Vec<f64>,
}

impl CovarianceMatrix {
    /// `sigma[i][j] = (1/n) Σₜ x[t][i]·x[t][j]`. The data is not centered
    /// here; pass standardized data to obtain a correlation matrix.
    pub fn from_data(data: &DataMatrix) -> Self {
        let p = data.p;
        let mut sigma = vec![0.0; p * p];
        for row in data.rows() {
            for i in 0..p {
                let xi = row[i];
                let dst = &mut sigma[i * p..(i + 1) * p];
                for j in i..p {
                    dst[j] += xi * row[j];
                }
            }
        }
        let nf = data.n as f64;
        for i in 0..p {
            for j in i..p {
                let v = sigma[i * p + j] / nf;
                sigma[i * p + j] = v;
                sigma[j * p + i] = v;
            }
        }
        Self { p, sigma }
    }

    /// Wraps an explicit row-major matrix after checking symmetry, finiteness
    /// and a positive diagonal.
    pub fn from_matrix(p: usize, sigma: Vec<f64>) -> Result<Self> {
        if sigma.len() != p * p {
            return Err(Error::DimensionMismatch {
                expected: p * p,
                found: sigma.len(),
            });
        }
        if sigma.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite covariance entry".into()));
        }
        for i in 0..p {
            if sigma[i * p + i] <= 0.0 {
                return Err(Error::NotPositiveDefinite {
                    variable: i,
                    residual: sigma[i * p + i],
                });
            }
            for j in 0..i {
                let (a, b) = (sigma[i * p + j], sigma[j * p + i]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::InvalidInput(format!(
                        "covariance is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { p, sigma })
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.sigma[i * self.p + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.sigma[i * self.p..(i + 1) * self.p]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.sigma
    }

    /// Correlation between variables `i` and `j`.
    pub fn correlation(&self, i: usize, j: usize) -> f64 {
        self.get(i, j) / (self.get(i, i) * self.get(j, j)).sqrt()
    }
}

/// Convenience wrapper for [`CovarianceMatrix::from_data`].
pub fn covariance(data: &DataMatrix) -> CovarianceMatrix {
    CovarianceMatrix::from_data(data)
}

/// Lower-triangular factor `L` with `L·Lᵀ = Σ[index, index]`.
///
/// Rows are stored packed: row `i` holds its `i + 1` entries starting at
/// offset `i(i+1)/2`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CholeskyFactor {
    index: Vec<usize>,
    packed: Vec<f64>,
}

#[inline]
fn row_offset(i: usize) -> usize {
    i * (i + 1) / 2
}

impl CholeskyFactor {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Factorizes `Σ[index, index]` from scratch in O(k³).
    pub fn factorize(sigma: &CovarianceMatrix, index: &[usize]) -> Result<Self> {
        let mut f = Self {
            index: Vec::with_capacity(index.len()),
            packed: Vec::with_capacity(row_offset(index.len())),
        };
        for &u in index {
            f.append(sigma, u)?;
        }
        Ok(f)
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn index(&self) -> &[usize] {
        &self.index
    }

    pub fn position(&self, u: usize) -> Option<usize> {
        self.index.iter().position(|&x| x == u)
    }

    /// Entry `L[i][j]`; zero above the diagonal.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.packed[row_offset(i) + j]
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.packed[row_offset(i)..row_offset(i + 1)]
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.packed[row_offset(i) + i]
    }

    /// Solves `L·x = b` in place.
    pub fn forward_solve(&self, b: &mut [f64]) {
        debug_assert_eq!(b.len(), self.len());
        for i in 0..b.len() {
            let row = self.row(i);
            let mut acc = b[i];
            for (l, x) in row[..i].iter().zip(&b[..i]) {
                acc -= l * x;
            }
            b[i] = acc / row[i];
        }
    }

    /// `w = L⁻¹·Σ[index, v]`, the coordinates of `v` in the factor's basis.
    pub fn project(&self, sigma: &CovarianceMatrix, v: usize) -> Vec<f64> {
        let mut w: Vec<f64> = self.index.iter().map(|&s| sigma.get(s, v)).collect();
        self.forward_solve(&mut w);
        w
    }

    /// Residual variance of `v` after least-squares regression on the
    /// factor's variables: `Σ[v,v] − w·w` with `L·w = Σ[index, v]`.
    pub fn conditional_variance(&self, sigma: &CovarianceMatrix, v: usize) -> Result<f64> {
        let w = self.project(sigma, v);
        let res = sigma.get(v, v) - dot(&w, &w);
        if res <= PD_GUARD {
            return Err(Error::NotPositiveDefinite {
                variable: v,
                residual: res,
            });
        }
        Ok(res)
    }

    /// Extends the factor by variable `u` in O(k²).
    pub fn append(&mut self, sigma: &CovarianceMatrix, u: usize) -> Result<()> {
        if self.index.contains(&u) {
            return Err(Error::InvalidInput(format!(
                "variable {u} is already in the factor"
            )));
        }
        let r = self.project(sigma, u);
        let d2 = sigma.get(u, u) - dot(&r, &r);
        if d2 <= PD_GUARD {
            return Err(Error::NotPositiveDefinite {
                variable: u,
                residual: d2,
            });
        }
        self.push_row(u, &r, d2.sqrt());
        Ok(())
    }

    /// Appends a precomputed row; `r` must solve `L·r = Σ[index, u]`.
    pub(crate) fn push_row(&mut self, u: usize, r: &[f64], diag: f64) {
        debug_assert_eq!(r.len(), self.len());
        self.packed.extend_from_slice(r);
        self.packed.push(diag);
        self.index.push(u);
    }

    /// Deletes position `j`, then restores triangularity of the trailing block
    /// with plane rotations. Costs O(k·(k−j)).
    pub fn remove(&mut self, j: usize) {
        let k = self.len();
        assert!(j < k, "position {j} out of range for factor of size {k}");

        // dropped column below the diagonal: Σ̃_tt = L̃_tt·L̃_ttᵀ + c·cᵀ
        let mut c: Vec<f64> = (j + 1..k).map(|i| self.get(i, j)).collect();

        let mut packed = Vec::with_capacity(row_offset(k - 1));
        packed.extend_from_slice(&self.packed[..row_offset(j)]);
        for i in j + 1..k {
            let row = self.row(i);
            packed.extend_from_slice(&row[..j]);
            packed.extend_from_slice(&row[j + 1..]);
        }
        self.packed = packed;
        self.index.remove(j);

        // rank-one update of the trailing block by c
        let m = c.len();
        for a in 0..m {
            let ia = j + a;
            let da = row_offset(ia) + ia;
            let l = self.packed[da];
            let r = l.hypot(c[a]);
            let (cs, sn) = (l / r, c[a] / r);
            self.packed[da] = r;
            for b in a + 1..m {
                let ib = row_offset(j + b) + ia;
                let t = self.packed[ib];
                self.packed[ib] = cs * t + sn * c[b];
                c[b] = cs * c[b] - sn * t;
            }
        }
    }

    /// Drops the last variable; O(k).
    pub fn pop(&mut self) -> Option<usize> {
        let u = self.index.pop()?;
        self.packed.truncate(row_offset(self.index.len()));
        Some(u)
    }

    /// Removes variable `u` if present; returns whether it was.
    pub fn remove_variable(&mut self, u: usize) -> bool {
        match self.position(u) {
            Some(j) => {
                self.remove(j);
                true
            }
            None => false,
        }
    }

    /// Dense row-major `L·Lᵀ`.
    pub fn reconstruct(&self) -> Vec<f64> {
        let k = self.len();
        let mut out = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..=i {
                let v = dot(&self.row(i)[..=j], &self.row(j)[..=j]);
                out[i * k + j] = v;
                out[j * k + i] = v;
            }
        }
        out
    }
}

/// Residual variance of `v` given the variables of `factor`.
pub fn conditional_variance(
    sigma: &CovarianceMatrix,
    factor: &CholeskyFactor,
    v: usize,
) -> Result<f64> {
    factor.conditional_variance(sigma, v)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Builds a variable order by pivoted Cholesky: start with the most correlated
/// pair (lower id first), then repeatedly place the unplaced variable with the
/// smallest residual variance given everything placed so far. Ties go to the
/// lowest id. O(p³) overall.
pub fn greedy_pivot_order(sigma: &CovarianceMatrix) -> Result<Vec<usize>> {
    let p = sigma.dim();
    if p <= 1 {
        return Ok((0..p).collect());
    }

    let (mut a, mut b, mut best) = (0, 1, f64::NEG_INFINITY);
    for i in 0..p {
        for j in i + 1..p {
            let r = sigma.correlation(i, j).abs();
            if r > best {
                (a, b, best) = (i, j, r);
            }
        }
    }

    let mut order = Vec::with_capacity(p);
    let mut placed = vec![false; p];
    // rows[v] holds v's partial Cholesky row over the placed columns
    let mut rows: Vec<Vec<f64>> = vec![Vec::with_capacity(p); p];
    let mut resid: Vec<f64> = (0..p).map(|v| sigma.get(v, v)).collect();

    let place = |u: usize,
                 order: &mut Vec<usize>,
                 placed: &mut [bool],
                 rows: &mut [Vec<f64>],
                 resid: &mut [f64]|
     -> Result<()> {
        if resid[u] <= PD_GUARD {
            return Err(Error::NotPositiveDefinite {
                variable: u,
                residual: resid[u],
            });
        }
        let d = resid[u].sqrt();
        placed[u] = true;
        order.push(u);
        let ru = std::mem::take(&mut rows[u]);
        for v in 0..p {
            if placed[v] {
                continue;
            }
            let e = (sigma.get(v, u) - dot(&rows[v], &ru)) / d;
            rows[v].push(e);
            resid[v] -= e * e;
        }
        rows[u] = ru;
        Ok(())
    };

    place(a, &mut order, &mut placed, &mut rows, &mut resid)?;
    place(b, &mut order, &mut placed, &mut rows, &mut resid)?;
    while order.len() < p {
        let next = (0..p)
            .filter(|&v| !placed[v])
            .min_by(|&x, &y| resid[x].total_cmp(&resid[y]).then(x.cmp(&y)))
            .expect("unplaced variable remains");
        place(next, &mut order, &mut placed, &mut rows, &mut resid)?;
    }
    Ok(order)
}
