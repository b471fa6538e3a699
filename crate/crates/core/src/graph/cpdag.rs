use std::collections::BTreeSet;

use super::dag::{default_labels, Dag};
use crate::error::{Error, Result};

/// Relation between an unordered pair of nodes `{u, v}` with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairStatus {
    None,
    /// `u → v`
    Forward,
    /// `v → u`
    Backward,
    Undirected,
}

/// Completed partially directed acyclic graph: compelled edges directed,
/// reversible edges undirected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cpdag {
    p: usize,
    labels: Vec<String>,
    directed: BTreeSet<(usize, usize)>,
    undirected: BTreeSet<(usize, usize)>,
}

impl Cpdag {
    /// Validates the pairwise invariants. Meek closure is checked separately
    /// by [`Cpdag::is_meek_closed`].
    pub fn new(
        p: usize,
        directed: impl IntoIterator<Item = (usize, usize)>,
        undirected: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut g = Self {
            p,
            labels: default_labels(p),
            directed: BTreeSet::new(),
            undirected: BTreeSet::new(),
        };
        for (u, v) in directed {
            g.check_pair(u, v)?;
            if g.status(u, v) != PairStatus::None {
                return Err(Error::InvalidInput(format!("pair ({u}, {v}) listed twice")));
            }
            g.directed.insert((u, v));
        }
        for (u, v) in undirected {
            g.check_pair(u, v)?;
            if g.status(u, v) != PairStatus::None {
                return Err(Error::InvalidInput(format!("pair ({u}, {v}) listed twice")));
            }
            g.undirected.insert((u.min(v), u.max(v)));
        }
        Ok(g)
    }

    fn check_pair(&self, u: usize, v: usize) -> Result<()> {
        if u == v || u >= self.p || v >= self.p {
            return Err(Error::InvalidInput(format!("invalid edge ({u}, {v})")));
        }
        Ok(())
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                found: labels.len(),
            });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn directed(&self) -> &BTreeSet<(usize, usize)> {
        &self.directed
    }

    /// Undirected edges as `(min, max)` pairs.
    pub fn undirected(&self) -> &BTreeSet<(usize, usize)> {
        &self.undirected
    }

    pub fn edge_count(&self) -> usize {
        self.directed.len() + self.undirected.len()
    }

    /// Status of the pair `{u, v}` read with `u` first.
    pub fn status(&self, u: usize, v: usize) -> PairStatus {
        if self.directed.contains(&(u, v)) {
            PairStatus::Forward
        } else if self.directed.contains(&(v, u)) {
            PairStatus::Backward
        } else if self.undirected.contains(&(u.min(v), u.max(v))) {
            PairStatus::Undirected
        } else {
            PairStatus::None
        }
    }

    /// True if applying Meek rules R1–R3 orients nothing further.
    pub fn is_meek_closed(&self) -> bool {
        let mut m = MarkMatrix::from_cpdag(self);
        !m.apply_meek_once()
    }

    /// A DAG in the class, by repeatedly removing a sink whose undirected
    /// neighbours form a clique with its other neighbours (Dor & Tarsi).
    pub fn consistent_extension(&self) -> Result<Dag> {
        let p = self.p;
        let m = MarkMatrix::from_cpdag(self);
        let mut alive = vec![true; p];
        let mut parents = vec![Vec::new(); p];
        for &(u, v) in &self.directed {
            parents[v].push(u);
        }
        for _ in 0..p {
            let x = (0..p)
                .filter(|&x| alive[x])
                .find(|&x| {
                    let has_child = (0..p).any(|y| alive[y] && m.dir(x, y));
                    if has_child {
                        return false;
                    }
                    let nbrs: Vec<usize> =
                        (0..p).filter(|&y| alive[y] && m.adjacent(x, y)).collect();
                    nbrs.iter()
                        .filter(|&&y| m.und(x, y))
                        .all(|&y| nbrs.iter().all(|&z| z == y || m.adjacent(y, z)))
                })
                .ok_or_else(|| {
                    Error::InvalidInput(
                        "partially directed graph has no consistent extension".into(),
                    )
                })?;
            for y in 0..p {
                if alive[y] && m.und(x, y) {
                    parents[x].push(y);
                }
            }
            alive[x] = false;
        }
        Dag::new(parents)?.with_labels(self.labels.clone())
    }
}

/// Dense edge marks used while orienting.
struct MarkMatrix {
    p: usize,
    // 0 none, 1 directed i→j, 2 undirected
    marks: Vec<u8>,
}

const DIR: u8 = 1;
const UND: u8 = 2;

impl MarkMatrix {
    fn from_cpdag(g: &Cpdag) -> Self {
        let mut m = Self {
            p: g.p,
            marks: vec![0; g.p * g.p],
        };
        for &(u, v) in &g.directed {
            m.marks[u * g.p + v] = DIR;
        }
        for &(u, v) in &g.undirected {
            m.marks[u * g.p + v] = UND;
            m.marks[v * g.p + u] = UND;
        }
        m
    }

    #[inline]
    fn dir(&self, i: usize, j: usize) -> bool {
        self.marks[i * self.p + j] == DIR
    }

    #[inline]
    fn und(&self, i: usize, j: usize) -> bool {
        self.marks[i * self.p + j] == UND
    }

    #[inline]
    fn adjacent(&self, i: usize, j: usize) -> bool {
        self.marks[i * self.p + j] != 0 || self.marks[j * self.p + i] != 0
    }

    fn orient(&mut self, i: usize, j: usize) {
        self.marks[i * self.p + j] = DIR;
        self.marks[j * self.p + i] = 0;
    }

    /// One sweep of R1–R3 over all undirected edges; returns whether anything
    /// was oriented.
    fn apply_meek_once(&mut self) -> bool {
        let p = self.p;
        let mut changed = false;
        for a in 0..p {
            for b in 0..p {
                if !self.und(a, b) {
                    continue;
                }
                if self.r1(a, b) || self.r2(a, b) || self.r3(a, b) {
                    self.orient(a, b);
                    changed = true;
                }
            }
        }
        changed
    }

    /// R1: c → a, a — b, c and b nonadjacent ⇒ a → b.
    fn r1(&self, a: usize, b: usize) -> bool {
        (0..self.p).any(|c| c != b && self.dir(c, a) && !self.adjacent(c, b))
    }

    /// R2: a → c → b, a — b ⇒ a → b.
    fn r2(&self, a: usize, b: usize) -> bool {
        (0..self.p).any(|c| self.dir(a, c) && self.dir(c, b))
    }

    /// R3: a — c, a — d, c → b, d → b, c and d nonadjacent, a — b ⇒ a → b.
    fn r3(&self, a: usize, b: usize) -> bool {
        let cs: Vec<usize> = (0..self.p)
            .filter(|&c| self.und(a, c) && self.dir(c, b))
            .collect();
        cs.iter()
            .enumerate()
            .any(|(i, &c)| cs[i + 1..].iter().any(|&d| !self.adjacent(c, d)))
    }

    fn into_cpdag(self, labels: Vec<String>) -> Cpdag {
        let p = self.p;
        let mut directed = BTreeSet::new();
        let mut undirected = BTreeSet::new();
        for i in 0..p {
            for j in 0..p {
                if self.dir(i, j) {
                    directed.insert((i, j));
                } else if i < j && self.und(i, j) {
                    undirected.insert((i, j));
                }
            }
        }
        Cpdag {
            p,
            labels,
            directed,
            undirected,
        }
    }
}

/// Markov equivalence class of `dag`: skeleton, v-structures `a → c ← b`
/// with `a`, `b` nonadjacent, then closure under Meek rules R1–R3.
pub fn dag_to_cpdag(dag: &Dag) -> Result<Cpdag> {
    if dag.topological_order().is_none() {
        return Err(Error::CyclicInput);
    }
    let p = dag.p();
    let mut m = MarkMatrix {
        p,
        marks: vec![0; p * p],
    };
    for (u, v) in dag.edges() {
        m.marks[u * p + v] = UND;
        m.marks[v * p + u] = UND;
    }
    for c in 0..p {
        let pa = dag.parents(c);
        for (i, &a) in pa.iter().enumerate() {
            for &b in &pa[i + 1..] {
                if !dag.adjacent(a, b) {
                    m.orient(a, c);
                    m.orient(b, c);
                }
            }
        }
    }
    while m.apply_meek_once() {}
    Ok(m.into_cpdag(dag.labels().to_vec()))
}

/// Number of unordered pairs whose edge relation differs.
pub fn shd_cpdag(a: &Cpdag, b: &Cpdag) -> Result<usize> {
    if a.p != b.p {
        return Err(Error::DimensionMismatch {
            expected: a.p,
            found: b.p,
        });
    }
    let pairs: BTreeSet<(usize, usize)> = a
        .directed
        .iter()
        .chain(&b.directed)
        .map(|&(u, v)| (u.min(v), u.max(v)))
        .chain(a.undirected.iter().copied())
        .chain(b.undirected.iter().copied())
        .collect();
    Ok(pairs
        .into_iter()
        .filter(|&(u, v)| a.status(u, v) != b.status(u, v))
        .count())
}
