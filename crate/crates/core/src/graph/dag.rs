use crate::error::{Error, Result};

/// Directed acyclic graph stored as sorted parent lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    parents: Vec<Vec<usize>>,
    labels: Vec<String>,
}

pub(crate) fn default_labels(p: usize) -> Vec<String> {
    (0..p).map(|i| format!("x{i}")).collect()
}

impl Dag {
    pub fn empty(p: usize) -> Self {
        Self {
            parents: vec![Vec::new(); p],
            labels: default_labels(p),
        }
    }

    /// Builds a DAG from parent lists, rejecting self-loops, out-of-range ids
    /// and cycles.
    pub fn new(mut parents: Vec<Vec<usize>>) -> Result<Self> {
        let p = parents.len();
        for (v, pa) in parents.iter_mut().enumerate() {
            pa.sort_unstable();
            pa.dedup();
            if let Some(&u) = pa.iter().find(|&&u| u >= p || u == v) {
                return Err(Error::InvalidInput(format!(
                    "invalid parent {u} for node {v}"
                )));
            }
        }
        let dag = Self {
            parents,
            labels: default_labels(p),
        };
        if dag.topological_order().is_none() {
            return Err(Error::CyclicInput);
        }
        Ok(dag)
    }

    pub fn from_edges(p: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut parents = vec![Vec::new(); p];
        for &(u, v) in edges {
            if v >= p {
                return Err(Error::InvalidInput(format!("node {v} out of range")));
            }
            parents[v].push(u);
        }
        Self::new(parents)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.p() {
            return Err(Error::DimensionMismatch {
                expected: self.p(),
                found: labels.len(),
            });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn p(&self) -> usize {
        self.parents.len()
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn parent_sets(&self) -> &[Vec<usize>] {
        &self.parents
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.parents[v].binary_search(&u).is_ok()
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.has_edge(u, v) || self.has_edge(v, u)
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    /// Edges `(parent, child)` sorted by child, then parent.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parents
            .iter()
            .enumerate()
            .flat_map(|(v, pa)| pa.iter().map(move |&u| (u, v)))
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.p()];
        for (u, v) in self.edges() {
            ch[u].push(v);
        }
        ch
    }

    /// Kahn's algorithm with smallest-id-first tie breaking; `None` on a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let p = self.p();
        let children = self.children();
        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: std::collections::BTreeSet<usize> =
            (0..p).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(p);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &c in &children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        (order.len() == p).then_some(order)
    }

    /// An edge `u → v` is covered when `Pa(v) = Pa(u) ∪ {u}`; reversing it
    /// yields a Markov-equivalent DAG.
    pub fn is_covered(&self, u: usize, v: usize) -> bool {
        if !self.has_edge(u, v) {
            return false;
        }
        let mut expect = self.parents[u].clone();
        expect.push(u);
        expect.sort_unstable();
        expect == self.parents[v]
    }

    /// Returns a copy with edge `u → v` replaced by `v → u`. The caller is
    /// responsible for acyclicity (guaranteed for covered edges).
    pub fn reversed(&self, u: usize, v: usize) -> Self {
        let mut parents = self.parents.clone();
        parents[v].retain(|&x| x != u);
        parents[u].push(v);
        parents[u].sort_unstable();
        Self {
            parents,
            labels: self.labels.clone(),
        }
    }
}
