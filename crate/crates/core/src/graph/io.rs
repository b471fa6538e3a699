//! Plain-text graph format.
//!
//! ```text
//! nodes: a,b,c
//! # comment
//! a -> b
//! b -- c
//! ```
//!
//! The first non-blank, non-comment line names the nodes. Each following line
//! holds one edge: `->` for directed, `--` for undirected (CPDAG files only).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{Cpdag, Dag};
use crate::error::{Error, Result};

/// Raw contents of a graph file, before interpretation as a DAG or CPDAG.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphText {
    pub labels: Vec<String>,
    pub directed: Vec<(usize, usize)>,
    pub undirected: Vec<(usize, usize)>,
    /// Line number of the first undirected edge, for error reporting.
    first_undirected_line: Option<usize>,
}

impl GraphText {
    pub fn into_dag(self) -> Result<Dag> {
        if let Some(line) = self.first_undirected_line {
            return Err(Error::parse(line, "undirected edge in a DAG file"));
        }
        Dag::from_edges(self.labels.len(), &self.directed)?.with_labels(self.labels)
    }

    pub fn into_cpdag(self) -> Result<Cpdag> {
        Cpdag::new(self.labels.len(), self.directed, self.undirected)?.with_labels(self.labels)
    }
}

fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(head, _)| head).trim()
}

fn valid_label(s: &str) -> bool {
    !s.is_empty()
        && !s.contains(',')
        && !s.contains("->")
        && !s.contains("--")
        && !s.chars().any(char::is_whitespace)
}

pub fn parse_graph(text: &str) -> Result<GraphText> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, strip_comment(l)));
    let (header_line, header) = lines
        .by_ref()
        .find(|(_, l)| !l.is_empty())
        .ok_or_else(|| Error::parse(1, "missing `nodes:` line"))?;
    let names = header
        .strip_prefix("nodes:")
        .ok_or_else(|| Error::parse(header_line, "expected `nodes: <labels>`"))?;

    let mut labels = Vec::new();
    let mut ids = HashMap::new();
    for name in names.split(',').map(str::trim) {
        if !valid_label(name) {
            return Err(Error::parse(
                header_line,
                format!("invalid node label `{name}`"),
            ));
        }
        if ids.insert(name.to_string(), labels.len()).is_some() {
            return Err(Error::parse(
                header_line,
                format!("duplicate node label `{name}`"),
            ));
        }
        labels.push(name.to_string());
    }

    let mut out = GraphText {
        labels,
        directed: Vec::new(),
        undirected: Vec::new(),
        first_undirected_line: None,
    };
    let lookup = |line: usize, name: &str| {
        ids.get(name).copied().ok_or_else(|| Error::UnknownNode {
            line,
            label: name.to_string(),
        })
    };
    for (line, body) in lines {
        if body.is_empty() {
            continue;
        }
        let (lhs, rhs, directed) = if let Some((a, b)) = body.split_once("->") {
            (a, b, true)
        } else if let Some((a, b)) = body.split_once("--") {
            (a, b, false)
        } else {
            return Err(Error::parse(
                line,
                format!("expected `A -> B` or `A -- B`, got `{body}`"),
            ));
        };
        let (u, v) = (lookup(line, lhs.trim())?, lookup(line, rhs.trim())?);
        if u == v {
            return Err(Error::parse(line, "self-loop"));
        }
        if directed {
            out.directed.push((u, v));
        } else {
            out.first_undirected_line.get_or_insert(line);
            out.undirected.push((u, v));
        }
    }
    Ok(out)
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<GraphText> {
    parse_graph(&std::fs::read_to_string(path)?)
}

/// Reads a DAG from an edge-list file.
pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Dag> {
    read_graph(path)?.into_dag()
}

pub fn read_cpdag(path: impl AsRef<Path>) -> Result<Cpdag> {
    read_graph(path)?.into_cpdag()
}

/// Graph kinds that can be serialized.
pub trait ToGraphText {
    fn to_graph_text(&self) -> String;
}

fn render(labels: &[String], mut edges: Vec<(usize, usize, bool)>) -> String {
    edges.sort_by_key(|&(u, v, _)| (u.min(v), u.max(v)));
    let mut s = format!("nodes: {}\n", labels.join(","));
    for (u, v, directed) in edges {
        let arrow = if directed { "->" } else { "--" };
        let _ = writeln!(s, "{} {arrow} {}", labels[u], labels[v]);
    }
    s
}

impl ToGraphText for Dag {
    fn to_graph_text(&self) -> String {
        render(
            self.labels(),
            self.edges().map(|(u, v)| (u, v, true)).collect(),
        )
    }
}

impl ToGraphText for Cpdag {
    fn to_graph_text(&self) -> String {
        let edges = self
            .directed()
            .iter()
            .map(|&(u, v)| (u, v, true))
            .chain(self.undirected().iter().map(|&(u, v)| (u, v, false)))
            .collect();
        render(self.labels(), edges)
    }
}

pub fn write_graph(path: impl AsRef<Path>, graph: &impl ToGraphText) -> Result<()> {
    std::fs::write(path, graph.to_graph_text())?;
    Ok(())
}
