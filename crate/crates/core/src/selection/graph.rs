use serde::{Deserialize, Serialize};

use crate::composition::LogratioSpec;
use crate::error::{CodaError, Result};

/// Undirected multigraph with one vertex per part mentioned and one edge per
/// pairwise logratio.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogratioGraph {
    pub vertices: Vec<String>,
    /// Edges as indices into `vertices`, in input order.
    pub edges: Vec<(usize, usize)>,
    pub connected: bool,
    pub acyclic: bool,
    pub is_tree: bool,
}

/// Graph of a set of pairwise logratios. Vertices are the parts mentioned, in
/// part order; connectivity and cycles are found by depth-first traversal.
pub fn plr_graph(specs: &[LogratioSpec], part_names: &[String]) -> Result<LogratioGraph> {
    let mut parts: Vec<usize> = Vec::new();
    for spec in specs {
        if !spec.is_plr() {
            return Err(CodaError::InvalidLogratio(format!(
                "{} is not a pairwise logratio",
                spec.label(part_names)
            )));
        }
        parts.push(spec.numerator()[0]);
        parts.push(spec.denominator()[0]);
    }
    parts.sort_unstable();
    parts.dedup();
    let vertex_of = |p: usize| parts.binary_search(&p).expect("part collected above");
    let edges: Vec<(usize, usize)> = specs
        .iter()
        .map(|s| (vertex_of(s.numerator()[0]), vertex_of(s.denominator()[0])))
        .collect();

    let n = parts.len();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, &(a, b)) in edges.iter().enumerate() {
        adjacency[a].push(e);
        adjacency[b].push(e);
    }
    let mut seen = vec![false; n];
    let mut components = 0;
    let mut acyclic = true;
    let mut used_edge = vec![false; edges.len()];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &e in &adjacency[v] {
                if used_edge[e] {
                    continue;
                }
                used_edge[e] = true;
                let (a, b) = edges[e];
                let w = if a == v { b } else { a };
                if seen[w] {
                    acyclic = false;
                } else {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    let connected = components <= 1;
    Ok(LogratioGraph {
        vertices: parts
            .iter()
            .map(|&p| part_names.get(p).cloned().unwrap_or_else(|| format!("#{p}")))
            .collect(),
        edges,
        connected,
        acyclic,
        is_tree: n > 0 && connected && acyclic,
    })
}
