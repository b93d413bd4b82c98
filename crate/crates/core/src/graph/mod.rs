//! Undirected weighted graphs, synthetic generators, edge-list IO and
//! all-pairs shortest paths.

mod apsp;
mod generators;
mod io;

use std::collections::HashSet;

pub use apsp::{apsp, Pair, PairStore};
pub use generators::{
    cartesian_product, gen_chordal_cycle, gen_grid, gen_margulis, gen_paley, gen_tree, is_prime,
    margulis_generator_edges, rooted_product,
};
pub use io::{load_edge_list, write_edge_list, write_node_map, LoadedGraph};

use crate::error::{Error, Result};

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub w: f64,
}

/// Simple undirected graph with contiguous node ids `0..num_nodes`.
///
/// Edges are stored canonically with `u < v`. Construction rejects
/// self-loops and non-positive weights; duplicate edges keep the first weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    num_nodes: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(NodeId, f64)>>,
}

impl Graph {
    pub fn new<I>(num_nodes: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId, f64)>,
    {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (a, b, w) in edges {
            if a >= num_nodes || b >= num_nodes {
                return Err(Error::Validation(format!(
                    "edge ({a}, {b}) out of range for {num_nodes} nodes"
                )));
            }
            if a == b {
                return Err(Error::Validation(format!("self-loop on node {a}")));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::Validation(format!(
                    "edge ({a}, {b}) has non-positive weight {w}"
                )));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if seen.insert((u, v)) {
                out.push(Edge { u, v, w });
            }
        }
        Ok(Self::from_canonical(num_nodes, out))
    }

    /// Unit-weight graph from an edge list that may contain self-loops and
    /// repeated edges; both are dropped.
    pub fn simplified<I>(num_nodes: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        Self::new(
            num_nodes,
            edges
                .into_iter()
                .filter(|(a, b)| a != b)
                .map(|(a, b)| (a, b, 1.0)),
        )
    }

    pub fn unweighted<I>(num_nodes: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        Self::new(num_nodes, edges.into_iter().map(|(a, b)| (a, b, 1.0)))
    }

    fn from_canonical(num_nodes: usize, edges: Vec<Edge>) -> Self {
        let mut adjacency = vec![Vec::new(); num_nodes];
        for e in &edges {
            adjacency[e.u].push((e.v, e.w));
            adjacency[e.v].push((e.u, e.w));
        }
        Self {
            num_nodes,
            edges,
            adjacency,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, u: NodeId) -> &[(NodeId, f64)] {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adjacency[u].len()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adjacency[u].iter().any(|&(x, _)| x == v)
    }

    /// True when every edge has weight exactly 1.
    pub fn is_unit_weight(&self) -> bool {
        self.edges.iter().all(|e| e.w == 1.0)
    }

    /// Neighbor id lists, without weights.
    pub fn neighbor_lists(&self) -> Vec<Vec<NodeId>> {
        self.adjacency
            .iter()
            .map(|adj| adj.iter().map(|&(v, _)| v).collect())
            .collect()
    }

    /// Number of connected components.
    pub fn num_components(&self) -> usize {
        let mut seen = vec![false; self.num_nodes];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..self.num_nodes {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &(v, _) in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        count
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_self_loops_and_bad_weights() {
        assert!(Graph::new(3, [(1, 1, 1.0)]).is_err());
        assert!(Graph::new(3, [(0, 1, 0.0)]).is_err());
        assert!(Graph::new(3, [(0, 1, -2.0)]).is_err());
        assert!(Graph::new(3, [(0, 3, 1.0)]).is_err());
    }

    #[test]
    fn duplicate_edges_keep_first_weight() {
        let g = Graph::new(3, [(0, 1, 2.0), (1, 0, 5.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(g.num_edges(), 2);
        assert_eq!(g.edges()[0], Edge { u: 0, v: 1, w: 2.0 });
        assert!(!g.is_unit_weight());
    }

    #[test]
    fn simplified_drops_loops() {
        let g = Graph::simplified(3, [(0, 0), (0, 1), (1, 0), (2, 1)]).unwrap();
        assert_eq!(g.num_edges(), 2);
        assert_eq!(g.degree(1), 2);
    }

    #[test]
    fn components() {
        let g = Graph::unweighted(5, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(g.num_components(), 3);
    }
}
