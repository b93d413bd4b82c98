use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rayon::prelude::*;

use super::{Graph, NodeId};

/// One connected unordered node pair with `u < v` and its graph distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair {
    pub u: u32,
    pub v: u32,
    pub dist: f64,
}

/// Shortest-path distances for every connected unordered pair of a graph:
/// the training targets of the reconstruction loss.
#[derive(Debug, Clone, PartialEq)]
pub struct PairStore {
    num_nodes: usize,
    unit_weight: bool,
    pairs: Vec<Pair>,
}

impl PairStore {
    pub fn from_pairs(num_nodes: usize, unit_weight: bool, pairs: Vec<Pair>) -> Self {
        debug_assert!(pairs
            .iter()
            .all(|p| p.u < p.v && (p.v as usize) < num_nodes && p.dist > 0.0));
        Self {
            num_nodes,
            unit_weight,
            pairs,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// True if the source graph had unit weights only, in which case pairs at
    /// distance 1 are exactly its edges.
    pub fn is_unit_weight(&self) -> bool {
        self.unit_weight
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Neighbor lists rebuilt from distance-1 pairs. Only meaningful for
    /// unit-weight graphs.
    pub fn adjacency(&self) -> Vec<Vec<NodeId>> {
        let mut adj = vec![Vec::new(); self.num_nodes];
        for p in self.pairs.iter().filter(|p| p.dist == 1.0) {
            adj[p.u as usize].push(p.v as NodeId);
            adj[p.v as usize].push(p.u as NodeId);
        }
        adj
    }

    /// Subset of pairs selected by index, keeping node count and weight flag.
    pub fn select(&self, indices: &[usize]) -> PairStore {
        PairStore {
            num_nodes: self.num_nodes,
            unit_weight: self.unit_weight,
            pairs: indices.iter().map(|&i| self.pairs[i]).collect(),
        }
    }
}

fn bfs_from(g: &Graph, source: NodeId) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; g.num_nodes()];
    let mut queue = VecDeque::new();
    dist[source] = 0.0;
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let next = dist[u] + 1.0;
        for &(v, _) in g.neighbors(u) {
            if dist[v].is_infinite() {
                dist[v] = next;
                queue.push_back(v);
            }
        }
    }
    dist
}

#[derive(PartialEq)]
struct Frontier {
    dist: f64,
    node: NodeId,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra_from(g: &Graph, source: NodeId) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; g.num_nodes()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Frontier {
        dist: 0.0,
        node: source,
    });
    while let Some(Frontier { dist: d, node: u }) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in g.neighbors(u) {
            let candidate = d + w;
            if candidate < dist[v] {
                dist[v] = candidate;
                heap.push(Frontier {
                    dist: candidate,
                    node: v,
                });
            }
        }
    }
    dist
}

/// All-pairs shortest paths. BFS per source on unit-weight graphs, Dijkstra
/// otherwise. Sources run in parallel and are merged in node order, so the
/// output is identical regardless of thread count. Unreachable pairs are
/// omitted.
pub fn apsp(g: &Graph) -> PairStore {
    let unit = g.is_unit_weight();
    let per_source: Vec<Vec<Pair>> = (0..g.num_nodes())
        .into_par_iter()
        .map(|u| {
            let dist = if unit {
                bfs_from(g, u)
            } else {
                dijkstra_from(g, u)
            };
            dist.iter()
                .enumerate()
                .skip(u + 1)
                .filter(|(_, d)| d.is_finite())
                .map(|(v, &d)| Pair {
                    u: u as u32,
                    v: v as u32,
                    dist: d,
                })
                .collect()
        })
        .collect();
    PairStore {
        num_nodes: g.num_nodes(),
        unit_weight: unit,
        pairs: per_source.into_iter().flatten().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_grid, gen_tree};

    #[test]
    fn path_distances() {
        let p3 = Graph::unweighted(3, [(0, 1), (1, 2)]).unwrap();
        let store = apsp(&p3);
        assert_eq!(store.len(), 3);
        assert_eq!(
            store.pairs()[1],
            Pair {
                u: 0,
                v: 2,
                dist: 2.0
            }
        );
    }

    #[test]
    fn grid_corner_to_corner() {
        let g = gen_grid(&[5, 5]).unwrap();
        let store = apsp(&g);
        let corner = store
            .pairs()
            .iter()
            .find(|p| p.u == 0 && p.v == 24)
            .unwrap();
        assert_eq!(corner.dist, 8.0);
    }

    #[test]
    fn unreachable_pairs_are_omitted() {
        let g = Graph::unweighted(4, [(0, 1), (2, 3)]).unwrap();
        let store = apsp(&g);
        assert_eq!(store.len(), 2);
    }

    #[test]
    fn weighted_uses_label_setting() {
        let g = Graph::new(3, [(0, 1, 1.5), (1, 2, 0.25), (0, 2, 3.0)]).unwrap();
        let store = apsp(&g);
        assert!(!store.is_unit_weight());
        assert_eq!(store.pairs()[1].dist, 1.75);
    }

    #[test]
    fn tree_pair_count() {
        let store = apsp(&gen_tree(3, 5).unwrap());
        assert_eq!(store.len(), 66_066);
        let adj = store.adjacency();
        assert_eq!(adj.iter().map(Vec::len).sum::<usize>(), 2 * 363);
    }
}
