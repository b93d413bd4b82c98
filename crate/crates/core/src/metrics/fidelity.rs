use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, PairStore};
use crate::space::PointBuffer;

pub const DEFAULT_HISTOGRAM_BINS: usize = 101;

/// Embedding distances below this are treated as exact ties when ranking.
pub const RANK_TIE_EPS: f64 = 1e-12;

/// Mean of `|d_Y - d_G| / d_G` over all stored pairs. NaN for an empty store.
pub fn d_avg(points: &PointBuffer, pairs: &PairStore) -> f64 {
    let total: f64 = pairs
        .pairs()
        .iter()
        .map(|p| {
            let d = points.distance(p.u as usize, p.v as usize);
            (d - p.dist).abs() / p.dist
        })
        .sum();
    total / pairs.len() as f64
}

/// Signed distortion `d_Y / d_G - 1` of every stored pair, in store order.
pub fn distortions(points: &PointBuffer, pairs: &PairStore) -> Vec<f64> {
    pairs
        .pairs()
        .iter()
        .map(|p| points.distance(p.u as usize, p.v as usize) / p.dist - 1.0)
        .collect()
}

/// Fraction of `values` inside the closed interval `[lo, hi]`.
pub fn fraction_within(values: &[f64], lo: f64, hi: f64) -> f64 {
    let inside = values.iter().filter(|&&v| v >= lo && v <= hi).count();
    inside as f64 / values.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub bin_low: f64,
    pub bin_high: f64,
    pub count: usize,
}

/// Uniform histogram of signed distortions over `[min, max]` of the observed
/// values. When all values coincide the result is a single zero-width bin.
pub fn distortion_histogram(
    points: &PointBuffer,
    pairs: &PairStore,
    bins: usize,
) -> Result<Vec<HistogramBin>> {
    if bins == 0 {
        return Err(Error::InvalidArgument(
            "histogram needs at least one bin".into(),
        ));
    }
    Ok(histogram(&distortions(points, pairs), bins))
}

pub(crate) fn histogram(values: &[f64], bins: usize) -> Vec<HistogramBin> {
    if values.is_empty() {
        return Vec::new();
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return vec![HistogramBin {
            bin_low: lo,
            bin_high: hi,
            count: values.len(),
        }];
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let idx = (((v - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            bin_low: lo + width * i as f64,
            bin_high: if i + 1 == bins {
                hi
            } else {
                lo + width * (i + 1) as f64
            },
            count,
        })
        .collect()
}

/// Mean average precision of an embedding against an unweighted graph.
///
/// For anchor `a` and each true neighbor `b`, the retrieved set is every
/// other node at embedding distance `<= d(a, b)` (closed ball, ties
/// included, `a` excluded). Nodes of degree zero are skipped.
pub fn map_score(points: &PointBuffer, graph: &Graph) -> Result<f64> {
    if !graph.is_unit_weight() {
        return Err(Error::Validation(
            "mean average precision is defined for unweighted graphs only".into(),
        ));
    }
    if points.len() != graph.num_nodes() {
        return Err(Error::InvalidArgument(format!(
            "{} points for {} nodes",
            points.len(),
            graph.num_nodes()
        )));
    }
    Ok(map_from_neighbors(points, &graph.neighbor_lists()))
}

/// [`map_score`] over explicit neighbor lists.
pub fn map_from_neighbors(points: &PointBuffer, neighbors: &[Vec<NodeId>]) -> f64 {
    let n = neighbors.len();
    let per_anchor: Vec<Option<f64>> = (0..n)
        .into_par_iter()
        .map(|a| {
            let nbrs = &neighbors[a];
            if nbrs.is_empty() {
                return None;
            }
            let snap = |d: f64| if d < RANK_TIE_EPS { 0.0 } else { d };
            let mut all: Vec<f64> = (0..n)
                .filter(|&b| b != a)
                .map(|b| snap(points.distance(a, b)))
                .collect();
            all.sort_by(f64::total_cmp);
            let mut near: Vec<f64> = nbrs.iter().map(|&b| snap(points.distance(a, b))).collect();
            near.sort_by(f64::total_cmp);
            let ap: f64 = near
                .iter()
                .map(|&r| {
                    let retrieved = all.partition_point(|&d| d <= r);
                    let relevant = near.partition_point(|&d| d <= r);
                    relevant as f64 / retrieved as f64
                })
                .sum();
            Some(ap / nbrs.len() as f64)
        })
        .collect();
    let (sum, count) = per_anchor
        .into_iter()
        .flatten()
        .fold((0.0, 0usize), |(s, c), ap| (s + ap, c + 1));
    if count == 0 {
        return f64::NAN;
    }
    sum / count as f64
}

/// Reconstruction fidelity of one embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub d_avg: f64,
    /// `None` for weighted graphs.
    pub map: Option<f64>,
    pub histogram: Vec<HistogramBin>,
}

impl FidelityReport {
    pub fn compute(points: &PointBuffer, pairs: &PairStore, bins: usize) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidArgument("no connected pairs".into()));
        }
        let map = pairs
            .is_unit_weight()
            .then(|| map_from_neighbors(points, &pairs.adjacency()));
        Ok(Self {
            d_avg: d_avg(points, pairs),
            map,
            histogram: distortion_histogram(points, pairs, bins)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;
    use crate::graph::{apsp, gen_tree};
    use crate::space::{init_points, SpaceSpec};

    fn line(coords: &[f64]) -> PointBuffer {
        PointBuffer::from_coords("l1:1".parse().unwrap(), coords.to_vec()).unwrap()
    }

    #[test]
    fn d_avg_examples() {
        let p3 = Graph::unweighted(3, [(0, 1), (1, 2)]).unwrap();
        let pairs = apsp(&p3);
        assert_eq!(d_avg(&line(&[0.0, 1.0, 2.0]), &pairs), 0.0);
        // pairs (0,1): 1 vs 1, (0,2): 1.5 vs 2, (1,2): 0.5 vs 1
        assert_relative_eq!(
            d_avg(&line(&[0.0, 1.0, 1.5]), &pairs),
            0.25,
            max_relative = 1e-15
        );
        assert!(d_avg(&line(&[0.0, 2.0, 4.0]), &pairs) > 0.0);
    }

    #[test]
    fn isometric_path_has_perfect_map() {
        let p5 = gen_tree(1, 4).unwrap();
        let pts = line(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(map_score(&pts, &p5).unwrap(), 1.0);
        assert_eq!(map_score(&pts.scaled(3.5), &p5).unwrap(), 1.0);
    }

    #[test]
    fn weighted_graph_is_rejected() {
        let g = Graph::new(2, [(0, 1, 2.0)]).unwrap();
        assert!(matches!(
            map_score(&line(&[0.0, 2.0]), &g),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn isolated_nodes_are_skipped() {
        let g = Graph::unweighted(3, [(0, 1)]).unwrap();
        // both anchors see the isolated node first: AP = 1/2 each
        assert_eq!(map_score(&line(&[0.0, 1.0, 0.5]), &g).unwrap(), 0.5);
    }

    #[test]
    fn histogram_examples() {
        let tree = gen_tree(2, 3).unwrap();
        let pairs = apsp(&tree);
        let spec: SpaceSpec = "l2:4".parse().unwrap();
        let fresh = init_points(&spec, tree.num_nodes(), 1);
        let hist = distortion_histogram(&fresh, &pairs, DEFAULT_HISTOGRAM_BINS).unwrap();
        assert_eq!(hist.len(), DEFAULT_HISTOGRAM_BINS);
        assert_eq!(hist.iter().map(|b| b.count).sum::<usize>(), pairs.len());
        assert!(hist[0].bin_low >= -1.0 && hist.last().unwrap().bin_high < -0.99);

        let spike = histogram(&[0.0; 10], 101);
        assert_eq!(
            spike,
            vec![HistogramBin {
                bin_low: 0.0,
                bin_high: 0.0,
                count: 10
            }]
        );
        assert!(distortion_histogram(&fresh, &pairs, 0).is_err());
    }

    #[test]
    fn report_on_weighted_store_has_no_map() {
        let g = Graph::new(3, [(0, 1, 1.0), (1, 2, 2.0)]).unwrap();
        let pts = line(&[0.0, 1.0, 3.0]);
        let r = FidelityReport::compute(&pts, &apsp(&g), 5).unwrap();
        assert_eq!(r.d_avg, 0.0);
        assert!(r.map.is_none());
    }
}
