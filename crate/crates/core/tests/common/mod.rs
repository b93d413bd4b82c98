//! Brute-force reference implementations and random instance builders
//! shared by the property tests and the acceptance runner.
#![allow(dead_code)]

pub mod gradcheck;

use normembed::graph::{Graph, PairStore};
use normembed::space::{Factor, Norm};
use normembed::tasks::InteractionSet;
use normembed::{PointBuffer, SpaceSpec};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random graph on `n` nodes with edge probability `p`; weights are 1 or
/// uniform in `[0.5, 3)`.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64, weighted: bool) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                let w = if weighted {
                    rng.gen_range(0.5..3.0)
                } else {
                    1.0
                };
                edges.push((u, v, w));
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

/// All-pairs distances by Floyd-Warshall; `None` marks unreachable pairs.
pub fn floyd_warshall(g: &Graph) -> Vec<Vec<Option<f64>>> {
    let n = g.num_nodes();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for e in g.edges() {
        d[e.u][e.v] = d[e.u][e.v].min(e.w);
        d[e.v][e.u] = d[e.v][e.u].min(e.w);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d.into_iter()
        .map(|row| {
            row.into_iter()
                .map(|x| x.is_finite().then_some(x))
                .collect()
        })
        .collect()
}

/// Average distortion straight from the definition over reachable pairs.
pub fn brute_d_avg(points: &PointBuffer, g: &Graph) -> f64 {
    let fw = floyd_warshall(g);
    let spec = points.spec();
    let mut sum = 0.0;
    let mut count = 0usize;
    for u in 0..g.num_nodes() {
        for v in u + 1..g.num_nodes() {
            if let Some(dg) = fw[u][v] {
                let dy = spec.distance(points.row(u), points.row(v)).unwrap();
                sum += (dy - dg).abs() / dg;
                count += 1;
            }
        }
    }
    sum / count as f64
}

/// Mean average precision by explicit neighborhood enumeration: for every
/// anchor `a` and neighbor `b`, the retrieved set holds every node other than
/// `a` no farther from `a` than `b`.
pub fn brute_map(points: &PointBuffer, g: &Graph) -> f64 {
    let n = g.num_nodes();
    let spec = points.spec();
    let dist = |a: usize, b: usize| spec.distance(points.row(a), points.row(b)).unwrap();
    let mut total = 0.0;
    let mut anchors = 0usize;
    for a in 0..n {
        let nbrs: Vec<usize> = (0..n).filter(|&b| b != a && g.has_edge(a, b)).collect();
        if nbrs.is_empty() {
            continue;
        }
        let mut ap = 0.0;
        for &b in &nbrs {
            let radius = dist(a, b);
            let ball: Vec<usize> = (0..n).filter(|&x| x != a && dist(a, x) <= radius).collect();
            let hits = ball.iter().filter(|&&x| g.has_edge(a, x)).count();
            ap += hits as f64 / ball.len() as f64;
        }
        total += ap / nbrs.len() as f64;
        anchors += 1;
    }
    total / anchors as f64
}

/// AUC by comparing every positive with every negative.
pub fn brute_auc(pos: &[f64], neg: &[f64]) -> f64 {
    let mut wins = 0.0;
    for &p in pos {
        for &q in neg {
            if p > q {
                wins += 1.0;
            } else if p == q {
                wins += 0.5;
            }
        }
    }
    wins / (pos.len() * neg.len()) as f64
}

/// Rank of the target after a full descending sort that places ties ahead
/// of the target.
pub fn brute_rank(target: f64, others: &[f64]) -> usize {
    let mut all: Vec<(f64, bool)> = others.iter().map(|&s| (s, false)).collect();
    all.push((target, true));
    all.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    all.iter().position(|x| x.1).unwrap() + 1
}

pub fn random_factor(rng: &mut ChaCha8Rng) -> Factor {
    let dim = rng.gen_range(1..=5);
    match rng.gen_range(0..4) {
        0 => Factor::Lp {
            dim,
            norm: Norm::L1,
        },
        1 => Factor::Lp {
            dim,
            norm: Norm::L2,
        },
        2 => Factor::Lp {
            dim,
            norm: Norm::LInf,
        },
        _ => Factor::Poincare {
            dim,
            curvature: -rng.gen_range(0.25..4.0),
        },
    }
}

/// A single factor or a product of up to four.
pub fn random_spec(rng: &mut ChaCha8Rng) -> SpaceSpec {
    let k = if rng.gen_bool(0.5) {
        1
    } else {
        rng.gen_range(2..=4)
    };
    SpaceSpec::new((0..k).map(|_| random_factor(rng)).collect()).unwrap()
}

/// A random feasible point: normed blocks uniform in `[-2, 2)`, Poincaré
/// blocks with radius at most 0.9 of the ball's.
pub fn random_point(rng: &mut ChaCha8Rng, spec: &SpaceSpec) -> Vec<f64> {
    let mut x = Vec::with_capacity(spec.total_dim());
    for f in spec.factors() {
        match *f {
            Factor::Lp { dim, .. } => x.extend((0..dim).map(|_| rng.gen_range(-2.0..2.0))),
            Factor::Poincare { dim, curvature } => {
                let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-12);
                let radius = rng.gen_range(0.0..0.9) / (-curvature).sqrt();
                x.extend(v.iter().map(|a| a / norm * radius));
            }
        }
    }
    x
}

pub fn random_points(rng: &mut ChaCha8Rng, spec: &SpaceSpec, n: usize) -> PointBuffer {
    let coords = (0..n).flat_map(|_| random_point(rng, spec)).collect();
    PointBuffer::from_coords(spec.clone(), coords).unwrap()
}

/// Integer coordinates in a small box, so that many distances tie.
pub fn lattice_points(rng: &mut ChaCha8Rng, spec: &SpaceSpec, n: usize) -> PointBuffer {
    let coords = (0..n * spec.total_dim())
        .map(|_| rng.gen_range(-2..=2) as f64)
        .collect();
    PointBuffer::from_coords(spec.clone(), coords).unwrap()
}

/// Checks the pair store against Floyd-Warshall: same reachable pairs, same
/// distances within `tol`.
pub fn apsp_matches(g: &Graph, store: &PairStore, tol: f64) -> Result<(), String> {
    let fw = floyd_warshall(g);
    let mut expected = 0;
    for (u, row) in fw.iter().enumerate() {
        expected += row.iter().skip(u + 1).filter(|d| d.is_some()).count();
    }
    if store.len() != expected {
        return Err(format!("{} pairs, expected {expected}", store.len()));
    }
    for p in store.pairs() {
        let (u, v) = (p.u as usize, p.v as usize);
        match fw[u][v] {
            Some(d) if (d - p.dist).abs() <= tol * d.max(1.0) => {}
            other => return Err(format!("pair ({u},{v}): {} vs {other:?}", p.dist)),
        }
    }
    Ok(())
}

/// Norm-wise relative error `|a - b| / max(|a|, |b|, floor)`.
pub fn rel_err(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let diff = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / na.max(nb).max(floor)
}

/// Central differences of `f` at `x` with step `h`.
pub fn central_diff<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Whether `d(x, y)` is differentiable with margin `gap` at every factor:
/// no near-zero coordinate differences for `l1`, a unique maximum for
/// `linf`, and distinct points everywhere.
pub fn is_smooth(spec: &SpaceSpec, x: &[f64], y: &[f64], gap: f64) -> bool {
    let mut off = 0;
    for f in spec.factors() {
        let dim = f.dim();
        let diffs: Vec<f64> = (off..off + dim).map(|i| (x[i] - y[i]).abs()).collect();
        off += dim;
        let ok = match f {
            Factor::Lp { norm: Norm::L1, .. } => diffs.iter().all(|&d| d > gap),
            Factor::Lp {
                norm: Norm::LInf, ..
            } => {
                let mut s = diffs.clone();
                s.sort_by(|a, b| b.total_cmp(a));
                s[0] > gap && (s.len() == 1 || s[0] - s[1] > gap)
            }
            _ => diffs.iter().map(|d| d * d).sum::<f64>().sqrt() > gap,
        };
        if !ok {
            return false;
        }
    }
    true
}

/// `blocks` groups of users and items; every user interacts with `per_user`
/// random items of its own group and nothing else. One held-out test and
/// dev item per user.
pub fn planted_blocks(
    blocks: usize,
    users: usize,
    items: usize,
    per_user: usize,
    seed: u64,
) -> InteractionSet {
    let mut r = rng(seed);
    let mut pairs = Vec::new();
    for b in 0..blocks {
        for u in 0..users {
            let mut own: Vec<usize> = (0..items).map(|i| b * items + i).collect();
            own.shuffle(&mut r);
            pairs.extend(own[..per_user].iter().map(|&i| (b * users + u, i)));
        }
    }
    InteractionSet::leave_one_out(blocks * users, blocks * items, &pairs, seed).unwrap()
}

/// Two disjoint copies of the complete graph on `k` nodes.
pub fn two_cliques(k: usize) -> Graph {
    let clique =
        move |off: usize| (0..k).flat_map(move |u| (u + 1..k).map(move |v| (off + u, off + v)));
    Graph::unweighted(2 * k, clique(0).chain(clique(k))).unwrap()
}
