use std::collections::HashSet;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::recsys::{sigmoid, softplus};
use crate::engine::{clip_global_norm_parts, BatchSize, Optimizer, TrainConfig};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metrics::auc;
use crate::space::{init_points, two_rows_mut, PointBuffer, SpaceSpec};

pub const INIT_RADIUS: f64 = 2.0;
pub const INIT_TEMPERATURE: f64 = 1.0;
/// Lower bound enforced on the temperature after every update.
pub const MIN_TEMPERATURE: f64 = 1e-2;

/// Fermi-Dirac edge probability `1 / (1 + exp((d^2 - r) / t))`.
pub fn fermi_dirac(d: f64, r: f64, t: f64) -> f64 {
    sigmoid(fermi_dirac_logit(d, r, t))
}

#[inline]
fn fermi_dirac_logit(d: f64, r: f64, t: f64) -> f64 {
    (r - d * d) / t
}

/// Node embeddings plus the decoder's radius `r` and temperature `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkPredModel {
    points: PointBuffer,
    r: f64,
    t: f64,
}

impl LinkPredModel {
    pub fn new(points: PointBuffer, r: f64, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() || !r.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "need finite r and t > 0, got r={r}, t={t}"
            )));
        }
        Ok(Self { points, r, t })
    }

    pub fn points(&self) -> &PointBuffer {
        &self.points
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn probability(&self, u: usize, v: usize) -> f64 {
        fermi_dirac(self.points.distance(u, v), self.r, self.t)
    }
}

/// Edges split 70/10/20 into train/dev/test, each paired with as many
/// sampled non-adjacent node pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSplit {
    pub train_pos: Vec<(usize, usize)>,
    pub train_neg: Vec<(usize, usize)>,
    pub dev_pos: Vec<(usize, usize)>,
    pub dev_neg: Vec<(usize, usize)>,
    pub test_pos: Vec<(usize, usize)>,
    pub test_neg: Vec<(usize, usize)>,
}

pub const TRAIN_FRACTION: f64 = 0.7;
pub const DEV_FRACTION: f64 = 0.1;

impl LinkSplit {
    pub fn new(g: &Graph, seed: u64) -> Result<Self> {
        let m = g.num_edges();
        let n = g.num_nodes();
        let n_train = (m as f64 * TRAIN_FRACTION).round() as usize;
        let n_dev = (m as f64 * DEV_FRACTION).round() as usize;
        if n_train == 0 || n_train + n_dev >= m {
            return Err(Error::InvalidArgument(format!(
                "{m} edges are too few for a train/dev/test split"
            )));
        }
        let total_pairs = n * (n - 1) / 2;
        if total_pairs - m < m {
            return Err(Error::InvalidArgument(format!(
                "graph has {} non-adjacent pairs, {m} needed",
                total_pairs - m
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.u, e.v)).collect();
        edges.shuffle(&mut rng);

        let mut negatives: Vec<(usize, usize)> = if total_pairs - m <= 2 * m {
            let mut all: Vec<(usize, usize)> = (0..n)
                .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
                .filter(|&(u, v)| !g.has_edge(u, v))
                .collect();
            all.shuffle(&mut rng);
            all.truncate(m);
            all
        } else {
            let mut seen = HashSet::with_capacity(m);
            let mut out = Vec::with_capacity(m);
            while out.len() < m {
                let u = rng.gen_range(0..n);
                let v = rng.gen_range(0..n);
                let (u, v) = (u.min(v), u.max(v));
                if u != v && !g.has_edge(u, v) && seen.insert((u, v)) {
                    out.push((u, v));
                }
            }
            out
        };

        let test_neg = negatives.split_off(n_train + n_dev);
        let dev_neg = negatives.split_off(n_train);
        let test_pos = edges.split_off(n_train + n_dev);
        let dev_pos = edges.split_off(n_train);
        Ok(Self {
            train_pos: edges,
            train_neg: negatives,
            dev_pos,
            dev_neg,
            test_pos,
            test_neg,
        })
    }

    /// Checks that no pair appears twice across all six lists.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for list in [
            &self.train_pos,
            &self.train_neg,
            &self.dev_pos,
            &self.dev_neg,
            &self.test_pos,
            &self.test_neg,
        ] {
            for &(u, v) in list {
                if !seen.insert((u.min(v), u.max(v))) {
                    return Err(Error::Validation(format!(
                        "pair ({u}, {v}) appears twice in the split"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn labeled(pos: &[(usize, usize)], neg: &[(usize, usize)]) -> Vec<(usize, usize, bool)> {
    pos.iter()
        .map(|&(u, v)| (u, v, true))
        .chain(neg.iter().map(|&(u, v)| (u, v, false)))
        .collect()
}

/// Mean binary cross-entropy of the decoder on labeled pairs.
pub fn linkpred_loss(model: &LinkPredModel, batch: &[(usize, usize, bool)]) -> f64 {
    let total: f64 = batch
        .iter()
        .map(|&(u, v, y)| {
            let z = fermi_dirac_logit(model.points.distance(u, v), model.r, model.t);
            if y {
                softplus(-z)
            } else {
                softplus(z)
            }
        })
        .sum();
    total / batch.len() as f64
}

/// Mean loss over `batch`; gradients go into `g_coords` and `g_rt = [dr, dt]`.
pub fn linkpred_loss_and_grad(
    model: &LinkPredModel,
    batch: &[(usize, usize, bool)],
    g_coords: &mut [f64],
    g_rt: &mut [f64; 2],
) -> f64 {
    let dim = model.points.dim();
    let scale = 1.0 / batch.len() as f64;
    let spec = model.points.spec();
    let mut loss = 0.0;
    for &(u, v, y) in batch {
        let d = model.points.distance(u, v);
        let z = fermi_dirac_logit(d, model.r, model.t);
        loss += if y { softplus(-z) } else { softplus(z) };
        let dl_dz = scale * (sigmoid(z) - if y { 1.0 } else { 0.0 });
        let (gu, gv) = two_rows_mut(g_coords, dim, u, v);
        let t = model.t;
        spec.add_scaled_distance_grad(
            model.points.row(u),
            model.points.row(v),
            |d| dl_dz * (-2.0 * d / t),
            gu,
            gv,
        );
        g_rt[0] += dl_dz / t;
        g_rt[1] -= dl_dz * z / t;
    }
    loss * scale
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkPredReport {
    pub test_auc: f64,
    pub dev_auc: f64,
    pub best_epoch: usize,
    pub epochs_run: usize,
    /// Mean training loss per epoch.
    pub loss_curve: Vec<f64>,
    pub dev_loss_curve: Vec<f64>,
    pub wall_time_seconds: f64,
}

fn split_auc(model: &LinkPredModel, pos: &[(usize, usize)], neg: &[(usize, usize)]) -> f64 {
    let score = |&(u, v): &(usize, usize)| model.probability(u, v);
    auc(
        &pos.iter().map(score).collect::<Vec<_>>(),
        &neg.iter().map(score).collect::<Vec<_>>(),
    )
}

/// Fits shallow embeddings and the decoder's `r`, `t` by binary
/// cross-entropy on the training pairs, keeping the model with the lowest
/// dev loss and stopping after `cfg.patience` epochs without improvement.
pub fn train_linkpred(
    g: &Graph,
    split: &LinkSplit,
    spec: &SpaceSpec,
    cfg: &TrainConfig,
) -> Result<(LinkPredModel, LinkPredReport)> {
    cfg.validate()?;
    split.validate()?;
    let n = g.num_nodes();
    for list in [&split.train_pos, &split.dev_pos, &split.test_pos] {
        if let Some(&(u, v)) = list
            .iter()
            .find(|&&(u, v)| u >= n || v >= n || !g.has_edge(u, v))
        {
            return Err(Error::Validation(format!(
                "positive pair ({u}, {v}) is not an edge"
            )));
        }
    }
    for list in [&split.train_neg, &split.dev_neg, &split.test_neg] {
        if let Some(&(u, v)) = list
            .iter()
            .find(|&&(u, v)| u >= n || v >= n || u == v || g.has_edge(u, v))
        {
            return Err(Error::Validation(format!(
                "negative pair ({u}, {v}) is not a non-edge"
            )));
        }
    }
    let train = labeled(&split.train_pos, &split.train_neg);
    let dev = labeled(&split.dev_pos, &split.dev_neg);
    if train.is_empty() {
        return Err(Error::InvalidArgument("no training pairs".into()));
    }
    let start = Instant::now();
    let riemannian = spec.has_poincare();
    let dim = spec.total_dim();
    let mut model = LinkPredModel::new(
        init_points(spec, n, cfg.seed),
        INIT_RADIUS,
        INIT_TEMPERATURE,
    )?;
    let mut g_coords = vec![0.0; model.points.coords().len()];
    let mut opt_coords = Optimizer::for_points(cfg.optimizer, spec, n);
    let mut opt_rt = Optimizer::new(cfg.optimizer, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_0f_ba7c4);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let batch_len = match cfg.batch_size {
        BatchSize::Full => train.len(),
        BatchSize::Pairs(b) => b.min(train.len()),
    };
    let mut batch = Vec::with_capacity(batch_len);

    let mut best = model.clone();
    let mut best_loss = f64::INFINITY;
    let mut best_epoch = 0;
    let mut stale = 0;
    let mut loss_curve = Vec::new();
    let mut dev_loss_curve = Vec::new();

    for epoch in 0..cfg.max_epochs {
        let lr = cfg.learning_rate_at(epoch);
        if batch_len < train.len() {
            order.shuffle(&mut rng);
        }
        let mut epoch_loss = 0.0;
        let mut batches = 0;
        for (batch_idx, chunk) in order.chunks(batch_len).enumerate() {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| train[i]));
            g_coords.iter_mut().for_each(|x| *x = 0.0);
            let mut g_rt = [0.0; 2];
            let loss = linkpred_loss_and_grad(&model, &batch, &mut g_coords, &mut g_rt);
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch: epoch + 1,
                    batch: batch_idx,
                });
            }
            epoch_loss += loss;
            batches += 1;
            if riemannian {
                for (row, gr) in model
                    .points
                    .coords()
                    .chunks(dim)
                    .zip(g_coords.chunks_mut(dim))
                {
                    spec.riemannian_scale(row, gr);
                }
            }
            clip_global_norm_parts(&mut [&mut g_coords, &mut g_rt], cfg.max_grad_norm);
            opt_coords.step(model.points.coords_mut(), &g_coords, lr);
            let mut rt = [model.r, model.t];
            opt_rt.step(&mut rt, &g_rt, lr);
            model.r = rt[0];
            model.t = rt[1].max(MIN_TEMPERATURE);
            if riemannian {
                model.points.project_all();
            }
        }
        loss_curve.push(epoch_loss / batches as f64);
        let monitored = if dev.is_empty() {
            linkpred_loss(&model, &train)
        } else {
            linkpred_loss(&model, &dev)
        };
        dev_loss_curve.push(monitored);
        if monitored < best_loss {
            best_loss = monitored;
            best.clone_from(&model);
            best_epoch = epoch + 1;
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
    }

    let report = LinkPredReport {
        test_auc: split_auc(&best, &split.test_pos, &split.test_neg),
        dev_auc: split_auc(&best, &split.dev_pos, &split.dev_neg),
        best_epoch,
        epochs_run: loss_curve.len(),
        loss_curve,
        dev_loss_curve,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    Ok((best, report))
}
