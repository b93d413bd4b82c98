use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::interactions::InteractionSet;
use crate::engine::{clip_global_norm_parts, BatchSize, Optimizer, TrainConfig};
use crate::error::{Error, Result};
use crate::metrics::{hr_at_k, ndcg_at_k, rank_of_target};
use crate::space::{init_points, two_rows_mut, PointBuffer, SpaceSpec};

pub const DEFAULT_MARGIN: f64 = 1.0;
/// Sampled negatives per user for the hinge loss.
pub const HINGE_NEGATIVES: usize = 100;
/// Sampled negatives ranked against each held-out item.
pub const EVAL_NEGATIVES: usize = 100;
pub const TOP_K: usize = 10;
/// Learning-rate multiplier applied once the dev metric plateaus.
pub const PLATEAU_DECAY: f64 = 0.2;

const EVAL_SALT: u64 = 0x0e7a_1ce5;
const EPOCH_MIX: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecsysLoss {
    Hinge,
    Bce,
}

impl fmt::Display for RecsysLoss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RecsysLoss::Hinge => "hinge",
            RecsysLoss::Bce => "bce",
        })
    }
}

impl FromStr for RecsysLoss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hinge" => Ok(RecsysLoss::Hinge),
            "bce" => Ok(RecsysLoss::Bce),
            _ => Err(Error::InvalidArgument(format!(
                "unknown recommender loss `{s}` (expected hinge or bce)"
            ))),
        }
    }
}

/// Users and items embedded as one entity set, users first, with a
/// left-hand and right-hand bias per entity.
#[derive(Debug, Clone, PartialEq)]
pub struct RecsysModel {
    points: PointBuffer,
    num_users: usize,
    bias_lhs: Vec<f64>,
    bias_rhs: Vec<f64>,
    margin: f64,
    loss_kind: RecsysLoss,
}

impl RecsysModel {
    /// Random initial coordinates and zero biases.
    pub fn new(
        spec: &SpaceSpec,
        num_users: usize,
        num_items: usize,
        margin: f64,
        loss_kind: RecsysLoss,
        seed: u64,
    ) -> Result<Self> {
        let n = num_users + num_items;
        Self::from_parts(
            init_points(spec, n, seed),
            num_users,
            vec![0.0; n],
            vec![0.0; n],
            margin,
            loss_kind,
        )
    }

    pub fn from_parts(
        points: PointBuffer,
        num_users: usize,
        bias_lhs: Vec<f64>,
        bias_rhs: Vec<f64>,
        margin: f64,
        loss_kind: RecsysLoss,
    ) -> Result<Self> {
        let n = points.len();
        if num_users > n || bias_lhs.len() != n || bias_rhs.len() != n {
            return Err(Error::Validation(format!(
                "{n} entities, {num_users} users, {} and {} biases",
                bias_lhs.len(),
                bias_rhs.len()
            )));
        }
        if !bias_lhs.iter().chain(&bias_rhs).all(|b| b.is_finite()) {
            return Err(Error::Validation("biases must be finite".into()));
        }
        if !(margin > 0.0) || !margin.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "margin must be positive, got {margin}"
            )));
        }
        Ok(Self {
            points,
            num_users,
            bias_lhs,
            bias_rhs,
            margin,
            loss_kind,
        })
    }

    pub fn points(&self) -> &PointBuffer {
        &self.points
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_items(&self) -> usize {
        self.points.len() - self.num_users
    }

    pub fn bias_lhs(&self) -> &[f64] {
        &self.bias_lhs
    }

    pub fn bias_rhs(&self) -> &[f64] {
        &self.bias_rhs
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn loss_kind(&self) -> RecsysLoss {
        self.loss_kind
    }

    #[inline]
    fn item_entity(&self, item: usize) -> usize {
        self.num_users + item
    }

    /// `b_lhs(u) + b_rhs(v) - d(u, v)^2`.
    pub fn score(&self, user: usize, item: usize) -> f64 {
        let v = self.item_entity(item);
        let d = self.points.distance(user, v);
        self.bias_lhs[user] + self.bias_rhs[v] - d * d
    }
}

/// Gradient buffers shaped like a [`RecsysModel`].
#[derive(Debug, Clone, PartialEq)]
pub struct RecsysGrads {
    pub coords: Vec<f64>,
    pub bias_lhs: Vec<f64>,
    pub bias_rhs: Vec<f64>,
}

impl RecsysGrads {
    pub fn zeros(model: &RecsysModel) -> Self {
        let n = model.points.len();
        Self {
            coords: vec![0.0; model.points.coords().len()],
            bias_lhs: vec![0.0; n],
            bias_rhs: vec![0.0; n],
        }
    }

    fn clear(&mut self) {
        for g in [&mut self.coords, &mut self.bias_lhs, &mut self.bias_rhs] {
            g.iter_mut().for_each(|x| *x = 0.0);
        }
    }
}

/// Adds `dl_dphi * grad phi(user, item)` into `grads`.
fn add_score_grad(
    model: &RecsysModel,
    user: usize,
    item: usize,
    dl_dphi: f64,
    grads: &mut RecsysGrads,
) {
    let v = model.item_entity(item);
    let dim = model.points.dim();
    let (gu, gv) = two_rows_mut(&mut grads.coords, dim, user, v);
    model.points.spec().add_scaled_distance_grad(
        model.points.row(user),
        model.points.row(v),
        |d| -2.0 * d * dl_dphi,
        gu,
        gv,
    );
    grads.bias_lhs[user] += dl_dphi;
    grads.bias_rhs[v] += dl_dphi;
}

/// `sum_(u,v) sum_w [m - phi(u,v) + phi(u,w)]_+` where `negatives(u)` lists
/// the sampled items `w` of user `u`.
pub fn hinge_loss<'a, N>(model: &RecsysModel, batch: &[(usize, usize)], negatives: N) -> f64
where
    N: Fn(usize) -> &'a [usize],
{
    let mut loss = 0.0;
    for &(u, v) in batch {
        let pos = model.score(u, v);
        for &w in negatives(u) {
            loss += (model.margin - pos + model.score(u, w)).max(0.0);
        }
    }
    loss
}

/// [`hinge_loss`] with its gradient added into `grads`.
pub fn hinge_loss_and_grad<'a, N>(
    model: &RecsysModel,
    batch: &[(usize, usize)],
    negatives: N,
    grads: &mut RecsysGrads,
) -> f64
where
    N: Fn(usize) -> &'a [usize],
{
    let mut loss = 0.0;
    for &(u, v) in batch {
        let pos = model.score(u, v);
        let mut active = 0.0;
        for &w in negatives(u) {
            let h = model.margin - pos + model.score(u, w);
            if h > 0.0 {
                loss += h;
                active += 1.0;
                add_score_grad(model, u, w, 1.0, grads);
            }
        }
        if active > 0.0 {
            add_score_grad(model, u, v, -active, grads);
        }
    }
    loss
}

/// `log(1 + e^x)` without overflow.
#[inline]
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy of `sigmoid(phi)` against labels.
pub fn bce_recsys_loss(model: &RecsysModel, batch: &[(usize, usize, bool)]) -> f64 {
    batch
        .iter()
        .map(|&(u, v, y)| {
            let phi = model.score(u, v);
            if y {
                softplus(-phi)
            } else {
                softplus(phi)
            }
        })
        .sum()
}

/// [`bce_recsys_loss`] with its gradient added into `grads`.
pub fn bce_recsys_loss_and_grad(
    model: &RecsysModel,
    batch: &[(usize, usize, bool)],
    grads: &mut RecsysGrads,
) -> f64 {
    let mut loss = 0.0;
    for &(u, v, y) in batch {
        let phi = model.score(u, v);
        let target = if y { 1.0 } else { 0.0 };
        loss += if y { softplus(-phi) } else { softplus(phi) };
        add_score_grad(model, u, v, sigmoid(phi) - target, grads);
    }
    loss
}

/// Up to `k` distinct items drawn uniformly from those `excluded` (sorted)
/// does not contain.
fn sample_items(
    rng: &mut ChaCha8Rng,
    num_items: usize,
    excluded: &[usize],
    k: usize,
) -> Vec<usize> {
    let available = num_items - excluded.len();
    if available <= k {
        return (0..num_items)
            .filter(|i| excluded.binary_search(i).is_err())
            .collect();
    }
    // map the j-th available slot to its item id by skipping excluded ids
    let mut slots: Vec<usize> = index::sample(rng, available, k).into_vec();
    slots.sort_unstable();
    let mut out = Vec::with_capacity(k);
    let mut ex = 0;
    for s in slots {
        while ex < excluded.len() && excluded[ex] <= s + ex {
            ex += 1;
        }
        out.push(s + ex);
    }
    out.shuffle(rng);
    out
}

fn user_rng(seed: u64, user: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(user as u64);
    rng
}

/// Fixed evaluation candidates: per user, up to [`EVAL_NEGATIVES`] items it
/// never interacted with in any split.
pub fn sample_eval_negatives(data: &InteractionSet, seed: u64) -> Vec<Vec<usize>> {
    (0..data.num_users())
        .map(|u| {
            let mut rng = user_rng(seed ^ EVAL_SALT, u);
            sample_items(
                &mut rng,
                data.num_items(),
                data.interacted(u),
                EVAL_NEGATIVES,
            )
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankingMetrics {
    pub hr10: f64,
    pub ndcg10: f64,
}

/// Mean HR@10 and nDCG@10 of each held-out item ranked against its user's
/// candidates. NaN when `pairs` is empty.
pub fn evaluate_ranking(
    model: &RecsysModel,
    pairs: &[(usize, usize)],
    candidates: &[Vec<usize>],
) -> RankingMetrics {
    if pairs.is_empty() {
        return RankingMetrics {
            hr10: f64::NAN,
            ndcg10: f64::NAN,
        };
    }
    let mut hr = 0.0;
    let mut ndcg = 0.0;
    let mut others = Vec::with_capacity(EVAL_NEGATIVES);
    for &(u, v) in pairs {
        others.clear();
        others.extend(candidates[u].iter().map(|&w| model.score(u, w)));
        let rank = rank_of_target(model.score(u, v), &others);
        hr += hr_at_k(rank, TOP_K);
        ndcg += ndcg_at_k(rank, TOP_K);
    }
    let n = pairs.len() as f64;
    RankingMetrics {
        hr10: hr / n,
        ndcg10: ndcg / n,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecsysReport {
    pub test: RankingMetrics,
    /// Dev metrics of the returned model; NaN without a dev split.
    pub dev: RankingMetrics,
    /// 1-based epoch of the returned model.
    pub best_epoch: usize,
    pub epochs_run: usize,
    /// Epoch (1-based) after which the learning rate was decayed.
    pub decayed_after: Option<usize>,
    pub loss_curve: Vec<f64>,
    pub wall_time_seconds: f64,
}

fn better(a: RankingMetrics, b: RankingMetrics) -> bool {
    a.hr10 > b.hr10 || (a.hr10 == b.hr10 && a.ndcg10 > b.ndcg10)
}

pub fn train_recsys(
    data: &InteractionSet,
    spec: &SpaceSpec,
    cfg: &TrainConfig,
    loss_kind: RecsysLoss,
) -> Result<(RecsysModel, RecsysReport)> {
    train_recsys_with_margin(data, spec, cfg, loss_kind, DEFAULT_MARGIN)
}

/// Trains the recommender on `data.train()`.
///
/// After a burn-in at reduced learning rate, the dev HR@10 (nDCG@10 breaking
/// ties) is checked every epoch. After `cfg.patience` epochs without
/// improvement the learning rate is multiplied by [`PLATEAU_DECAY`]; after
/// another `cfg.patience` stale epochs training stops. The best dev model is
/// returned. Negatives are resampled every epoch.
pub fn train_recsys_with_margin(
    data: &InteractionSet,
    spec: &SpaceSpec,
    cfg: &TrainConfig,
    loss_kind: RecsysLoss,
    margin: f64,
) -> Result<(RecsysModel, RecsysReport)> {
    cfg.validate()?;
    if data.train().is_empty() {
        return Err(Error::InvalidArgument("no training interactions".into()));
    }
    let start = Instant::now();
    let mut model = RecsysModel::new(
        spec,
        data.num_users(),
        data.num_items(),
        margin,
        loss_kind,
        cfg.seed,
    )?;
    let riemannian = spec.has_poincare();
    let dim = spec.total_dim();
    let num_items = data.num_items();

    let mut train_items = vec![Vec::new(); data.num_users()];
    for &(u, i) in data.train() {
        train_items[u].push(i);
    }
    for items in &mut train_items {
        items.sort_unstable();
        items.dedup();
    }
    let eval_candidates = sample_eval_negatives(data, cfg.seed);

    let mut grads = RecsysGrads::zeros(&model);
    let mut opt_coords = Optimizer::for_points(cfg.optimizer, spec, model.points.len());
    let mut opt_lhs = Optimizer::new(cfg.optimizer, grads.bias_lhs.len());
    let mut opt_rhs = Optimizer::new(cfg.optimizer, grads.bias_rhs.len());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_0f_ba7c4);
    let mut order: Vec<usize> = (0..data.train().len()).collect();
    let batch_len = match cfg.batch_size {
        BatchSize::Full => order.len(),
        BatchSize::Pairs(n) => n.min(order.len()),
    };

    let mut best = model.clone();
    let mut best_dev = RankingMetrics {
        hr10: f64::NEG_INFINITY,
        ndcg10: f64::NEG_INFINITY,
    };
    let mut best_epoch = 0;
    let mut stale = 0;
    let mut decay = 1.0;
    let mut decayed_after = None;
    let mut loss_curve = Vec::new();
    let mut negatives: Vec<Vec<usize>> = vec![Vec::new(); data.num_users()];
    let mut hinge_batch: Vec<(usize, usize)> = Vec::new();
    let mut bce_batch: Vec<(usize, usize, bool)> = Vec::new();

    for epoch in 0..cfg.max_epochs {
        let lr = cfg.learning_rate_at(epoch) * decay;
        let epoch_seed = cfg.seed ^ (epoch as u64 + 1).wrapping_mul(EPOCH_MIX);
        if loss_kind == RecsysLoss::Hinge {
            for (u, negs) in negatives.iter_mut().enumerate() {
                if !train_items[u].is_empty() {
                    *negs = sample_items(
                        &mut user_rng(epoch_seed, u),
                        num_items,
                        &train_items[u],
                        HINGE_NEGATIVES,
                    );
                }
            }
        }
        let bce_negatives: Vec<usize> = if loss_kind == RecsysLoss::Bce {
            let mut rngs: Vec<Option<ChaCha8Rng>> = vec![None; data.num_users()];
            data.train()
                .iter()
                .map(|&(u, _)| {
                    let r = rngs[u].get_or_insert_with(|| user_rng(epoch_seed, u));
                    sample_items(r, num_items, &train_items[u], 1)
                        .first()
                        .copied()
                        .unwrap_or(usize::MAX)
                })
                .collect()
        } else {
            Vec::new()
        };
        if batch_len < order.len() {
            order.shuffle(&mut rng);
        }

        let mut epoch_loss = 0.0;
        for (batch_idx, chunk) in order.chunks(batch_len).enumerate() {
            grads.clear();
            let loss = match loss_kind {
                RecsysLoss::Hinge => {
                    hinge_batch.clear();
                    hinge_batch.extend(chunk.iter().map(|&i| data.train()[i]));
                    hinge_loss_and_grad(&model, &hinge_batch, |u| &negatives[u], &mut grads)
                }
                RecsysLoss::Bce => {
                    bce_batch.clear();
                    for &i in chunk {
                        let (u, v) = data.train()[i];
                        bce_batch.push((u, v, true));
                        if bce_negatives[i] != usize::MAX {
                            bce_batch.push((u, bce_negatives[i], false));
                        }
                    }
                    bce_recsys_loss_and_grad(&model, &bce_batch, &mut grads)
                }
            };
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch: epoch + 1,
                    batch: batch_idx,
                });
            }
            epoch_loss += loss;
            if riemannian {
                for (row, g) in model
                    .points
                    .coords()
                    .chunks(dim)
                    .zip(grads.coords.chunks_mut(dim))
                {
                    spec.riemannian_scale(row, g);
                }
            }
            clip_global_norm_parts(
                &mut [&mut grads.coords, &mut grads.bias_lhs, &mut grads.bias_rhs],
                cfg.max_grad_norm,
            );
            opt_coords.step(model.points.coords_mut(), &grads.coords, lr);
            opt_lhs.step(&mut model.bias_lhs, &grads.bias_lhs, lr);
            opt_rhs.step(&mut model.bias_rhs, &grads.bias_rhs, lr);
            if riemannian {
                model.points.project_all();
            }
        }
        loss_curve.push(epoch_loss);

        if data.dev().is_empty() {
            best.clone_from(&model);
            best_epoch = epoch + 1;
            continue;
        }
        let dev = evaluate_ranking(&model, data.dev(), &eval_candidates);
        if better(dev, best_dev) {
            best_dev = dev;
            best.clone_from(&model);
            best_epoch = epoch + 1;
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                if decayed_after.is_some() {
                    break;
                }
                decay *= PLATEAU_DECAY;
                decayed_after = Some(epoch + 1);
                stale = 0;
            }
        }
    }

    let report = RecsysReport {
        test: evaluate_ranking(&best, data.test(), &eval_candidates),
        dev: evaluate_ranking(&best, data.dev(), &eval_candidates),
        best_epoch,
        epochs_run: loss_curve.len(),
        decayed_after,
        loss_curve,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    Ok((best, report))
}
