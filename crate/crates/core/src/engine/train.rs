use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{BatchSize, SearchGrid, TrainConfig};
use super::loss::accumulate_batch_parallel;
use super::optim::{clip_global_norm, Optimizer};
use crate::error::{Error, Result};
use crate::graph::{Pair, PairStore};
use crate::metrics::{d_avg, map_from_neighbors};
use crate::space::{init_points, PointBuffer, SpaceSpec};

/// Outcome of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// Average distortion of the returned (best) coordinates, as a fraction.
    pub final_d_avg: f64,
    /// Mean average precision of the returned coordinates; absent for
    /// weighted graphs.
    pub final_map: Option<f64>,
    /// 1-based epoch at which the returned coordinates were reached.
    pub best_epoch: usize,
    /// `(epoch, summed batch loss)` per epoch.
    pub loss_curve: Vec<(usize, f64)>,
    /// Average distortion after each epoch.
    pub d_avg_curve: Vec<f64>,
    pub wall_time_seconds: f64,
    pub config_echo: TrainConfig,
    pub space_echo: SpaceSpec,
}

impl RunReport {
    pub fn epochs_run(&self) -> usize {
        self.loss_curve.len()
    }
}

/// Runs reconstruction training from the standard random initialization.
pub fn train(
    pairs: &PairStore,
    spec: &SpaceSpec,
    cfg: &TrainConfig,
) -> Result<(PointBuffer, RunReport)> {
    let init = init_points(spec, pairs.num_nodes(), cfg.seed);
    train_from(pairs, init, cfg)
}

/// Runs reconstruction training from the given starting coordinates.
///
/// Each step computes the exact batch gradient, converts it to the
/// Riemannian gradient, clips its global norm, applies the optimizer update
/// and projects back into the feasible set. The average distortion over all
/// pairs is evaluated after every epoch; the best coordinates seen are
/// returned and training stops after `patience` epochs without improvement.
pub fn train_from(
    pairs: &PairStore,
    init: PointBuffer,
    cfg: &TrainConfig,
) -> Result<(PointBuffer, RunReport)> {
    cfg.validate()?;
    if pairs.is_empty() {
        return Err(Error::InvalidArgument(
            "no connected pairs to train on".into(),
        ));
    }
    if init.len() != pairs.num_nodes() {
        return Err(Error::InvalidArgument(format!(
            "{} points for {} nodes",
            init.len(),
            pairs.num_nodes()
        )));
    }
    let start = Instant::now();
    let spec = init.spec().clone();
    let riemannian = spec.has_poincare();
    let dim = spec.total_dim();
    let mut points = init;
    let mut best = points.clone();
    let mut best_d_avg = f64::INFINITY;
    let mut best_epoch = 0;
    let mut stale = 0;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_0f_ba7c4);
    let mut optimizer = Optimizer::for_points(cfg.optimizer, &spec, points.len());
    let mut grads = vec![0.0; points.coords().len()];
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let mut batch: Vec<Pair> = Vec::new();
    let batch_len = match cfg.batch_size {
        BatchSize::Full => pairs.len(),
        BatchSize::Pairs(n) => n.min(pairs.len()),
    };

    let mut loss_curve = Vec::new();
    let mut d_avg_curve = Vec::new();

    for epoch in 0..cfg.max_epochs {
        let lr = cfg.learning_rate_at(epoch);
        if batch_len < pairs.len() {
            order.shuffle(&mut rng);
        }
        let mut epoch_loss = 0.0;
        for (batch_idx, chunk) in order.chunks(batch_len).enumerate() {
            let slice: &[Pair] = if batch_len == pairs.len() {
                pairs.pairs()
            } else {
                batch.clear();
                batch.extend(chunk.iter().map(|&i| pairs.pairs()[i]));
                &batch
            };
            grads.iter_mut().for_each(|g| *g = 0.0);
            let loss = accumulate_batch_parallel(&points, slice, &mut grads, cfg.workers);
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch: epoch + 1,
                    batch: batch_idx,
                });
            }
            epoch_loss += loss;
            if riemannian {
                for (row, g) in points.coords().chunks(dim).zip(grads.chunks_mut(dim)) {
                    spec.riemannian_scale(row, g);
                }
            }
            clip_global_norm(&mut grads, cfg.max_grad_norm);
            optimizer.step(points.coords_mut(), &grads, lr);
            if riemannian {
                points.project_all();
            }
        }

        let current = d_avg(&points, pairs);
        if !current.is_finite() {
            return Err(Error::NonFiniteLoss {
                epoch: epoch + 1,
                batch: 0,
            });
        }
        loss_curve.push((epoch + 1, epoch_loss));
        d_avg_curve.push(current);
        if current < best_d_avg {
            best_d_avg = current;
            best_epoch = epoch + 1;
            best.coords_mut().copy_from_slice(points.coords());
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
    }

    let final_map = pairs
        .is_unit_weight()
        .then(|| map_from_neighbors(&best, &pairs.adjacency()));
    let report = RunReport {
        final_d_avg: best_d_avg,
        final_map,
        best_epoch,
        loss_curve,
        d_avg_curve,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        config_echo: cfg.clone(),
        space_echo: spec,
    };
    Ok((best, report))
}

/// One grid point of a sweep and how it ended.
#[derive(Debug, Clone)]
pub struct GridRun {
    pub config: TrainConfig,
    pub outcome: std::result::Result<RunReport, String>,
}

#[derive(Debug, Clone)]
pub struct GridSearchOutcome {
    pub best_points: PointBuffer,
    pub best: RunReport,
    pub best_index: usize,
    pub runs: Vec<GridRun>,
}

/// Trains one run per grid point and keeps the one with the lowest final
/// average distortion; ties go to the earlier grid point. Aborted runs are
/// recorded and skipped. Fails only if every run aborts.
pub fn grid_search(
    pairs: &PairStore,
    spec: &SpaceSpec,
    grid: &SearchGrid,
    base: &TrainConfig,
) -> Result<GridSearchOutcome> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty hyperparameter grid".into()));
    }
    let configs = grid.configs(base);
    let results: Vec<Result<(PointBuffer, RunReport)>> = configs
        .par_iter()
        .map(|cfg| train(pairs, spec, cfg))
        .collect();

    let mut best: Option<(usize, PointBuffer, RunReport)> = None;
    let mut runs = Vec::with_capacity(configs.len());
    for (i, (cfg, result)) in configs.into_iter().zip(results).enumerate() {
        match result {
            Ok((points, report)) => {
                let better = best
                    .as_ref()
                    .map_or(true, |(_, _, b)| report.final_d_avg < b.final_d_avg);
                runs.push(GridRun {
                    config: cfg,
                    outcome: Ok(report.clone()),
                });
                if better {
                    best = Some((i, points, report));
                }
            }
            Err(e) => runs.push(GridRun {
                config: cfg,
                outcome: Err(e.to_string()),
            }),
        }
    }
    let (best_index, best_points, best) = best.ok_or(Error::AllRunsFailed(runs.len()))?;
    Ok(GridSearchOutcome {
        best_points,
        best,
        best_index,
        runs,
    })
}
