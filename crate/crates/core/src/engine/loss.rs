use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Pair;
use crate::space::{two_rows_mut, PointBuffer};

/// Per-pair reconstruction loss `|(d_embed / d_graph)^2 - 1|`.
pub fn pair_loss(d_embed: f64, d_graph: f64) -> Result<f64> {
    if !(d_graph > 0.0) {
        return Err(Error::Domain(format!(
            "graph distance {d_graph} must be positive"
        )));
    }
    Ok(pair_loss_unchecked(d_embed, d_graph))
}

#[inline]
fn pair_loss_unchecked(d_embed: f64, d_graph: f64) -> f64 {
    let r = d_embed / d_graph;
    (r * r - 1.0).abs()
}

/// `d loss / d d_embed = sign(r^2 - 1) * 2 d_embed / d_graph^2`.
#[inline]
fn pair_loss_slope(d_embed: f64, d_graph: f64) -> f64 {
    let r = d_embed / d_graph;
    let sq = r * r - 1.0;
    let sign = if sq > 0.0 {
        1.0
    } else if sq < 0.0 {
        -1.0
    } else {
        0.0
    };
    sign * 2.0 * d_embed / (d_graph * d_graph)
}

/// Adds the gradient of the batch loss into `grads` (row-major like the
/// point buffer) and returns the batch loss.
pub(crate) fn accumulate_batch(points: &PointBuffer, batch: &[Pair], grads: &mut [f64]) -> f64 {
    let spec = points.spec();
    let dim = points.dim();
    let mut loss = 0.0;
    for p in batch {
        let (u, v) = (p.u as usize, p.v as usize);
        let (gu, gv) = two_rows_mut(grads, dim, u, v);
        let dg = p.dist;
        let d = spec.add_scaled_distance_grad(
            points.row(u),
            points.row(v),
            |d| pair_loss_slope(d, dg),
            gu,
            gv,
        );
        loss += pair_loss_unchecked(d, dg);
    }
    loss
}

/// Like [`accumulate_batch`], with the batch split into `workers` contiguous
/// chunks whose partial gradients are reduced in chunk order.
pub(crate) fn accumulate_batch_parallel(
    points: &PointBuffer,
    batch: &[Pair],
    grads: &mut [f64],
    workers: usize,
) -> f64 {
    if workers <= 1 || batch.len() < 2 * workers {
        return accumulate_batch(points, batch, grads);
    }
    let chunk = batch.len().div_ceil(workers);
    let partials: Vec<(f64, Vec<f64>)> = batch
        .par_chunks(chunk)
        .map(|part| {
            let mut g = vec![0.0; grads.len()];
            let l = accumulate_batch(points, part, &mut g);
            (l, g)
        })
        .collect();
    let mut loss = 0.0;
    for (l, g) in partials {
        loss += l;
        for (acc, v) in grads.iter_mut().zip(g) {
            *acc += v;
        }
    }
    loss
}

/// Loss summed over `batch` and its exact gradient with respect to every
/// coordinate of `points`. Rows of nodes absent from the batch are zero.
pub fn batch_loss_and_grad(points: &PointBuffer, batch: &[Pair]) -> (f64, Vec<f64>) {
    let mut grads = vec![0.0; points.coords().len()];
    let loss = accumulate_batch(points, batch, &mut grads);
    (loss, grads)
}
