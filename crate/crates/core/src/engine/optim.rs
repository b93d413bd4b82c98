use super::config::OptimizerKind;
use crate::space::{Factor, SpaceSpec};

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

/// Moments of coordinates that stop receiving gradient decay geometrically
/// into the subnormal range, where arithmetic is very slow; such values are
/// indistinguishable from zero in the update and are flushed.
#[inline]
fn flush(x: f64) -> f64 {
    if x.abs() < 1e-200 {
        0.0
    } else {
        x
    }
}

/// Scales `grads` so that its global Euclidean norm is at most `max_norm`.
/// Returns the norm before clipping.
pub fn clip_global_norm(grads: &mut [f64], max_norm: f64) -> f64 {
    let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm {
        let s = max_norm / norm;
        grads.iter_mut().for_each(|g| *g *= s);
    }
    norm
}

/// [`clip_global_norm`] over several buffers treated as one vector.
pub fn clip_global_norm_parts(parts: &mut [&mut [f64]], max_norm: f64) -> f64 {
    let norm = parts
        .iter()
        .flat_map(|p| p.iter())
        .map(|g| g * g)
        .sum::<f64>()
        .sqrt();
    if norm > max_norm {
        let s = max_norm / norm;
        parts
            .iter_mut()
            .flat_map(|p| p.iter_mut())
            .for_each(|g| *g *= s);
    }
    norm
}

/// Poincaré blocks inside each row of a point buffer.
#[derive(Debug, Clone)]
pub struct BallLayout {
    row_dim: usize,
    /// `(offset, dim, curvature)` per block.
    blocks: Vec<(usize, usize, f64)>,
    /// Whether each row coordinate lies in a ball block.
    mask: Vec<bool>,
}

/// First-order update rule over a flat parameter vector. Gradients are
/// expected to be Riemannian already; the caller projects afterwards.
///
/// Adam keeps one second moment per coordinate, except in Poincaré blocks
/// where the second moment tracks the squared Riemannian norm of the whole
/// block gradient, `lambda_x^2 |g|^2`.
#[derive(Debug, Clone)]
pub enum Optimizer {
    Sgd,
    Adam {
        m: Vec<f64>,
        v: Vec<f64>,
        step: i32,
        ball: Option<BallLayout>,
    },
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, num_params: usize) -> Self {
        match kind {
            OptimizerKind::Sgd => Optimizer::Sgd,
            OptimizerKind::Adam => Optimizer::Adam {
                m: vec![0.0; num_params],
                v: vec![0.0; num_params],
                step: 0,
                ball: None,
            },
        }
    }

    /// An optimizer over the coordinates of `num_points` points of `spec`.
    pub fn for_points(kind: OptimizerKind, spec: &SpaceSpec, num_points: usize) -> Self {
        let mut opt = Self::new(kind, num_points * spec.total_dim());
        if let Optimizer::Adam { ball, .. } = &mut opt {
            let mut off = 0;
            let mut blocks = Vec::new();
            for f in spec.factors() {
                if let Factor::Poincare { dim, curvature } = *f {
                    blocks.push((off, dim, curvature));
                }
                off += f.dim();
            }
            if !blocks.is_empty() {
                let mut mask = vec![false; spec.total_dim()];
                for &(off, dim, _) in &blocks {
                    mask[off..off + dim].iter_mut().for_each(|b| *b = true);
                }
                *ball = Some(BallLayout {
                    row_dim: spec.total_dim(),
                    blocks,
                    mask,
                });
            }
        }
        opt
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        match self {
            Optimizer::Sgd => {
                for (p, g) in params.iter_mut().zip(grads) {
                    *p -= lr * g;
                }
            }
            Optimizer::Adam { m, v, step, ball } => {
                *step += 1;
                let bc1 = 1.0 - BETA1.powi(*step);
                let bc2 = 1.0 - BETA2.powi(*step);
                let step_size = lr / bc1;
                let bc2_sqrt = bc2.sqrt();
                if let Some(layout) = ball {
                    for (row, (p_row, g_row)) in params
                        .chunks(layout.row_dim)
                        .zip(grads.chunks(layout.row_dim))
                        .enumerate()
                    {
                        for &(off, dim, c) in &layout.blocks {
                            let x = &p_row[off..off + dim];
                            let g = &g_row[off..off + dim];
                            let lambda = 2.0 / (1.0 + c * x.iter().map(|a| a * a).sum::<f64>());
                            let sq = lambda * lambda * g.iter().map(|a| a * a).sum::<f64>();
                            let base = row * layout.row_dim + off;
                            for vi in &mut v[base..base + dim] {
                                *vi = flush(BETA2 * *vi + (1.0 - BETA2) * sq);
                            }
                        }
                    }
                }
                let row_dim = ball.as_ref().map_or(params.len().max(1), |l| l.row_dim);
                let mask = ball.as_ref().map(|l| l.mask.as_slice());
                for (r, (p_row, g_row)) in params
                    .chunks_mut(row_dim)
                    .zip(grads.chunks(row_dim))
                    .enumerate()
                {
                    let base = r * row_dim;
                    for (c, (p, &g)) in p_row.iter_mut().zip(g_row).enumerate() {
                        let i = base + c;
                        m[i] = flush(BETA1 * m[i] + (1.0 - BETA1) * g);
                        if !mask.is_some_and(|mk| mk[c]) {
                            v[i] = flush(BETA2 * v[i] + (1.0 - BETA2) * g * g);
                        }
                        *p -= step_size * m[i] / (v[i].sqrt() / bc2_sqrt + EPS);
                    }
                }
            }
        }
    }
}
