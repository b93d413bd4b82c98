use std::fmt;

use crate::error::{Error, Result};

/// Relative margin kept between Poincaré points and the ball boundary.
pub const BALL_MARGIN: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    L1,
    L2,
    LInf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Factor {
    Lp {
        dim: usize,
        norm: Norm,
    },
    /// Poincaré ball of curvature `curvature < 0`, radius `1/sqrt(-curvature)`.
    Poincare {
        dim: usize,
        curvature: f64,
    },
}

impl Factor {
    pub fn dim(&self) -> usize {
        match *self {
            Factor::Lp { dim, .. } | Factor::Poincare { dim, .. } => dim,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.dim() == 0 {
            return Err(Error::InvalidArgument(
                "factor dimension must be >= 1".into(),
            ));
        }
        if let Factor::Poincare { curvature, .. } = *self {
            if !(curvature < 0.0) || !curvature.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "Poincaré curvature must be negative, got {curvature}"
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn check_block(&self, x: &[f64]) -> Result<()> {
        if let Factor::Poincare { curvature, .. } = *self {
            let k = -curvature;
            let sq = sq_norm(x);
            if !(k * sq < 1.0) {
                return Err(Error::Domain(format!(
                    "squared norm {sq} outside the ball of radius^2 {}",
                    1.0 / k
                )));
            }
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            Factor::Lp { norm: Norm::L1, .. } => x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum(),
            Factor::Lp { norm: Norm::L2, .. } => x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            Factor::Lp {
                norm: Norm::LInf, ..
            } => x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
            Factor::Poincare { curvature, .. } => {
                let k = -curvature;
                let t = poincare_excess(k, x, y).0;
                // arcosh(1 + t) = ln(1 + t + sqrt(t (t + 2)))
                (t + (t * (t + 2.0)).sqrt()).ln_1p() / k.sqrt()
            }
        }
    }

    /// Adds `scale * grad d(x, y)` into `gx`, `gy`. `d` is the already
    /// computed distance and must be positive.
    #[inline]
    pub(crate) fn add_grad(
        &self,
        x: &[f64],
        y: &[f64],
        d: f64,
        scale: f64,
        gx: &mut [f64],
        gy: &mut [f64],
    ) {
        match *self {
            Factor::Lp { norm: Norm::L1, .. } => {
                for i in 0..x.len() {
                    let diff = x[i] - y[i];
                    let s = if diff > 0.0 {
                        scale
                    } else if diff < 0.0 {
                        -scale
                    } else {
                        0.0
                    };
                    gx[i] += s;
                    gy[i] -= s;
                }
            }
            Factor::Lp { norm: Norm::L2, .. } => {
                let s = scale / d;
                for i in 0..x.len() {
                    let g = s * (x[i] - y[i]);
                    gx[i] += g;
                    gy[i] -= g;
                }
            }
            Factor::Lp {
                norm: Norm::LInf, ..
            } => {
                let mut best = 0;
                let mut best_abs = -1.0;
                for i in 0..x.len() {
                    let a = (x[i] - y[i]).abs();
                    if a > best_abs {
                        best_abs = a;
                        best = i;
                    }
                }
                let s = if x[best] > y[best] { scale } else { -scale };
                gx[best] += s;
                gy[best] -= s;
            }
            Factor::Poincare { curvature, .. } => {
                let k = -curvature;
                let (t, alpha, beta, delta) = poincare_excess(k, x, y);
                let root = (t * (t + 2.0)).sqrt();
                if !(root > 0.0) {
                    return;
                }
                // d = arcosh(1 + t) / sqrt(k), t = 2 k delta / (alpha beta)
                // dt/dx = 4k / (alpha beta) * ((x - y) + k delta / alpha * x)
                let common = scale / (k.sqrt() * root) * 4.0 * k / (alpha * beta);
                let cx = k * delta / alpha;
                let cy = k * delta / beta;
                for i in 0..x.len() {
                    let diff = x[i] - y[i];
                    gx[i] += common * (diff + cx * x[i]);
                    gy[i] += common * (-diff + cy * y[i]);
                }
            }
        }
    }

    #[inline]
    pub(crate) fn riemannian_scale(&self, x: &[f64], grad: &mut [f64]) {
        if let Factor::Poincare { curvature, .. } = *self {
            // 1 / lambda_x = (1 + c |x|^2) / 2
            let inv_lambda = (1.0 + curvature * sq_norm(x)) / 2.0;
            let s = inv_lambda * inv_lambda;
            for g in grad {
                *g *= s;
            }
        }
    }

    #[inline]
    pub(crate) fn project(&self, x: &mut [f64]) {
        if let Factor::Poincare { curvature, .. } = *self {
            let max_norm = (1.0 - BALL_MARGIN) / (-curvature).sqrt();
            let norm = sq_norm(x).sqrt();
            if norm >= max_norm {
                let mut s = max_norm / norm;
                loop {
                    let scaled = x.iter().map(|v| (v * s) * (v * s)).sum::<f64>().sqrt();
                    if scaled <= max_norm {
                        break;
                    }
                    s *= 1.0 - f64::EPSILON;
                }
                for v in x.iter_mut() {
                    *v *= s;
                }
            }
        }
    }
}

#[inline]
fn sq_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Returns `(t, alpha, beta, delta)` with `alpha = 1 - k|x|^2`,
/// `beta = 1 - k|y|^2`, `delta = |x - y|^2` and `t = 2 k delta / (alpha beta)`,
/// i.e. the hyperbolic `cosh d - 1`, clamped at zero.
#[inline]
fn poincare_excess(k: f64, x: &[f64], y: &[f64]) -> (f64, f64, f64, f64) {
    let mut xx = 0.0;
    let mut yy = 0.0;
    let mut delta = 0.0;
    for (a, b) in x.iter().zip(y) {
        xx += a * a;
        yy += b * b;
        delta += (a - b) * (a - b);
    }
    let alpha = 1.0 - k * xx;
    let beta = 1.0 - k * yy;
    let t = (2.0 * k * delta / (alpha * beta)).max(0.0);
    (t, alpha, beta, delta)
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Factor::Lp { dim, norm } => {
                let name = match norm {
                    Norm::L1 => "l1",
                    Norm::L2 => "l2",
                    Norm::LInf => "linf",
                };
                write!(f, "{name}:{dim}")
            }
            Factor::Poincare { dim, curvature } if curvature == -1.0 => {
                write!(f, "poincare:{dim}")
            }
            Factor::Poincare { dim, curvature } => write!(f, "poincare:{dim}:{curvature}"),
        }
    }
}
