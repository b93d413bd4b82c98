//! Embedding spaces: `l1`, `l2`, `linf` normed spaces, the Poincaré ball, and
//! Cartesian products of them.
//!
//! Every factor provides its distance, the closed-form ambient (Euclidean)
//! gradient of that distance, a conversion of ambient gradients into
//! Riemannian ones, and a projection back into the feasible set. Product
//! distances combine factor distances as `sqrt(sum d_i^2)`.

mod factor;
mod points;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use factor::{Factor, Norm, BALL_MARGIN};
pub(crate) use points::two_rows_mut;
pub use points::{init_points, read_embedding, write_embedding, PointBuffer, INIT_HALF_WIDTH};

use crate::error::{Error, Result};

/// Upper bound on the number of factors in a product space.
pub const MAX_FACTORS: usize = 16;

/// How factor distances aggregate into the product distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Combiner {
    /// `sqrt(sum_i d_i^2)`, the distance of the Riemannian product metric.
    #[default]
    L2,
}

/// Gradients of a distance with respect to both of its arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceGrad {
    pub grad_x: Vec<f64>,
    pub grad_y: Vec<f64>,
    /// Set when `x == y`, where the distance is not differentiable; both
    /// gradients are zero in that case.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceSpec {
    factors: Vec<Factor>,
    offsets: Vec<usize>,
    total_dim: usize,
    combiner: Combiner,
}

impl SpaceSpec {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument(
                "space needs at least one factor".into(),
            ));
        }
        if factors.len() > MAX_FACTORS {
            return Err(Error::InvalidArgument(format!(
                "at most {MAX_FACTORS} factors are supported"
            )));
        }
        let mut offsets = Vec::with_capacity(factors.len());
        let mut total_dim = 0;
        for f in &factors {
            f.validate()?;
            offsets.push(total_dim);
            total_dim += f.dim();
        }
        Ok(Self {
            factors,
            offsets,
            total_dim,
            combiner: Combiner::L2,
        })
    }

    pub fn single(factor: Factor) -> Result<Self> {
        Self::new(vec![factor])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn combiner(&self) -> Combiner {
        self.combiner
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn has_poincare(&self) -> bool {
        self.factors
            .iter()
            .any(|f| matches!(f, Factor::Poincare { .. }))
    }

    fn blocks<'a>(&'a self, x: &'a [f64]) -> impl Iterator<Item = (&'a Factor, &'a [f64])> {
        self.factors
            .iter()
            .zip(&self.offsets)
            .map(move |(f, &off)| (f, &x[off..off + f.dim()]))
    }

    /// Checks that every Poincaré block lies strictly inside its ball and
    /// that all coordinates are finite.
    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.total_dim {
            return Err(Error::Domain(format!(
                "point has {} coordinates, space has {}",
                x.len(),
                self.total_dim
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite coordinate".into()));
        }
        for (f, block) in self.blocks(x) {
            f.check_block(block)?;
        }
        Ok(())
    }

    /// Distance between two feasible points.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(self.dist(x, y))
    }

    /// Distance without feasibility checks. Callers must keep points inside
    /// the domain (the training engine does so via [`SpaceSpec::project`]).
    #[inline]
    pub fn dist(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.total_dim);
        debug_assert_eq!(y.len(), self.total_dim);
        if let [f] = self.factors.as_slice() {
            return f.distance(x, y);
        }
        let mut sq = 0.0;
        for (f, &off) in self.factors.iter().zip(&self.offsets) {
            let r = off..off + f.dim();
            let d = f.distance(&x[r.clone()], &y[r]);
            sq += d * d;
        }
        sq.sqrt()
    }

    /// Computes `d(x, y)`, then adds `coef(d) * grad d` into `gx` and `gy`.
    /// Returns the distance. Nothing is added when `d == 0`.
    #[inline]
    pub fn add_scaled_distance_grad<F>(
        &self,
        x: &[f64],
        y: &[f64],
        coef: F,
        gx: &mut [f64],
        gy: &mut [f64],
    ) -> f64
    where
        F: FnOnce(f64) -> f64,
    {
        if let [f] = self.factors.as_slice() {
            let d = f.distance(x, y);
            if d > 0.0 {
                f.add_grad(x, y, d, coef(d), gx, gy);
            }
            return d;
        }
        let mut parts = [0.0f64; MAX_FACTORS];
        let mut sq = 0.0;
        for (i, (f, &off)) in self.factors.iter().zip(&self.offsets).enumerate() {
            let r = off..off + f.dim();
            let d = f.distance(&x[r.clone()], &y[r]);
            parts[i] = d;
            sq += d * d;
        }
        let total = sq.sqrt();
        if total == 0.0 {
            return 0.0;
        }
        let c = coef(total);
        for (i, (f, &off)) in self.factors.iter().zip(&self.offsets).enumerate() {
            let d = parts[i];
            if d == 0.0 {
                continue;
            }
            let r = off..off + f.dim();
            f.add_grad(
                &x[r.clone()],
                &y[r.clone()],
                d,
                c * d / total,
                &mut gx[r.clone()],
                &mut gy[r],
            );
        }
        total
    }

    /// Ambient gradients of `d(x, y)`. `l1` uses `sign(0) = 0`; `linf` puts
    /// `±1` on the largest absolute difference, lowest index on ties.
    pub fn distance_grad(&self, x: &[f64], y: &[f64]) -> DistanceGrad {
        let mut grad_x = vec![0.0; self.total_dim];
        let mut grad_y = vec![0.0; self.total_dim];
        let d = self.add_scaled_distance_grad(x, y, |_| 1.0, &mut grad_x, &mut grad_y);
        DistanceGrad {
            grad_x,
            grad_y,
            degenerate: d == 0.0,
        }
    }

    /// Rescales an ambient gradient at `x` into the Riemannian gradient:
    /// Poincaré blocks are multiplied by `(1 / lambda_x)^2`, normed blocks
    /// pass through.
    #[inline]
    pub fn riemannian_scale(&self, x: &[f64], grad: &mut [f64]) {
        for (f, &off) in self.factors.iter().zip(&self.offsets) {
            if let Factor::Poincare { .. } = f {
                let r = off..off + f.dim();
                f.riemannian_scale(&x[r.clone()], &mut grad[r]);
            }
        }
    }

    /// Pulls Poincaré blocks back inside the ball; normed blocks are left
    /// untouched. Idempotent.
    #[inline]
    pub fn project(&self, x: &mut [f64]) {
        for (f, &off) in self.factors.iter().zip(&self.offsets) {
            if let Factor::Poincare { .. } = f {
                f.project(&mut x[off..off + f.dim()]);
            }
        }
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, f) in self.factors.iter().enumerate() {
            if i > 0 {
                out.write_str("*")?;
            }
            write!(out, "{f}")?;
        }
        Ok(())
    }
}

const GRAMMAR_HINT: &str =
    "valid factors are l1:<dim>, l2:<dim>, linf:<dim>, poincare:<dim>[:<c>], joined with `*`";

impl FromStr for SpaceSpec {
    type Err = Error;

    fn from_str(input: &str) -> Result<Self> {
        let err = |message: String| Error::SpaceGrammar {
            input: input.to_owned(),
            message,
        };
        let mut factors = Vec::new();
        for token in input.trim().split('*') {
            let token = token.trim();
            let parts: Vec<&str> = token.split(':').collect();
            let dim = |s: Option<&&str>| -> Result<usize> {
                let s = s.ok_or_else(|| err(format!("`{token}` is missing a dimension")))?;
                match s.parse::<usize>() {
                    Ok(d) if d >= 1 => Ok(d),
                    _ => Err(err(format!("bad dimension `{s}` in `{token}`"))),
                }
            };
            let factor = match parts[0].to_ascii_lowercase().as_str() {
                kind @ ("l1" | "l2" | "linf") => {
                    if parts.len() != 2 {
                        return Err(err(format!("`{token}`: expected {kind}:<dim>")));
                    }
                    let norm = match kind {
                        "l1" => Norm::L1,
                        "l2" => Norm::L2,
                        _ => Norm::LInf,
                    };
                    Factor::Lp {
                        dim: dim(parts.get(1))?,
                        norm,
                    }
                }
                "poincare" => {
                    if parts.len() < 2 || parts.len() > 3 {
                        return Err(err(format!("`{token}`: expected poincare:<dim>[:<c>]")));
                    }
                    let curvature = match parts.get(2) {
                        None => -1.0,
                        Some(c) => c
                            .parse::<f64>()
                            .map_err(|_| err(format!("bad curvature `{c}`")))?,
                    };
                    Factor::Poincare {
                        dim: dim(parts.get(1))?,
                        curvature,
                    }
                }
                other => {
                    return Err(err(format!("unknown factor `{other}`; {GRAMMAR_HINT}")));
                }
            };
            factors.push(factor);
        }
        SpaceSpec::new(factors).map_err(|e| err(e.to_string()))
    }
}

impl Serialize for SpaceSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SpaceSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
