//! Central-difference checks of every analytic gradient. Each case builds a
//! random configuration and returns the norm-wise relative error, or `None`
//! when the configuration sits too close to a kink to be meaningful.

use super::*;
use normembed::engine::{batch_loss_and_grad, pair_loss};
use normembed::graph::Pair;
use normembed::tasks::*;

pub const STEP: f64 = 1e-6;
pub const TOL: f64 = 1e-5;
const GAP: f64 = 1e-3;

pub fn factor_of_kind(kind: usize, dim: usize, c: f64) -> Factor {
    match kind {
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
        _ => Factor::Poincare { dim, curvature: -c },
    }
}

/// Worse of the two distance-gradient errors at a random smooth pair.
pub fn distance_case(r: &mut ChaCha8Rng, spec: &SpaceSpec) -> Option<f64> {
    let (x, y) = (random_point(r, spec), random_point(r, spec));
    if !is_smooth(spec, &x, &y, GAP) {
        return None;
    }
    let g = spec.distance_grad(&x, &y);
    let fx = central_diff(|p| spec.distance(p, &y).unwrap(), &x, STEP);
    let fy = central_diff(|p| spec.distance(&x, p).unwrap(), &y, STEP);
    Some(rel_err(&g.grad_x, &fx, 1e-8).max(rel_err(&g.grad_y, &fy, 1e-8)))
}

/// Reconstruction loss over all pairs of `n` random points with random targets.
pub fn reconstruction_case(r: &mut ChaCha8Rng, spec: &SpaceSpec, n: usize) -> Option<f64> {
    let pts = random_points(r, spec, n);
    let mut batch = Vec::new();
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            batch.push(Pair {
                u,
                v,
                dist: r.gen_range(0.5..4.0),
            });
        }
    }
    for p in &batch {
        let (x, y) = (pts.row(p.u as usize), pts.row(p.v as usize));
        let ratio = spec.distance(x, y).unwrap() / p.dist;
        // |ratio^2 - 1| has a kink at 1
        if !is_smooth(spec, x, y, GAP) || (ratio * ratio - 1.0).abs() <= GAP {
            return None;
        }
    }
    let (_, analytic) = batch_loss_and_grad(&pts, &batch);
    let loss = |c: &[f64]| {
        let q = PointBuffer::from_coords(spec.clone(), c.to_vec()).unwrap();
        batch
            .iter()
            .map(|p| pair_loss(q.distance(p.u as usize, p.v as usize), p.dist).unwrap())
            .sum::<f64>()
    };
    let fd = central_diff(loss, pts.coords(), STEP);
    Some(rel_err(&analytic, &fd, 1e-8))
}

/// Toy recommender: users 0..2, items 0..3, random coordinates and biases.
fn toy_model(r: &mut ChaCha8Rng, spec: &SpaceSpec, kind: RecsysLoss) -> RecsysModel {
    let n = 5;
    let pts = random_points(r, spec, n);
    let bl = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
    let br = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
    RecsysModel::from_parts(pts, 2, bl, br, r.gen_range(0.1..2.0), kind).unwrap()
}

fn with_params(model: &RecsysModel, params: &[f64]) -> RecsysModel {
    let nc = model.points().coords().len();
    let n = model.points().len();
    let pts =
        PointBuffer::from_coords(model.points().spec().clone(), params[..nc].to_vec()).unwrap();
    RecsysModel::from_parts(
        pts,
        model.num_users(),
        params[nc..nc + n].to_vec(),
        params[nc + n..].to_vec(),
        model.margin(),
        model.loss_kind(),
    )
    .unwrap()
}

fn flat(model: &RecsysModel) -> Vec<f64> {
    let mut p = model.points().coords().to_vec();
    p.extend_from_slice(model.bias_lhs());
    p.extend_from_slice(model.bias_rhs());
    p
}

fn flat_grads(g: &RecsysGrads) -> Vec<f64> {
    let mut p = g.coords.clone();
    p.extend_from_slice(&g.bias_lhs);
    p.extend_from_slice(&g.bias_rhs);
    p
}

fn smooth_for_all_pairs(model: &RecsysModel) -> bool {
    let pts = model.points();
    (0..2).all(|u| (2..5).all(|v| is_smooth(pts.spec(), pts.row(u), pts.row(v), GAP)))
}

pub fn hinge_case(r: &mut ChaCha8Rng, spec: &SpaceSpec) -> Option<f64> {
    let model = toy_model(r, spec, RecsysLoss::Hinge);
    if !smooth_for_all_pairs(&model) {
        return None;
    }
    let batch = [(0, 0), (1, 2), (0, 1)];
    let negs: [Vec<usize>; 2] = [vec![2], vec![0, 1]];
    for &(u, v) in &batch {
        for &w in &negs[u] {
            let h = model.margin() - model.score(u, v) + model.score(u, w);
            if h.abs() <= GAP {
                return None;
            }
        }
    }
    let mut grads = RecsysGrads::zeros(&model);
    hinge_loss_and_grad(&model, &batch, |u| &negs[u], &mut grads);
    let fd = central_diff(
        |p| hinge_loss(&with_params(&model, p), &batch, |u| &negs[u]),
        &flat(&model),
        STEP,
    );
    Some(rel_err(&flat_grads(&grads), &fd, 1e-8))
}

pub fn bce_case(r: &mut ChaCha8Rng, spec: &SpaceSpec) -> Option<f64> {
    let model = toy_model(r, spec, RecsysLoss::Bce);
    if !smooth_for_all_pairs(&model) {
        return None;
    }
    let batch = [(0, 0, true), (0, 2, false), (1, 1, true), (1, 0, false)];
    let mut grads = RecsysGrads::zeros(&model);
    bce_recsys_loss_and_grad(&model, &batch, &mut grads);
    let fd = central_diff(
        |p| bce_recsys_loss(&with_params(&model, p), &batch),
        &flat(&model),
        STEP,
    );
    Some(rel_err(&flat_grads(&grads), &fd, 1e-8))
}

/// Fermi-Dirac loss on four points, including the `r` and `t` gradients.
pub fn linkpred_case(r: &mut ChaCha8Rng, spec: &SpaceSpec) -> Option<f64> {
    let pts = random_points(r, spec, 4);
    let batch = [(0, 1, true), (1, 2, false), (0, 3, true), (2, 3, false)];
    if !batch
        .iter()
        .all(|&(u, v, _)| is_smooth(spec, pts.row(u), pts.row(v), GAP))
    {
        return None;
    }
    let (rad, temp) = (r.gen_range(-1.0..3.0), r.gen_range(0.2..3.0));
    let model = LinkPredModel::new(pts.clone(), rad, temp).unwrap();
    let mut gc = vec![0.0; pts.coords().len()];
    let mut grt = [0.0; 2];
    linkpred_loss_and_grad(&model, &batch, &mut gc, &mut grt);
    let nc = pts.coords().len();
    let mut x = pts.coords().to_vec();
    x.extend([rad, temp]);
    let fd = central_diff(
        |p| {
            let q = PointBuffer::from_coords(spec.clone(), p[..nc].to_vec()).unwrap();
            linkpred_loss(&LinkPredModel::new(q, p[nc], p[nc + 1]).unwrap(), &batch)
        },
        &x,
        STEP,
    );
    gc.extend(grt);
    Some(rel_err(&gc, &fd, 1e-8))
}
