use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::SpaceSpec;
use crate::error::{Error, Result};

/// Half width of the uniform initialization interval.
pub const INIT_HALF_WIDTH: f64 = 1e-3;

/// Row-major `n x total_dim` coordinates of embedded points.
#[derive(Debug, Clone, PartialEq)]
pub struct PointBuffer {
    spec: SpaceSpec,
    num_points: usize,
    coords: Vec<f64>,
}

impl PointBuffer {
    pub fn from_coords(spec: SpaceSpec, coords: Vec<f64>) -> Result<Self> {
        let dim = spec.total_dim();
        if coords.len() % dim != 0 {
            return Err(Error::InvalidArgument(format!(
                "{} coordinates do not split into rows of {dim}",
                coords.len()
            )));
        }
        let buf = Self {
            num_points: coords.len() / dim,
            spec,
            coords,
        };
        for i in 0..buf.num_points {
            buf.spec.check_point(buf.row(i))?;
        }
        Ok(buf)
    }

    pub fn zeros(spec: SpaceSpec, num_points: usize) -> Self {
        let coords = vec![0.0; num_points * spec.total_dim()];
        Self {
            spec,
            num_points,
            coords,
        }
    }

    pub fn spec(&self) -> &SpaceSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.num_points
    }

    pub fn is_empty(&self) -> bool {
        self.num_points == 0
    }

    pub fn dim(&self) -> usize {
        self.spec.total_dim()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.coords[i * d..(i + 1) * d]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let d = self.dim();
        &mut self.coords[i * d..(i + 1) * d]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.coords
    }

    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.spec.dist(self.row(i), self.row(j))
    }

    /// Multiplies every coordinate by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.coords.iter_mut().for_each(|v| *v *= factor);
        out
    }

    /// Projects every row into the feasible set.
    pub fn project_all(&mut self) {
        let d = self.dim();
        for row in self.coords.chunks_mut(d) {
            self.spec.project(row);
        }
    }
}

/// Disjoint mutable rows `a` and `b` of a row-major buffer.
#[inline]
pub(crate) fn two_rows_mut(
    buf: &mut [f64],
    dim: usize,
    a: usize,
    b: usize,
) -> (&mut [f64], &mut [f64]) {
    assert_ne!(a, b);
    let (lo, hi) = (a.min(b), a.max(b));
    let (head, tail) = buf.split_at_mut(hi * dim);
    let r_lo = &mut head[lo * dim..(lo + 1) * dim];
    let r_hi = &mut tail[..dim];
    if a < b {
        (r_lo, r_hi)
    } else {
        (r_hi, r_lo)
    }
}

/// I.i.d. uniform coordinates in the open interval `(-1e-3, 1e-3)`.
pub fn init_points(spec: &SpaceSpec, n: usize, seed: u64) -> PointBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Uniform::new(-INIT_HALF_WIDTH, INIT_HALF_WIDTH);
    let coords = (0..n * spec.total_dim())
        .map(|_| loop {
            let v = dist.sample(&mut rng);
            if v != -INIT_HALF_WIDTH {
                break v;
            }
        })
        .collect();
    let mut buf = PointBuffer {
        spec: spec.clone(),
        num_points: n,
        coords,
    };
    buf.project_all();
    buf
}

/// Writes `# space=<spec> nodes=<n> dim=<d>` followed by one
/// `node_id coord_0 ... coord_{d-1}` row per point. Coordinates use the
/// shortest representation that round-trips exactly.
pub fn write_embedding(points: &PointBuffer, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(
        out,
        "# space={} nodes={} dim={}",
        points.spec(),
        points.len(),
        points.dim()
    )?;
    for i in 0..points.len() {
        write!(out, "{i}")?;
        for v in points.row(i) {
            write!(out, " {v:?}")?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_embedding(path: impl AsRef<Path>) -> Result<PointBuffer> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_owned(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty embedding file".into()))?;
    let mut spec = None;
    let mut nodes = None;
    for field in header.trim_start_matches('#').split_whitespace() {
        match field.split_once('=') {
            Some(("space", v)) => spec = Some(v.parse::<SpaceSpec>()?),
            Some(("nodes", v)) => nodes = v.parse::<usize>().ok(),
            _ => {}
        }
    }
    let spec = spec.ok_or_else(|| parse_err(1, "header lacks space=".into()))?;
    let nodes = nodes.ok_or_else(|| parse_err(1, "header lacks nodes=".into()))?;
    let dim = spec.total_dim();
    let mut coords = vec![0.0; nodes * dim];
    let mut seen = vec![false; nodes];
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let id: usize = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .filter(|&id| id < nodes)
            .ok_or_else(|| parse_err(line_no, "bad node id".into()))?;
        let values: Vec<f64> = tokens
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse_err(line_no, e.to_string()))?;
        if values.len() != dim {
            return Err(parse_err(
                line_no,
                format!("expected {dim} coordinates, found {}", values.len()),
            ));
        }
        coords[id * dim..(id + 1) * dim].copy_from_slice(&values);
        seen[id] = true;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(parse_err(0, format!("node {missing} has no row")));
    }
    PointBuffer::from_coords(spec, coords)
}
