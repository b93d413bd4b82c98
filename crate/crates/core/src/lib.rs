//! Graph embeddings into normed, hyperbolic and product metric spaces.
//!
//! Graphs are turned into shortest-path targets ([`graph::apsp`]), embedded
//! by minimizing the distortion loss `sum |(d_Y / d_G)^2 - 1|`
//! ([`engine::train`]), and scored with average distortion and mean
//! average precision ([`metrics`]). The [`tasks`] module holds the shallow
//! recommender and link-prediction models built on the same spaces.

pub mod engine;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod space;
pub mod tasks;

pub use engine::{
    grid_search, train, BatchSize, OptimizerKind, RunReport, SearchGrid, TrainConfig,
};
pub use error::{Error, Result};
pub use graph::{apsp, Graph, Pair, PairStore};
pub use metrics::FidelityReport;
pub use space::{init_points, Factor, Norm, PointBuffer, SpaceSpec};
