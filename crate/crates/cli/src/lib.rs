//! Experiment runner behind the `normembed` binary.

pub mod commands;
pub mod expr;
pub mod plan;
pub mod records;
pub mod svg;
