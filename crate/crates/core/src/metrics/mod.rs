//! Fidelity measures for reconstructed graphs and ranking metrics for the
//! downstream tasks. Library functions return fractions; percentages are a
//! presentation concern.

mod fidelity;
mod ranking;

pub use fidelity::{
    d_avg, distortion_histogram, distortions, fraction_within, map_from_neighbors, map_score,
    FidelityReport, HistogramBin, DEFAULT_HISTOGRAM_BINS, RANK_TIE_EPS,
};
pub use ranking::{auc, hr_at_k, ndcg_at_k, rank_of_target};
