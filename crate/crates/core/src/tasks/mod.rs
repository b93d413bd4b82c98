//! Downstream models on the same spaces: a metric recommender over a
//! user-item bipartite graph and shallow link prediction with a
//! Fermi-Dirac decoder.

mod interactions;
mod linkpred;
mod recsys;

pub use interactions::{load_interactions, split_paths, InteractionSet, LoadedInteractions};
pub use linkpred::{
    fermi_dirac, linkpred_loss, linkpred_loss_and_grad, train_linkpred, LinkPredModel,
    LinkPredReport, LinkSplit, DEV_FRACTION, INIT_RADIUS, INIT_TEMPERATURE, MIN_TEMPERATURE,
    TRAIN_FRACTION,
};
pub use recsys::{
    bce_recsys_loss, bce_recsys_loss_and_grad, evaluate_ranking, hinge_loss, hinge_loss_and_grad,
    sample_eval_negatives, train_recsys, train_recsys_with_margin, RankingMetrics, RecsysGrads,
    RecsysLoss, RecsysModel, RecsysReport, DEFAULT_MARGIN, EVAL_NEGATIVES, HINGE_NEGATIVES,
    PLATEAU_DECAY, TOP_K,
};
