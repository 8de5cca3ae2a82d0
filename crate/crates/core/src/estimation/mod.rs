//! Fisher information, Cramér–Rao bounds and maximum-likelihood estimation.

mod crb;
mod fisher;
mod mle;

pub use crb::{crb_map, CrbMap, CrbPoint};
pub use fisher::{
    classical_benchmark, device_qfim, fisher_matrix, positive_eigencount, prob_gradient,
    qfim_pure, BenchmarkKind, EventGradients, FisherKind, FisherMatrix, ReferenceArm,
    EIGEN_THRESHOLD, PROBABILITY_FLOOR, SINGULAR_CONDITION,
};
pub use mle::{
    mle_estimate, multinomial, sample_events, task_rng, variance_experiment, EstimationResult,
    EventCounts, LikelihoodModel, MleEstimate, SearchDomain, MLE_GRID, MLE_TOLERANCE,
};
