//! Collaborative boosting for multiclass imbalanced classification.
//!
//! The training loop fuses two ideas inside AdaBoost:
//!
//! * a noise-resistant sample weight update driven by a mutual-nearest-neighbor
//!   density factor and a Gaussian confidence factor over classification hardness;
//! * dynamic, region-guided oversampling of under-represented classes, scheduled
//!   across boosting epochs.
//!
//! Everything is deterministic for a fixed seed.

pub mod boosting;
pub mod data;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod hardness;
mod rng;
pub mod sampling;
pub mod tree;

pub use boosting::{
    fit_adaboost_baseline, fit_darg, fit_darg_traced, BetaMode, Components, DargConfig,
    DargEnsemble, EpochTrace, NeighborScope, MODEL_SCHEMA,
};
pub use data::{Dataset, ScalerParams, SplitSpec};
pub use error::{DargError, Result};
pub use eval::{compute_metrics, MetricsReport};
pub use geometry::{DensityProfile, NeighborGraph};
pub use hardness::HardnessProfile;
pub use sampling::{ClusterModel, Region, RegionPartition, SamplingPlan, SynthesisRecord};
pub use tree::DecisionTree;
