//! Projected-LMS ensemble aggregated by exponential weights.

mod meta;
mod ops;

pub use meta::{
    exp_concavity_threshold, informed_initialization, run_online, run_online_with, EnsembleState, MetaLms,
    PredictionTrace, PredictorConfig, StepRecord,
};
pub use ops::{advance_envelope, lms_step, predict_step, project_ball, update_weights};
