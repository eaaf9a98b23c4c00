//! Explicit bounds and constants, with exact small-instance evaluators.

pub mod depmatrix;
pub mod drift;
pub mod excitation;
pub mod generalization;
pub mod kl;
pub mod prediction;
pub mod regret;

pub use depmatrix::{dependency_matrix, dependency_matrix_state_events, events_needed, DependencyMatrix, DEFAULT_EVENT_CAP};
pub use drift::{case2_minimizer, case2_radius, drift_characterize, Case2Step, DriftBranch, DriftCase, DriftConstants};
pub use excitation::{averaged_gradient, excitation_margin, martingale_offset, ExcitationMargin, GradientMode};
pub use generalization::{
    covering_constant, gamma0, generalization_bound, offset_expectation_bound, threshold_n0, BoundInputs,
    GeneralizationBound,
};
pub use kl::{
    kl_chain, kl_discrete, kl_finite_chain, kl_gaussian, kl_gaussian_ar1, kl_gaussian_same_var, ChainLaw, FiniteChain,
    GaussianAr1,
};
pub use prediction::{c_d, coefficients, prediction_bound, Coefficients, PredictionBound};
pub use regret::{lms_base_constant, lms_regret_check, RegretCheck};
