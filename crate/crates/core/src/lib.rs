//! Two-stage prediction for drifting nonlinear stochastic systems.
//!
//! An offline stage fits the nonlinear parameter `α` by grid or random search
//! over a compact box, with a certificate on the achieved sub-optimality. An
//! online stage tracks the drifting linear parameter `β_t` with an ensemble of
//! projected-LMS filters whose predictions are aggregated by exponential
//! weights. The `bounds` module evaluates the accompanying error bounds and
//! the `harness` module runs preset experiments.

pub mod bounds;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod offline;
pub mod online;
pub mod scalar;
pub mod system;

pub use error::{Error, Result};
pub use scalar::{Probability, Real};

pub type Spec = system::SystemSpec<f64>;
pub type Spec32 = system::SystemSpec<f32>;
pub type Dataset = system::MultiTrajectoryDataset<f64>;
pub type Trajectory64 = system::Trajectory<f64>;
pub type Config = online::PredictorConfig<f64>;
pub type Ensemble = online::MetaLms<f64>;
pub type Ensemble32 = online::MetaLms<f32>;
pub type Estimate = offline::NlsEstimate<f64>;
pub type ExactProb = num_rational::BigRational;
