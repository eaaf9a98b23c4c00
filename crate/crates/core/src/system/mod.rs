//! System, parameter and trajectory types plus source/target simulators.

mod domain;
mod family;
pub mod io;
mod noise;
mod regressor;
mod schedule;
mod spec;
mod trajectory;

pub use domain::{BallDomain, CompactBox};
pub use family::{clock, decaying_sigmoid, ModelFamily};
pub use noise::NoiseLaw;
pub use regressor::RegressorDynamics;
pub use schedule::BetaSchedule;
pub use spec::{eval_model, SpecBounds, SystemSpec};
pub use trajectory::{
    simulate_path, simulate_source, simulate_target, stream_rng, HiddenTruth, MultiTrajectoryDataset, Trajectory,
    TARGET_STREAM,
};
