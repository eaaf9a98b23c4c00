//! Canonical systems used by the preset experiments.

use num_rational::BigRational;

use crate::bounds::FiniteChain;
use crate::error::Result;
use crate::system::{BetaSchedule, CompactBox, ModelFamily, NoiseLaw, RegressorDynamics, SpecBounds, SystemSpec};

fn gaussian(mean: f64, sd: f64) -> NoiseLaw {
    NoiseLaw::Gaussian { mean, sd }
}

/// Box searched by the offline stage of the sigmoid example.
pub fn sigmoid_box() -> CompactBox<f64> {
    CompactBox { lo: vec![-3.5, -5.5], hi: vec![6.5, 4.5] }
}

fn sigmoid_spec(id: &str, beta: BetaSchedule<f64>, x0_mean: f64) -> SystemSpec<f64> {
    SystemSpec {
        id: id.into(),
        family: ModelFamily::DecayingSigmoid,
        alpha_star: vec![1.5, -0.5],
        parameter_box: sigmoid_box(),
        beta,
        regressors: RegressorDynamics::SigmoidMarkov {
            gain: 100.0,
            init: gaussian(x0_mean, 1.0),
            innovation: gaussian(0.0, 1.0),
        },
        noise: gaussian(0.0, 1.0),
        bounds: SpecBounds { feature_bound: Some(2f64.sqrt()), ..SpecBounds::default() },
    }
}

/// Source of the sigmoid example: `a ≡ 20`, `d ≡ −10`, `x₀ ~ N(0, 1)`.
pub fn sigmoid_source() -> SystemSpec<f64> {
    sigmoid_spec("sigmoid-source", BetaSchedule::Constant { value: vec![20.0, -10.0] }, 0.0)
}

/// Target of the sigmoid example: drifting `(a_t, d_t)`, `x₀ ~ N(10, 1)`.
pub fn sigmoid_target() -> SystemSpec<f64> {
    sigmoid_spec("sigmoid-target", BetaSchedule::SigmoidDrift, 10.0)
}

/// Scalar-output tanh unit driven by its own output and a feedback input.
pub fn autoregressive_source() -> SystemSpec<f64> {
    SystemSpec {
        id: "ar-tanh".into(),
        family: ModelFamily::TanhNetwork { hidden: 1, inputs: 2 },
        alpha_star: vec![0.8, -0.6],
        parameter_box: CompactBox { lo: vec![-2.0, -2.0], hi: vec![2.0, 2.0] },
        beta: BetaSchedule::Constant { value: vec![1.0, 0.0] },
        regressors: RegressorDynamics::Autoregressive {
            y_lags: 1,
            u_lags: 1,
            feedback: 0.5,
            init: NoiseLaw::Uniform { half_width: 1.0 },
            input: NoiseLaw::Uniform { half_width: 1.0 },
        },
        noise: NoiseLaw::Uniform { half_width: 2.5 },
        bounds: SpecBounds::default(),
    }
}

/// An independent copy of [`autoregressive_source`] started from a different law.
pub fn autoregressive_copy() -> SystemSpec<f64> {
    let mut s = autoregressive_source();
    s.id = "ar-tanh-copy".into();
    if let RegressorDynamics::Autoregressive { init, .. } = &mut s.regressors {
        *init = gaussian(0.5, 1.0);
    }
    s
}

/// `sup_u |u sech²(u)|`, attained near `u ≈ 0.7717`.
pub const TANH_SLOPE_PEAK: f64 = 0.44775;

/// One tanh unit on i.i.d. Gaussian inputs, with `α` kept away from zero so
/// that `|∂f/∂α| = |β₀ x sech²(αx)| ≤ |β₀| · TANH_SLOPE_PEAK / α_lo` for every `x`.
pub fn tanh_iid(beta0: f64, input_mean: f64, noise_sd: f64) -> SystemSpec<f64> {
    let lo = 0.5;
    SystemSpec {
        id: "tanh-iid".into(),
        family: ModelFamily::TanhNetwork { hidden: 1, inputs: 1 },
        alpha_star: vec![1.5],
        parameter_box: CompactBox { lo: vec![lo], hi: vec![3.0] },
        beta: BetaSchedule::Constant { value: vec![beta0, 0.0] },
        regressors: RegressorDynamics::Iid { law: gaussian(input_mean, 1.0), dim: 1 },
        noise: gaussian(0.0, noise_sd),
        bounds: SpecBounds { lipschitz: Some(beta0.abs() * TANH_SLOPE_PEAK / lo), ..SpecBounds::default() },
    }
}

/// Target with bounded noise and a parameter that settles to `limit`.
pub fn settling_target(limit: Vec<f64>, amplitude: Vec<f64>, half_width: f64) -> SystemSpec<f64> {
    SystemSpec {
        id: "settling-target".into(),
        family: ModelFamily::TanhNetwork { hidden: 1, inputs: 1 },
        alpha_star: vec![1.2],
        parameter_box: CompactBox { lo: vec![0.2], hi: vec![3.0] },
        beta: BetaSchedule::Decaying { limit, amplitude, power: 1.0 },
        regressors: RegressorDynamics::Iid { law: NoiseLaw::Uniform { half_width: 2.0 }, dim: 1 },
        noise: NoiseLaw::Uniform { half_width },
        bounds: SpecBounds { feature_bound: Some(2f64.sqrt()), ..SpecBounds::default() },
    }
}

/// The matching source: same features, `β⁰ ≡ limit`.
pub fn settling_source(limit: Vec<f64>, half_width: f64) -> SystemSpec<f64> {
    let mut s = settling_target(limit.clone(), vec![0.0; limit.len()], half_width);
    s.id = "settling-source".into();
    s.beta = BetaSchedule::Constant { value: limit };
    s
}

/// Symmetric two-state chain flipping with probability `flip`, started stationary.
pub fn two_state_chain(flip: (i64, i64), horizon: usize) -> Result<FiniteChain<BigRational>> {
    let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    let (n, d) = flip;
    let kernel = vec![vec![q(d - n, d), q(n, d)], vec![q(n, d), q(d - n, d)]];
    FiniteChain::homogeneous(vec![q(1, 2), q(1, 2)], kernel, horizon)
}

/// The mixing chain of the dependency demo: second eigenvalue `0.1`.
pub fn mixing_chain(horizon: usize) -> Result<FiniteChain<BigRational>> {
    two_state_chain((9, 20), horizon)
}
