use rand::Rng;
use serde::{Deserialize, Serialize};

use super::family::{clock, decaying_sigmoid};
use super::noise::NoiseLaw;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// How the regressor `x_{t+1}` is produced from `(t, x_t, y_{t+1})` and fresh randomness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RegressorDynamics {
    /// Exogenous i.i.d. regressors, each coordinate drawn from `law`.
    Iid { law: NoiseLaw, dim: usize },
    /// Deterministic scalar `x_t = slope · t`.
    Ramp { slope: f64 },
    /// Scalar `x_{t+1} = gain · σ_τ(x_t) + innovation`, `x_0 ~ init`.
    SigmoidMarkov { gain: f64, init: NoiseLaw, innovation: NoiseLaw },
    /// `x_t = (y_t, …, y_{t−p+1}, u_t, …, u_{t−q+1})` with `u_t = feedback · tanh(y_t) + v_t`.
    Autoregressive {
        y_lags: usize,
        u_lags: usize,
        feedback: f64,
        init: NoiseLaw,
        input: NoiseLaw,
    },
}

impl RegressorDynamics {
    pub fn dim(&self) -> usize {
        match *self {
            RegressorDynamics::Iid { dim, .. } => dim,
            RegressorDynamics::Ramp { .. } | RegressorDynamics::SigmoidMarkov { .. } => 1,
            RegressorDynamics::Autoregressive { y_lags, u_lags, .. } => y_lags + u_lags,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RegressorDynamics::Iid { law, dim } => {
                if *dim == 0 {
                    return Err(Error::invalid("regressor dimension must be positive"));
                }
                law.validate()
            }
            RegressorDynamics::Ramp { slope } => {
                if slope.is_finite() {
                    Ok(())
                } else {
                    Err(Error::invalid("ramp slope must be finite"))
                }
            }
            RegressorDynamics::SigmoidMarkov { gain, init, innovation } => {
                if !gain.is_finite() {
                    return Err(Error::invalid("gain must be finite"));
                }
                init.validate()?;
                innovation.validate()
            }
            RegressorDynamics::Autoregressive { y_lags, feedback, init, input, .. } => {
                if *y_lags == 0 || !feedback.is_finite() {
                    return Err(Error::invalid("autoregressive regressors need y_lags >= 1"));
                }
                init.validate()?;
                input.validate()
            }
        }
    }

    pub fn initial<T: Real, R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        match self {
            RegressorDynamics::Iid { law, dim } => (0..*dim).map(|_| T::lit(law.sample(rng))).collect(),
            RegressorDynamics::Ramp { .. } => vec![T::zero()],
            RegressorDynamics::SigmoidMarkov { init, .. } => vec![T::lit(init.sample(rng))],
            RegressorDynamics::Autoregressive { y_lags, u_lags, feedback, init, input } => {
                let ys: Vec<f64> = (0..*y_lags).map(|_| init.sample(rng)).collect();
                let mut x: Vec<T> = ys.iter().map(|&y| T::lit(y)).collect();
                for k in 0..*u_lags {
                    let v = input.sample(rng);
                    let u = if k == 0 { feedback * ys[0].tanh() + v } else { v };
                    x.push(T::lit(u));
                }
                x
            }
        }
    }

    /// Produces `x_{t+1}` from `x_t` and the freshly revealed `y_{t+1}`.
    pub fn next<T: Real, R: Rng + ?Sized>(&self, t: usize, x: &[T], y_next: T, rng: &mut R) -> Vec<T> {
        match self {
            RegressorDynamics::Iid { law, dim } => (0..*dim).map(|_| T::lit(law.sample(rng))).collect(),
            RegressorDynamics::Ramp { slope } => vec![T::lit(slope * (t + 1) as f64)],
            RegressorDynamics::SigmoidMarkov { gain, innovation, .. } => {
                let s = decaying_sigmoid(T::lit(clock(t)), x[0]);
                vec![T::lit(*gain) * s + T::lit(innovation.sample(rng))]
            }
            RegressorDynamics::Autoregressive { y_lags, u_lags, feedback, input, .. } => {
                let mut out = Vec::with_capacity(y_lags + u_lags);
                out.push(y_next);
                out.extend_from_slice(&x[..y_lags - 1]);
                if *u_lags > 0 {
                    let v = T::lit(input.sample(rng));
                    out.push(T::lit(*feedback) * y_next.tanh() + v);
                    out.extend_from_slice(&x[*y_lags..y_lags + u_lags - 1]);
                }
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn autoregressive_shifts_lags() {
        let dynamics = RegressorDynamics::Autoregressive {
            y_lags: 2,
            u_lags: 2,
            feedback: 0.5,
            init: NoiseLaw::Zero,
            input: NoiseLaw::Zero,
        };
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let x0: Vec<f64> = dynamics.initial(&mut rng);
        assert_eq!(x0, vec![0.0; 4]);
        let x1 = dynamics.next(0, &x0, 1.0, &mut rng);
        assert_eq!(x1, vec![1.0, 0.0, 0.5 * 1f64.tanh(), 0.0]);
        let x2 = dynamics.next(1, &x1, -2.0, &mut rng);
        assert_eq!(x2, vec![-2.0, 1.0, 0.5 * (-2f64).tanh(), 0.5 * 1f64.tanh()]);
    }

    #[test]
    fn ramp_is_linear_in_time() {
        let dynamics = RegressorDynamics::Ramp { slope: 1.0 };
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let mut x: Vec<f64> = dynamics.initial(&mut rng);
        for t in 0..5 {
            assert_eq!(x, vec![t as f64]);
            x = dynamics.next(t, &x, 0.0, &mut rng);
        }
    }
}
