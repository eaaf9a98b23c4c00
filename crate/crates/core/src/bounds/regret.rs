//! Pathwise check of the projected-LMS regret inequality against hidden truth.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, sub};
use crate::online::{run_online_with, PredictorConfig};
use crate::scalar::Real;
use crate::system::{SystemSpec, Trajectory};

/// Both sides of the inequality for one ensemble member.
#[derive(Clone, Debug, PartialEq)]
pub struct RegretCheck<T> {
    /// `Σ (β̃_{t,i}ᵀφ_t)²`.
    pub lhs: T,
    pub rhs: T,
}

impl<T: Real> RegretCheck<T> {
    pub fn slack(&self) -> T {
        self.rhs - self.lhs
    }
}

/// `(1 + A²/d)²(1 + A²/((1−γ)²d))`.
pub fn lms_base_constant<T: Real>(a: T, gamma: T, d: T) -> T {
    let q = T::one() + a * a / d;
    q * q * (T::one() + a * a / ((T::one() - gamma).powi(2) * d))
}

/// Runs the predictor on `traj` (whose hidden truth must include `ε_t`) and evaluates
/// `Σ(β̃ᵀφ)² ≤ C'Σ[(1+1/d)w² + (1+d)ε²] + 16dBTδ_T + 4dTδ_T² + 16dB²` for every model.
pub fn lms_regret_check<T: Real>(
    traj: &Trajectory<T>,
    alpha_hat: &[T],
    config: &PredictorConfig<T>,
    spec: &SystemSpec<T>,
) -> Result<Vec<RegretCheck<T>>> {
    let h = traj.hidden.as_ref().ok_or_else(|| Error::invalid("regret check needs hidden truth"))?;
    let eps = h.eps.as_ref().ok_or_else(|| Error::invalid("regret check needs ε_t; fill the discrepancy first"))?;
    let mut lhs = vec![T::zero(); config.n2()];
    run_online_with(traj, alpha_hat, config, spec, false, |t, state, phi| {
        for (l, est) in lhs.iter_mut().zip(&state.estimates) {
            let e = dot(&sub(&h.beta[t], est), phi);
            *l = *l + e * e;
        }
    })?;
    let (a, b, d) = (config.feature_bound, config.radius, config.d);
    let horizon = T::lit(traj.len() as f64);
    let base = lms_base_constant(a, config.gamma, d);
    let noise: T = h
        .noise
        .iter()
        .zip(eps)
        .map(|(&w, &e)| (T::one() + T::one() / d) * w * w + (T::one() + d) * e * e)
        .sum();
    let delta_sq = traj.drift_sq()?;
    let delta = delta_sq.sqrt();
    let sixteen = T::lit(16.0);
    let rhs = base * noise + sixteen * d * b * horizon * delta + T::lit(4.0) * d * horizon * delta_sq + sixteen * d * b * b;
    if h.beta.iter().any(|beta| norm(beta) > b * (T::one() + T::lit(1e-12))) {
        return Err(Error::invalid("hidden β_t leaves the ball of radius B"));
    }
    Ok(lhs.into_iter().map(|lhs| RegretCheck { lhs, rhs }).collect())
}
