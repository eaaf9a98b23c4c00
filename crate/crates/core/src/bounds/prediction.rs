//! Prediction-error bound `J_T ≤ J_mis + J_opt + J_est` with explicit coefficients.

use super::generalization::{generalization_bound, BoundInputs, GeneralizationBound};
use crate::error::{Error, Result};
use crate::online::exp_concavity_threshold;
use crate::scalar::Real;

/// `(1 + A²/d)²(1 + A²/((1−γ)²d))(1 + 1/d)`.
pub fn c_d<T: Real>(a: T, gamma: T, d: T) -> T {
    super::regret::lms_base_constant(a, gamma, d) * (T::one() + T::one() / d)
}

/// Per-term coefficients from the pathwise regret algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct Coefficients<T> {
    pub c_d: T,
    /// `C_d / (1 + 1/d)`.
    pub c_base: T,
    /// `√C_d d + 1 + d`.
    pub m_d: T,
    /// Multiplies `Bδ_T + δ_T² + B²/T`.
    pub drift: T,
    /// Multiplies the mean squared discrepancy `(1/T)Σε_t²`.
    pub eps: T,
    /// Multiplies `σ_T²`.
    pub noise: T,
    /// `max(drift, eps)`.
    pub n_d: T,
}

pub fn coefficients<T: Real>(a: T, gamma: T, d: T) -> Result<Coefficients<T>> {
    let floor = (a / (T::one() - gamma)).powi(2);
    if !(gamma >= T::zero() && gamma < T::one()) {
        return Err(Error::invalid("gamma must lie in [0, 1)"));
    }
    if !(d > floor) {
        return Err(Error::invalid(format!("d = {d} must exceed A²/(1−γ)² = {floor}")));
    }
    let cd = c_d(a, gamma, d);
    let base = super::regret::lms_base_constant(a, gamma, d);
    let rc = cd.sqrt();
    let m_d = rc * d + T::one() + d;
    let drift = T::lit(16.0) * m_d / rc;
    let eps = m_d * (base * (T::one() + d) / (rc * d) + T::one());
    let noise = (rc + T::one() + T::one() / d).powi(2);
    Ok(Coefficients { c_d: cd, c_base: base, m_d, drift, eps, noise, n_d: drift.max(eps) })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredictionBound<T> {
    pub j_mis: T,
    pub j_opt: T,
    pub j_est: T,
    pub total: T,
    /// The same terms with every non-noise coefficient replaced by `N_d`.
    pub grouped_total: T,
    pub coefficients: Coefficients<T>,
    pub generalization: GeneralizationBound<T>,
}

pub fn prediction_bound<T: Real>(inp: &BoundInputs) -> Result<PredictionBound<T>> {
    let (a, b, gamma, d) = (T::lit(inp.feature_bound), T::lit(inp.beta_bound), T::lit(inp.gamma), T::lit(inp.d));
    let co = coefficients(a, gamma, d)?;
    if let Some(lambda) = inp.lambda {
        let th = exp_concavity_threshold(inp.output_bound, inp.feature_bound, inp.beta_bound, inp.noise_bound);
        if !(lambda < th) {
            return Err(Error::invalid(format!("lambda = {lambda} is not below the threshold {th}")));
        }
    }
    for (name, v) in [("L1", inp.l1), ("L0", inp.l0_mean), ("delta", inp.delta), ("sigma_T^2", inp.sigma_sq), ("B", inp.beta_bound)] {
        if !(v >= 0.0) {
            return Err(Error::invalid(format!("{name} must be nonnegative, got {v}")));
        }
    }
    let g = generalization_bound::<T>(inp)?;
    let l1 = T::lit(inp.l1);
    let (delta, horizon) = (T::lit(inp.delta), T::lit(inp.horizon as f64));
    let drift_terms = b * delta + delta * delta + b * b / horizon;
    let noise = co.noise * T::lit(inp.sigma_sq);
    let mis = l1 * g.shift + T::lit(inp.l0_mean);
    let opt = l1 * g.optimization;
    let est = l1 * (g.concentration + g.offset);
    let j_mis = co.eps * mis;
    let j_opt = co.eps * opt;
    let j_est = co.eps * est + co.drift * drift_terms + noise;
    let grouped_total = co.n_d * (mis + opt + est + drift_terms) + noise;
    Ok(PredictionBound { j_mis, j_opt, j_est, total: j_mis + j_opt + j_est, grouped_total, coefficients: co, generalization: g })
}
