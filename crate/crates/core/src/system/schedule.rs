use serde::{Deserialize, Serialize};

use super::family::{clock, decaying_sigmoid};
use crate::scalar::Real;

/// `t ↦ β_t` for targets, or `t ↦ β⁰(t)` for sources.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BetaSchedule<T> {
    Constant { value: Vec<T> },
    /// `a_t = −50σ_τ(τ) + 1/τ²`, `d_t = 15σ_τ(τ) + 2/ln(τ+1)`, with `τ = max(t, 1)`.
    SigmoidDrift,
    /// `β_t = limit + amplitude / (t+1)^power`.
    Decaying { limit: Vec<T>, amplitude: Vec<T>, power: T },
    /// `β_t = center + amplitude · sin(2πt / period)`.
    Sinusoid { center: Vec<T>, amplitude: Vec<T>, period: T },
}

impl<T: Real> BetaSchedule<T> {
    pub fn dim(&self) -> usize {
        match self {
            BetaSchedule::Constant { value } => value.len(),
            BetaSchedule::SigmoidDrift => 2,
            BetaSchedule::Decaying { limit, .. } => limit.len(),
            BetaSchedule::Sinusoid { center, .. } => center.len(),
        }
    }

    pub fn at(&self, t: usize) -> Vec<T> {
        match self {
            BetaSchedule::Constant { value } => value.clone(),
            BetaSchedule::SigmoidDrift => {
                let tau = T::lit(clock(t));
                let s = decaying_sigmoid(tau, tau);
                let a = T::lit(-50.0) * s + T::one() / (tau * tau);
                let d = T::lit(15.0) * s + T::lit(2.0) / (tau + T::one()).ln();
                vec![a, d]
            }
            BetaSchedule::Decaying { limit, amplitude, power } => {
                let f = T::one() / T::lit((t + 1) as f64).powf(*power);
                limit.iter().zip(amplitude).map(|(&l, &a)| l + a * f).collect()
            }
            BetaSchedule::Sinusoid { center, amplitude, period } => {
                let ph = (T::lit(2.0) * T::PI() * T::lit(t as f64) / *period).sin();
                center.iter().zip(amplitude).map(|(&c, &a)| c + a * ph).collect()
            }
        }
    }

    /// `δ_T² = (1/T) Σ_{t<T} ‖β_{t+1} − β_t‖²`.
    pub fn drift_sq(&self, horizon: usize) -> T {
        if horizon == 0 {
            return T::zero();
        }
        let mut acc = T::zero();
        let mut prev = self.at(0);
        for t in 1..=horizon {
            let cur = self.at(t);
            acc = acc + crate::linalg::norm_sq(&crate::linalg::sub(&cur, &prev));
            prev = cur;
        }
        acc / T::lit(horizon as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_drift_first_values() {
        let s: BetaSchedule<f64> = BetaSchedule::SigmoidDrift;
        let b0 = s.at(0);
        let b1 = s.at(1);
        assert_eq!(b0, b1);
        let sig = 1.0 / (1.0 + (-1.0f64).exp());
        assert!((b1[0] - (-50.0 * sig + 1.0)).abs() < 1e-12);
        assert!((b1[1] - (15.0 * sig + 2.0 / 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn constant_schedule_has_no_drift() {
        let s = BetaSchedule::Constant { value: vec![1.0, 2.0] };
        assert_eq!(s.drift_sq(100), 0.0);
    }
}
