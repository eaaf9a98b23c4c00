//! Generalization bound for the offline estimate and its assembled constants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

fn one_f64() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

/// Every constant entering the generalization and prediction bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    /// `L`: Lipschitz constant of `α ↦ f_t(α, β⁰(t), x)`.
    pub lipschitz: f64,
    /// `n`: dimension of `α`.
    pub alpha_dim: usize,
    /// `R_M`: radius of the parameter set.
    pub radius_m: f64,
    #[serde(default = "one_f64")]
    pub b1: f64,
    #[serde(default)]
    pub b2: f64,
    #[serde(default = "one_f64")]
    pub b1_prime: f64,
    #[serde(default)]
    pub b2_prime: f64,
    pub sigma_v: f64,
    /// `p`: dimension of the regressor entering the noise term.
    #[serde(default = "one_usize")]
    pub noise_dim: usize,
    #[serde(default)]
    pub eps_star: f64,
    /// `D(P_T ‖ P_T′)`.
    #[serde(default)]
    pub kl: f64,
    pub n1: usize,
    pub horizon: usize,
    #[serde(default)]
    pub l1: f64,
    /// `L_{0,T} = (1/T) Σ L₀(t)`.
    #[serde(default)]
    pub l0_mean: f64,
    /// `δ_T`.
    #[serde(default)]
    pub delta: f64,
    /// `σ_T²`.
    #[serde(default)]
    pub sigma_sq: f64,
    /// `A`.
    #[serde(default)]
    pub feature_bound: f64,
    /// `B`.
    #[serde(default)]
    pub beta_bound: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub d: f64,
    #[serde(default)]
    pub noise_bound: f64,
    #[serde(default)]
    pub output_bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Measured `sup M_{T,N₁}`; replaces its expectation bound when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub empirical_offset: Option<f64>,
}

impl BoundInputs {
    pub fn with_l0_schedule(mut self, l0: &[f64]) -> Self {
        self.l0_mean = if l0.is_empty() { 0.0 } else { l0.iter().sum::<f64>() / l0.len() as f64 };
        self
    }

    pub fn validate_generalization(&self) -> Result<()> {
        let nonneg = [
            ("L", self.lipschitz),
            ("R_M", self.radius_m),
            ("b1", self.b1),
            ("b1'", self.b1_prime),
            ("sigma_v", self.sigma_v),
            ("eps*", self.eps_star),
            ("KL", self.kl),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0) {
                return Err(Error::invalid(format!("{name} must be nonnegative, got {v}")));
            }
        }
        for (name, v) in [("b2", self.b2), ("b2'", self.b2_prime)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} must lie in [0, 1), got {v}")));
            }
        }
        if self.n1 == 0 || self.horizon == 0 {
            return Err(Error::invalid("N1 and T must be positive"));
        }
        if self.alpha_dim == 0 {
            return Err(Error::invalid("n must be positive"));
        }
        Ok(())
    }
}

/// `C(L, n, R_M) = 8√8 L R_M (6√8 L R_M)ⁿ`.
pub fn covering_constant<T: Real>(l: T, n: usize, r: T) -> T {
    let s8 = T::lit(8f64.sqrt());
    T::lit(8.0) * s8 * l * r * (T::lit(6.0) * s8 * l * r).powi(n as i32)
}

/// `γ₀ = 2 · 16 b₁ L² R_M² (n + 3)`.
pub fn gamma0<T: Real>(l: T, n: usize, r: T, b1: T) -> T {
    T::lit(32.0) * b1 * l * l * r * r * T::lit((n + 3) as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneralizationBound<T> {
    pub total: T,
    /// `C₁ log(N₁T)/(N₁T^{1−b₂}) = 2r² + 8L²R_M² min(1, P(A))`.
    pub concentration: T,
    /// `8 × (offset bound or measured offset)`.
    pub offset: T,
    /// `8L²R_M² b₁′ D/T^{1−b₂′}`.
    pub shift: T,
    /// `16ε*`.
    pub optimization: T,
    pub c1: T,
    pub c0: T,
    pub r_sq: T,
    pub p_bad: T,
    /// `C₀σ_v² log(N₁T)/(N₁T)`.
    pub offset_expectation: T,
    pub pre_asymptotic: bool,
    pub n0: T,
}

struct Concentration<T> {
    value: T,
    r_sq: T,
    p_bad: T,
    pre_asymptotic: bool,
}

fn concentration<T: Real>(inp: &BoundInputs, n1: usize, horizon: usize) -> Concentration<T> {
    let (l, r, b1) = (T::lit(inp.lipschitz), T::lit(inp.radius_m), T::lit(inp.b1));
    let n = inp.alpha_dim;
    let n1f = T::lit(n1 as f64);
    let tb = T::lit(horizon as f64).powf(T::one() - T::lit(inp.b2));
    let log_nt = T::lit((n1 as f64) * (horizon as f64)).ln();
    let r_sq = gamma0(l, n, r, b1) * log_nt / (n1f * tb);
    let lr2 = l * l * r * r;
    let p_bad = if r_sq > T::zero() {
        let expo = -(n1f * r_sq * tb) / (T::lit(32.0) * b1 * lr2);
        let pa = covering_constant(l, n, r) * r_sq.sqrt().powi(-((n + 1) as i32)) * expo.exp();
        if pa.is_nan() { T::one() } else { pa.min(T::one()) }
    } else {
        T::one()
    };
    let tail = T::lit(8.0) * lr2 * p_bad;
    let two_r = T::lit(2.0) * r_sq;
    let value = two_r + tail;
    let vacuous = value >= T::lit(8.0) * lr2;
    Concentration { value, r_sq, p_bad, pre_asymptotic: vacuous || tail > two_r }
}

/// `4σ_v p γ + γ² + 4σ_v²(n+1) log(C/γ)/(N₁T)` at `γ = 1/(N₁T)`.
pub fn offset_expectation_bound<T: Real>(inp: &BoundInputs) -> T {
    let nt = T::lit(inp.n1 as f64 * inp.horizon as f64);
    let g = T::one() / nt;
    let sv = T::lit(inp.sigma_v);
    let c = covering_constant(T::lit(inp.lipschitz), inp.alpha_dim, T::lit(inp.radius_m));
    let log_term = (c * nt).ln().max(T::zero());
    T::lit(4.0) * sv * T::lit(inp.noise_dim as f64) * g
        + g * g
        + T::lit(4.0) * sv * sv * T::lit((inp.alpha_dim + 1) as f64) * log_term / nt
}

/// Smallest `N₁T` (with `N₁` fixed) beyond which the concentration term is neither
/// dominated by the bad-event mass nor above the trivial level `8L²R_M²`.
pub fn threshold_n0<T: Real>(inp: &BoundInputs) -> T {
    let bad = |t: usize| concentration::<T>(inp, inp.n1, t).pre_asymptotic;
    if !bad(1) {
        return T::lit(inp.n1 as f64);
    }
    let mut hi = 2usize;
    while bad(hi) {
        if hi > 1 << 60 {
            return T::infinity();
        }
        hi *= 2;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if bad(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    T::lit(inp.n1 as f64 * hi as f64)
}

pub fn generalization_bound<T: Real>(inp: &BoundInputs) -> Result<GeneralizationBound<T>> {
    inp.validate_generalization()?;
    let conc = concentration::<T>(inp, inp.n1, inp.horizon);
    let nt = T::lit(inp.n1 as f64 * inp.horizon as f64);
    let log_nt = nt.ln();
    let rate = log_nt / (T::lit(inp.n1 as f64) * T::lit(inp.horizon as f64).powf(T::one() - T::lit(inp.b2)));
    let expectation = offset_expectation_bound::<T>(inp);
    let sv2 = T::lit(inp.sigma_v * inp.sigma_v);
    let c0 = if log_nt > T::zero() && sv2 > T::zero() { expectation * nt / (sv2 * log_nt) } else { T::nan() };
    let c1 = if rate > T::zero() { conc.value / rate } else { T::nan() };
    let eight = T::lit(8.0);
    let offset = eight * inp.empirical_offset.map_or(expectation, T::lit);
    let (l, r) = (T::lit(inp.lipschitz), T::lit(inp.radius_m));
    let shift = eight * l * l * r * r * T::lit(inp.b1_prime) * T::lit(inp.kl)
        / T::lit(inp.horizon as f64).powf(T::one() - T::lit(inp.b2_prime));
    let optimization = T::lit(16.0 * inp.eps_star);
    Ok(GeneralizationBound {
        total: conc.value + offset + shift + optimization,
        concentration: conc.value,
        offset,
        shift,
        optimization,
        c1,
        c0,
        r_sq: conc.r_sq,
        p_bad: conc.p_bad,
        offset_expectation: expectation,
        pre_asymptotic: conc.pre_asymptotic,
        n0: threshold_n0(inp),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn example() -> BoundInputs {
        BoundInputs {
            lipschitz: 1.0,
            alpha_dim: 2,
            radius_m: 5.0,
            b1: 1.0,
            b2: 0.0,
            b1_prime: 1.0,
            b2_prime: 0.0,
            sigma_v: 1.0,
            noise_dim: 1,
            eps_star: 0.0,
            kl: 50.0,
            n1: 4,
            horizon: 256,
            l1: 0.0,
            l0_mean: 0.0,
            delta: 0.0,
            sigma_sq: 0.0,
            feature_bound: 1.0,
            beta_bound: 1.0,
            gamma: 0.5,
            d: 5.0,
            noise_bound: 1.0,
            output_bound: 1.0,
            lambda: None,
            empirical_offset: None,
        }
    }

    #[test]
    fn covering_and_radius_constants() {
        let c: f64 = covering_constant(1.0, 2, 5.0);
        let s8 = 8f64.sqrt();
        assert!((c - 8.0 * s8 * 5.0 * (30.0 * s8).powi(2)).abs() < 1e-6);
        assert_eq!(gamma0(1.0, 2, 5.0, 1.0), 4000.0);
    }

    #[test]
    fn breakdown_adds_up() {
        let g: GeneralizationBound<f64> = generalization_bound(&example()).unwrap();
        assert_eq!(g.total, g.concentration + g.offset + g.shift + g.optimization);
        assert!((g.shift - 8.0 * 25.0 * 50.0 / 256.0).abs() < 1e-12);
        assert!(!g.pre_asymptotic);
        assert!(g.n0 <= 1024.0);
    }

    #[test]
    fn doubling_n1_roughly_halves() {
        let mut a = example();
        a.kl = 0.0;
        a.horizon = 4096;
        let g1: GeneralizationBound<f64> = generalization_bound(&a).unwrap();
        a.n1 *= 2;
        let g2: GeneralizationBound<f64> = generalization_bound(&a).unwrap();
        let nt = 4.0 * 4096.0f64;
        let expect = 0.5 * (2.0 * nt).ln() / nt.ln();
        assert!((g2.total / g1.total - expect).abs() < 0.01, "{}", g2.total / g1.total);
    }

    #[test]
    fn tiny_samples_are_pre_asymptotic() {
        let mut a = example();
        a.n1 = 1;
        a.horizon = 2;
        let g: GeneralizationBound<f64> = generalization_bound(&a).unwrap();
        assert!(g.pre_asymptotic);
        assert!(g.n0 > 2.0);
    }

    #[test]
    fn invalid_inputs_rejected() {
        let mut a = example();
        a.b2 = 1.0;
        assert!(generalization_bound::<f64>(&a).is_err());
        let mut a = example();
        a.n1 = 0;
        assert!(generalization_bound::<f64>(&a).is_err());
    }
}
