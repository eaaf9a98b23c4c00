use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Clock used by the time-varying families: `τ(t) = max(t, 1)`.
pub fn clock(t: usize) -> f64 {
    t.max(1) as f64
}

/// `σ_τ(z) = 1 / (τ + e^{−z})`.
pub fn decaying_sigmoid<T: Real>(tau: T, z: T) -> T {
    T::one() / (tau + (-z).exp())
}

/// Explicit feature maps `φ_t(α, x)`; the model output is `βᵀφ_t(α, x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelFamily {
    /// `φ = [αᵀx]`.
    Linear { inputs: usize },
    /// `φ = [α² x]`, scalar α and x.
    Quadratic,
    /// `φ_t = [σ_τ(α₀x + α₁), 1]`, scalar x.
    DecayingSigmoid,
    /// `φ = [tanh(α_jᵀx) for each hidden unit j, 1]`; α is row-major `hidden × inputs`.
    TanhNetwork { hidden: usize, inputs: usize },
}

impl ModelFamily {
    pub fn alpha_dim(&self) -> usize {
        match *self {
            ModelFamily::Linear { inputs } => inputs,
            ModelFamily::Quadratic => 1,
            ModelFamily::DecayingSigmoid => 2,
            ModelFamily::TanhNetwork { hidden, inputs } => hidden * inputs,
        }
    }

    pub fn beta_dim(&self) -> usize {
        match *self {
            ModelFamily::Linear { .. } | ModelFamily::Quadratic => 1,
            ModelFamily::DecayingSigmoid => 2,
            ModelFamily::TanhNetwork { hidden, .. } => hidden + 1,
        }
    }

    pub fn x_dim(&self) -> usize {
        match *self {
            ModelFamily::Linear { inputs } => inputs,
            ModelFamily::Quadratic | ModelFamily::DecayingSigmoid => 1,
            ModelFamily::TanhNetwork { inputs, .. } => inputs,
        }
    }

    /// A bound on `‖φ_t(α, x)‖` valid for every α and x, when one exists.
    pub fn uniform_feature_bound(&self) -> Option<f64> {
        match *self {
            ModelFamily::Linear { .. } | ModelFamily::Quadratic => None,
            ModelFamily::DecayingSigmoid => Some(2f64.sqrt()),
            ModelFamily::TanhNetwork { hidden, .. } => Some(((hidden + 1) as f64).sqrt()),
        }
    }

    pub fn features<T: Real>(&self, t: usize, alpha: &[T], x: &[T]) -> Vec<T> {
        match *self {
            ModelFamily::Linear { .. } => vec![crate::linalg::dot(alpha, x)],
            ModelFamily::Quadratic => vec![alpha[0] * alpha[0] * x[0]],
            ModelFamily::DecayingSigmoid => {
                let tau = T::lit(clock(t));
                vec![decaying_sigmoid(tau, alpha[0] * x[0] + alpha[1]), T::one()]
            }
            ModelFamily::TanhNetwork { hidden, inputs } => {
                let mut phi = Vec::with_capacity(hidden + 1);
                for j in 0..hidden {
                    let row = &alpha[j * inputs..(j + 1) * inputs];
                    phi.push(crate::linalg::dot(row, x).tanh());
                }
                phi.push(T::one());
                phi
            }
        }
    }

    /// `∂φ/∂α` as an `m × n` matrix.
    pub fn feature_jacobian<T: Real>(&self, t: usize, alpha: &[T], x: &[T]) -> Vec<Vec<T>> {
        let n = self.alpha_dim();
        match *self {
            ModelFamily::Linear { .. } => vec![x.to_vec()],
            ModelFamily::Quadratic => vec![vec![T::lit(2.0) * alpha[0] * x[0]]],
            ModelFamily::DecayingSigmoid => {
                let tau = T::lit(clock(t));
                let z = alpha[0] * x[0] + alpha[1];
                let e = (-z).exp();
                let s = tau + e;
                // d/dz 1/(τ + e^{−z}) = e^{−z} / (τ + e^{−z})²
                let g = if e.is_finite() { e / (s * s) } else { T::zero() };
                vec![vec![g * x[0], g], vec![T::zero(), T::zero()]]
            }
            ModelFamily::TanhNetwork { hidden, inputs } => {
                let mut jac = vec![vec![T::zero(); n]; hidden + 1];
                for j in 0..hidden {
                    let row = &alpha[j * inputs..(j + 1) * inputs];
                    let th = crate::linalg::dot(row, x).tanh();
                    let sech2 = T::one() - th * th;
                    for k in 0..inputs {
                        jac[j][j * inputs + k] = sech2 * x[k];
                    }
                }
                jac
            }
        }
    }

    /// `∇_α (βᵀφ_t(α, x))`.
    pub fn gradient<T: Real>(&self, t: usize, alpha: &[T], beta: &[T], x: &[T]) -> Vec<T> {
        let jac = self.feature_jacobian(t, alpha, x);
        (0..self.alpha_dim())
            .map(|k| jac.iter().zip(beta).fold(T::zero(), |acc, (row, &b)| acc + row[k] * b))
            .collect()
    }

    /// Central finite-difference gradient with relative step `1e-6`.
    pub fn gradient_fd<T: Real>(&self, t: usize, alpha: &[T], beta: &[T], x: &[T]) -> Vec<T> {
        let rel = T::lit(1e-6);
        let mut a = alpha.to_vec();
        (0..alpha.len())
            .map(|k| {
                let h = rel * alpha[k].abs().max(T::one());
                a[k] = alpha[k] + h;
                let fp = crate::linalg::dot(beta, &self.features(t, &a, x));
                a[k] = alpha[k] - h;
                let fm = crate::linalg::dot(beta, &self.features(t, &a, x));
                a[k] = alpha[k];
                (fp - fm) / (h + h)
            })
            .collect()
    }
}
