use serde::{Deserialize, Serialize};

use super::domain::CompactBox;
use super::family::ModelFamily;
use super::noise::NoiseLaw;
use super::regressor::RegressorDynamics;
use super::schedule::BetaSchedule;
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::scalar::Real;

/// Declared constants of a system. `None` means "not declared"; checks are skipped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecBounds<T> {
    /// `A`: bound on `‖φ_t(α̂, x_t)‖`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_bound: Option<T>,
    /// `B`: radius of the ball holding every `β_t`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_bound: Option<T>,
    /// `M_f`: bound on `|β_tᵀφ_t(α*, x_t)|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_bound: Option<T>,
    /// `W_max`; overrides the bound implied by the noise law.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_bound: Option<T>,
    /// `L`: Lipschitz constant of `α ↦ f_t(α, β⁰(t), x)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<T>,
}

impl<T> Default for SpecBounds<T> {
    fn default() -> Self {
        Self { feature_bound: None, beta_bound: None, output_bound: None, noise_bound: None, lipschitz: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec<T> {
    pub id: String,
    pub family: ModelFamily,
    pub alpha_star: Vec<T>,
    pub parameter_box: CompactBox<T>,
    pub beta: BetaSchedule<T>,
    pub regressors: RegressorDynamics,
    pub noise: NoiseLaw,
    #[serde(default)]
    pub bounds: SpecBounds<T>,
}

impl<T: Real> SystemSpec<T> {
    pub fn validate(&self) -> Result<()> {
        self.parameter_box.validate()?;
        self.noise.validate()?;
        self.regressors.validate()?;
        let n = self.family.alpha_dim();
        if self.parameter_box.dim() != n || self.alpha_star.len() != n {
            return Err(Error::invalid(format!("{}: alpha dimension must be {n}", self.id)));
        }
        if !self.parameter_box.contains(&self.alpha_star) {
            return Err(Error::invalid(format!("{}: alpha* lies outside the parameter box", self.id)));
        }
        if self.beta.dim() != self.family.beta_dim() {
            return Err(Error::invalid(format!(
                "{}: beta schedule has dimension {}, family needs {}",
                self.id,
                self.beta.dim(),
                self.family.beta_dim()
            )));
        }
        if self.regressors.dim() != self.family.x_dim() {
            return Err(Error::invalid(format!(
                "{}: regressors have dimension {}, family needs {}",
                self.id,
                self.regressors.dim(),
                self.family.x_dim()
            )));
        }
        Ok(())
    }

    pub fn alpha_dim(&self) -> usize {
        self.family.alpha_dim()
    }

    pub fn beta_dim(&self) -> usize {
        self.family.beta_dim()
    }

    pub fn x_dim(&self) -> usize {
        self.family.x_dim()
    }

    /// `W_max`, from the declared override or the noise law.
    pub fn noise_bound(&self) -> Option<T> {
        self.bounds.noise_bound.or_else(|| self.noise.bound().map(T::lit))
    }

    pub fn sigma_v(&self) -> T {
        T::lit(self.noise.sub_gaussian_proxy())
    }

    /// `f_t(α, β, x) = βᵀφ_t(α, x)`.
    pub fn eval_model(&self, alpha: &[T], beta: &[T], x: &[T], t: usize) -> Result<T> {
        if alpha.len() != self.alpha_dim() || beta.len() != self.beta_dim() || x.len() != self.x_dim() {
            return Err(Error::invalid("dimension mismatch in eval_model"));
        }
        if !self.parameter_box.contains(alpha) {
            return Err(Error::invalid("alpha outside the parameter box"));
        }
        Ok(dot(beta, &self.family.features(t, alpha, x)))
    }

    pub fn features(&self, t: usize, alpha: &[T], x: &[T]) -> Vec<T> {
        self.family.features(t, alpha, x)
    }
}

pub fn eval_model<T: Real>(spec: &SystemSpec<T>, alpha: &[T], beta: &[T], x: &[T], t: usize) -> Result<T> {
    spec.eval_model(alpha, beta, x, t)
}
