//! Excitation margin of the offline data and the martingale offset of an estimate.

use crate::error::{Error, Result};
use crate::linalg::{dot, gauss_legendre, sym_eigenvalues};
use crate::scalar::Real;
use crate::system::{MultiTrajectoryDataset, SystemSpec};

/// How `∇_α f_t` is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradientMode {
    Analytic,
    /// Central differences with relative step `1e-6`.
    FiniteDifference,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExcitationMargin<T> {
    /// `min_{α'} λ_min(Σ F_tF_tᵀ)`.
    pub margin: T,
    /// Grid point attaining the minimum.
    pub argmin: Vec<T>,
    pub log_t: T,
}

/// `F_t(α*, α') = ∫₀¹ ∇_α f_t(α' + s(α* − α'), β⁰(t), x_t) ds` by Gauss–Legendre quadrature.
pub fn averaged_gradient<T: Real>(
    spec: &SystemSpec<T>,
    alpha_prime: &[T],
    t: usize,
    x: &[T],
    nodes: &(Vec<f64>, Vec<f64>),
    mode: GradientMode,
) -> Vec<T> {
    let beta = spec.beta.at(t);
    let n = alpha_prime.len();
    let mut acc = vec![T::zero(); n];
    for (&s, &w) in nodes.0.iter().zip(&nodes.1) {
        let s = T::lit(s);
        let pt: Vec<T> = alpha_prime.iter().zip(&spec.alpha_star).map(|(&a, &b)| a + s * (b - a)).collect();
        let g = match mode {
            GradientMode::Analytic => spec.family.gradient(t, &pt, &beta, x),
            GradientMode::FiniteDifference => spec.family.gradient_fd(t, &pt, &beta, x),
        };
        for (a, gi) in acc.iter_mut().zip(g) {
            *a = *a + T::lit(w) * gi;
        }
    }
    acc
}

pub fn excitation_margin<T: Real>(
    data: &MultiTrajectoryDataset<T>,
    alpha_grid: &[Vec<T>],
    quadrature_nodes: usize,
    mode: GradientMode,
) -> Result<ExcitationMargin<T>> {
    let spec = &data.spec;
    let n = spec.alpha_dim();
    if alpha_grid.is_empty() || quadrature_nodes == 0 {
        return Err(Error::invalid("need a nonempty α grid and at least one quadrature node"));
    }
    if alpha_grid.iter().any(|a| a.len() != n) {
        return Err(Error::invalid("α grid point has the wrong dimension"));
    }
    let nodes = gauss_legendre(quadrature_nodes);
    let mut best: Option<(T, Vec<T>)> = None;
    for ap in alpha_grid {
        let mut gram = vec![vec![T::zero(); n]; n];
        for tr in &data.trajectories {
            for (t, x) in tr.x.iter().enumerate() {
                let f = averaged_gradient(spec, ap, t, x, &nodes, mode);
                for i in 0..n {
                    for j in 0..n {
                        gram[i][j] = gram[i][j] + f[i] * f[j];
                    }
                }
            }
        }
        let lmin = sym_eigenvalues(&gram)[0];
        if best.as_ref().is_none_or(|(b, _)| lmin < *b) {
            best = Some((lmin, ap.clone()));
        }
    }
    let (margin, argmin) = best.expect("grid is nonempty");
    Ok(ExcitationMargin { margin, argmin, log_t: T::lit(data.horizon() as f64).ln() })
}

/// `(4/(N₁T)) ΣΣ v·h − (1/(N₁T)) ΣΣ h²` with `h = f_t(α̂) − f_t(α*)` under `β⁰(t)`.
pub fn martingale_offset<T: Real>(data: &MultiTrajectoryDataset<T>, alpha_hat: &[T]) -> Result<T> {
    let spec = &data.spec;
    if alpha_hat.len() != spec.alpha_dim() {
        return Err(Error::invalid("α̂ has the wrong dimension"));
    }
    let (mut cross, mut sq) = (T::zero(), T::zero());
    let mut count = 0usize;
    for tr in &data.trajectories {
        let h = tr.hidden.as_ref().ok_or_else(|| Error::invalid("martingale offset needs hidden noise"))?;
        for (t, x) in tr.x.iter().enumerate() {
            let beta = spec.beta.at(t);
            let diff = dot(&beta, &spec.features(t, alpha_hat, x)) - dot(&beta, &spec.features(t, &spec.alpha_star, x));
            cross = cross + h.noise[t] * diff;
            sq = sq + diff * diff;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::invalid("empty dataset"));
    }
    let nt = T::lit(count as f64);
    Ok((T::lit(4.0) * cross - sq) / nt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::*;

    fn spec(family: ModelFamily, alpha: Vec<f64>, lo: f64, hi: f64, noise: NoiseLaw) -> SystemSpec<f64> {
        let n = alpha.len();
        let m = family.beta_dim();
        SystemSpec {
            id: "t".into(),
            family,
            alpha_star: alpha,
            parameter_box: CompactBox::new(vec![lo; n], vec![hi; n]).unwrap(),
            beta: BetaSchedule::Constant { value: vec![1.0; m] },
            regressors: RegressorDynamics::Iid { law: NoiseLaw::Uniform { half_width: 1.0 }, dim: 1 },
            noise,
            bounds: SpecBounds::default(),
        }
    }

    #[test]
    fn linear_margin_is_gram_of_regressors() {
        let s = spec(ModelFamily::Linear { inputs: 1 }, vec![1.0], 0.0, 2.0, NoiseLaw::Zero);
        let data = simulate_source(&s, 2, 50, 9).unwrap();
        let gram: f64 = data.trajectories.iter().flat_map(|t| t.x.iter()).map(|x| x[0] * x[0]).sum();
        for ap in [0.0, 0.7, 2.0] {
            let m = excitation_margin(&data, &[vec![ap]], 3, GradientMode::Analytic).unwrap();
            assert!((m.margin - gram).abs() < 1e-9 * gram);
        }
    }

    #[test]
    fn quadratic_average_gradient_is_closed_form() {
        let s = spec(ModelFamily::Quadratic, vec![1.8], 1.0, 2.0, NoiseLaw::Zero);
        let nodes = gauss_legendre(2);
        for (ap, x) in [(1.0, 0.5), (1.3, -2.0), (2.0, 1.0)] {
            let f = averaged_gradient(&s, &[ap], 0, &[x], &nodes, GradientMode::Analytic);
            assert!((f[0] - (1.8 + ap) * x).abs() < 1e-13);
            let g = averaged_gradient(&s, &[ap], 0, &[x], &nodes, GradientMode::FiniteDifference);
            assert!((g[0] - (1.8 + ap) * x).abs() < 1e-7);
        }
    }

    #[test]
    fn offset_examples() {
        let s = spec(ModelFamily::Linear { inputs: 1 }, vec![1.0], 0.0, 2.0, NoiseLaw::Uniform { half_width: 0.5 });
        let data = simulate_source(&s, 3, 40, 5).unwrap();
        assert_eq!(martingale_offset(&data, &[1.0]).unwrap(), 0.0);
        let quiet = simulate_source(&spec(ModelFamily::Linear { inputs: 1 }, vec![1.0], 0.0, 2.0, NoiseLaw::Zero), 3, 40, 5).unwrap();
        assert!(martingale_offset(&quiet, &[1.4]).unwrap() < 0.0);
    }
}
