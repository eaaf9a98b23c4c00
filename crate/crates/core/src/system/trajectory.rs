use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use super::spec::SystemSpec;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, norm_sq, sub};
use crate::scalar::Real;

/// Stream reserved for target-system simulation, disjoint from source trajectory indices.
pub const TARGET_STREAM: u64 = 1 << 63;

/// Counter-based sub-stream `stream` of the master `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Quantities known only to the simulator.
#[derive(Clone, Debug, PartialEq)]
pub struct HiddenTruth<T> {
    /// `β_0 … β_T` (one more entry than the horizon, for the drift statistic).
    pub beta: Vec<Vec<T>>,
    /// `w_1 … w_T`.
    pub noise: Vec<T>,
    /// `ε_t = β_tᵀ(φ_t(α*, x_t) − φ_t(α̂, x_t))`, once an estimate is fixed.
    pub eps: Option<Vec<T>>,
}

/// One path: `x[t] = x_t` and `y[t] = y_{t+1}` for `t < T`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    pub x: Vec<Vec<T>>,
    pub y: Vec<T>,
    pub hidden: Option<HiddenTruth<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.x.len() != self.y.len() {
            return Err(Error::invalid("x and y lengths differ"));
        }
        if let Some(h) = &self.hidden {
            let t = self.len();
            if h.beta.len() != t + 1 || h.noise.len() != t || h.eps.as_ref().is_some_and(|e| e.len() != t) {
                return Err(Error::invalid("hidden truth lengths inconsistent with the path"));
            }
        }
        Ok(())
    }

    fn hidden_or_err(&self) -> Result<&HiddenTruth<T>> {
        self.hidden.as_ref().ok_or_else(|| Error::invalid("hidden truth required"))
    }

    /// `δ_T² = (1/T) Σ ‖β_{t+1} − β_t‖²` from the recorded truth.
    pub fn drift_sq(&self) -> Result<T> {
        let h = self.hidden_or_err()?;
        let acc = h.beta.windows(2).fold(T::zero(), |acc, w| acc + norm_sq(&sub(&w[1], &w[0])));
        Ok(acc / T::lit(self.len().max(1) as f64))
    }

    /// `Σ_t ‖β_{t+1} − β_t‖`.
    pub fn drift_path_length(&self) -> Result<T> {
        let h = self.hidden_or_err()?;
        Ok(h.beta.windows(2).fold(T::zero(), |acc, w| acc + norm(&sub(&w[1], &w[0]))))
    }

    /// Empirical `σ_T² = (1/T) Σ w_{t+1}²`.
    pub fn noise_power(&self) -> Result<T> {
        let h = self.hidden_or_err()?;
        Ok(h.noise.iter().map(|&w| w * w).sum::<T>() / T::lit(self.len().max(1) as f64))
    }

    /// Records `ε_t` for the estimate `alpha_hat`.
    pub fn fill_discrepancy(&mut self, spec: &SystemSpec<T>, alpha_hat: &[T]) -> Result<()> {
        let eps: Vec<T> = {
            let h = self.hidden_or_err()?;
            self.x
                .iter()
                .enumerate()
                .map(|(t, x)| {
                    let a = spec.features(t, &spec.alpha_star, x);
                    let b = spec.features(t, alpha_hat, x);
                    dot(&h.beta[t], &sub(&a, &b))
                })
                .collect()
        };
        if let Some(h) = self.hidden.as_mut() {
            h.eps = Some(eps);
        }
        Ok(())
    }
}

/// `N₁` trajectories from one source system.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiTrajectoryDataset<T> {
    pub spec: SystemSpec<T>,
    pub trajectories: Vec<Trajectory<T>>,
    pub seed: u64,
    /// Sub-stream index of each trajectory.
    pub streams: Vec<u64>,
}

impl<T: Real> MultiTrajectoryDataset<T> {
    pub fn n1(&self) -> usize {
        self.trajectories.len()
    }

    pub fn horizon(&self) -> usize {
        self.trajectories.first().map_or(0, |t| t.len())
    }

    pub fn sample_count(&self) -> usize {
        self.trajectories.iter().map(|t| t.len()).sum()
    }
}

/// Simulates one path of `spec`, drawing all randomness from `rng`.
pub fn simulate_path<T: Real>(spec: &SystemSpec<T>, horizon: usize, rng: &mut ChaCha20Rng) -> Result<Trajectory<T>> {
    let w_max = spec.noise_bound();
    let b = spec.bounds.beta_bound;
    let m_f = spec.bounds.output_bound;
    let slack = T::one() + T::lit(1e-12);
    let mut xs = Vec::with_capacity(horizon);
    let mut ys = Vec::with_capacity(horizon);
    let mut betas = Vec::with_capacity(horizon + 1);
    let mut noise = Vec::with_capacity(horizon);
    let mut x: Vec<T> = spec.regressors.initial(rng);
    for t in 0..horizon {
        let beta = spec.beta.at(t);
        if let Some(b) = b {
            if norm(&beta) > b * slack {
                return Err(Error::Contract { step: t, detail: format!("beta outside ball of radius {b}") });
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Simulation { step: t, detail: "regressor is not finite".into() });
        }
        let f = dot(&beta, &spec.features(t, &spec.alpha_star, &x));
        if !f.is_finite() {
            return Err(Error::Simulation { step: t, detail: "model output is not finite".into() });
        }
        if let Some(m) = m_f {
            if f.abs() > m * slack {
                return Err(Error::Simulation { step: t, detail: format!("|f| = {f} exceeds M_f = {m}") });
            }
        }
        let w = T::lit(spec.noise.sample(rng));
        if let Some(wm) = w_max {
            if w.abs() > wm * slack {
                return Err(Error::Contract { step: t, detail: format!("|w| = {w} exceeds W_max = {wm}") });
            }
        }
        let y = f + w;
        let next = if t + 1 < horizon { Some(spec.regressors.next(t, &x, y, rng)) } else { None };
        xs.push(x);
        ys.push(y);
        betas.push(beta);
        noise.push(w);
        if let Some(n) = next {
            x = n;
        } else {
            break;
        }
    }
    let last = spec.beta.at(horizon);
    if let Some(b) = b {
        if norm(&last) > b * slack {
            return Err(Error::Contract { step: horizon, detail: format!("beta outside ball of radius {b}") });
        }
    }
    betas.push(last);
    Ok(Trajectory { x: xs, y: ys, hidden: Some(HiddenTruth { beta: betas, noise, eps: None }) })
}

pub fn simulate_source<T: Real>(spec: &SystemSpec<T>, n1: usize, horizon: usize, seed: u64) -> Result<MultiTrajectoryDataset<T>> {
    if n1 == 0 || horizon == 0 {
        return Err(Error::invalid("need N1 >= 1 and T >= 1"));
    }
    spec.validate()?;
    let streams: Vec<u64> = (0..n1 as u64).collect();
    let trajectories = streams
        .par_iter()
        .map(|&s| simulate_path(spec, horizon, &mut stream_rng(seed, s)))
        .collect::<Result<Vec<_>>>()?;
    Ok(MultiTrajectoryDataset { spec: spec.clone(), trajectories, seed, streams })
}

pub fn simulate_target<T: Real>(spec: &SystemSpec<T>, horizon: usize, seed: u64) -> Result<Trajectory<T>> {
    if horizon == 0 {
        return Err(Error::invalid("need T >= 1"));
    }
    spec.validate()?;
    simulate_path(spec, horizon, &mut stream_rng(seed, TARGET_STREAM))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::*;

    fn linear_scalar(noise: NoiseLaw) -> SystemSpec<f64> {
        SystemSpec {
            id: "linear-scalar".into(),
            family: ModelFamily::Linear { inputs: 1 },
            alpha_star: vec![2.0],
            parameter_box: CompactBox::new(vec![0.0], vec![4.0]).unwrap(),
            beta: BetaSchedule::Constant { value: vec![1.0] },
            regressors: RegressorDynamics::Ramp { slope: 1.0 },
            noise,
            bounds: SpecBounds::default(),
        }
    }

    #[test]
    fn noiseless_ramp_recursion() {
        let d = simulate_source(&linear_scalar(NoiseLaw::Zero), 1, 3, 9).unwrap();
        assert_eq!(d.trajectories[0].y, vec![0.0, 2.0, 4.0]);
    }

    #[test]
    fn same_seed_same_data_and_distinct_streams() {
        let spec = linear_scalar(NoiseLaw::Gaussian { mean: 0.0, sd: 1.0 });
        let a = simulate_source(&spec, 3, 50, 11).unwrap();
        let b = simulate_source(&spec, 3, 50, 11).unwrap();
        assert_eq!(a, b);
        let w: Vec<&Vec<f64>> = a.trajectories.iter().map(|t| &t.hidden.as_ref().unwrap().noise).collect();
        assert_ne!(w[0], w[1]);
        assert_ne!(w[1], w[2]);
        assert_ne!(w[0], w[2]);
    }

    #[test]
    fn growing_n1_keeps_existing_streams() {
        let spec = linear_scalar(NoiseLaw::Gaussian { mean: 0.0, sd: 1.0 });
        let a = simulate_source(&spec, 2, 20, 5).unwrap();
        let b = simulate_source(&spec, 5, 20, 5).unwrap();
        assert_eq!(a.trajectories[..], b.trajectories[..2]);
    }

    #[test]
    fn ball_violation_reports_step() {
        let mut spec = linear_scalar(NoiseLaw::Zero);
        spec.beta = BetaSchedule::Decaying { limit: vec![0.5], amplitude: vec![-1.0], power: -1.0 };
        spec.bounds.beta_bound = Some(3.0);
        // β_t = 0.5 − (t+1): |β_3| = 3.5
        match simulate_target(&spec, 10, 1) {
            Err(Error::Contract { step, .. }) => assert_eq!(step, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn output_bound_violation_is_simulation_fault() {
        let mut spec = linear_scalar(NoiseLaw::Zero);
        spec.bounds.output_bound = Some(5.0);
        match simulate_source(&spec, 1, 10, 1) {
            Err(Error::Simulation { step, .. }) => assert_eq!(step, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn drift_statistic_matches_schedule() {
        let mut spec = linear_scalar(NoiseLaw::Uniform { half_width: 0.1 });
        spec.beta = BetaSchedule::Sinusoid { center: vec![1.0], amplitude: vec![0.5], period: 17.0 };
        let tr = simulate_target(&spec, 200, 2).unwrap();
        let from_path = tr.drift_sq().unwrap();
        let from_schedule = spec.beta.drift_sq(200);
        assert!((from_path - from_schedule).abs() < 1e-15);
    }
}
