use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ops::{advance_envelope, lms_step, predict_step, project_ball, update_weights};
use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::scalar::Real;
use crate::system::io::fmt_real;
use crate::system::{NoiseLaw, SystemSpec, Trajectory};

/// `1 / (2(M_f + AB + W_max)²)`.
pub fn exp_concavity_threshold<T: Real>(m_f: T, a: T, b: T, w_max: T) -> T {
    let s = m_f + a * b + w_max;
    T::one() / (T::lit(2.0) * s * s)
}

/// Hyperparameters and initial conditions of the meta-LMS predictor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictorConfig<T> {
    pub lambda: T,
    pub gamma: T,
    pub d: T,
    /// `B`.
    pub radius: T,
    /// `A`.
    pub feature_bound: T,
    /// `M_f`.
    pub output_bound: T,
    /// `W_max`; may be infinite, in which case no exp-concavity claim is made.
    pub noise_bound: T,
    pub initial_weights: Vec<T>,
    pub initial_estimates: Vec<Vec<T>>,
    /// `m₀`; defaults to `‖φ₀(α̂, x₀)‖`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_envelope: Option<T>,
}

impl<T: Real> PredictorConfig<T> {
    /// Uniform initial weights and `λ = 0.9 × threshold`.
    pub fn with_defaults(
        gamma: T,
        d: T,
        radius: T,
        feature_bound: T,
        output_bound: T,
        noise_bound: T,
        initial_estimates: Vec<Vec<T>>,
    ) -> Self {
        let n2 = initial_estimates.len().max(1);
        let lambda = T::lit(0.9) * exp_concavity_threshold(output_bound, feature_bound, radius, noise_bound);
        PredictorConfig {
            lambda,
            gamma,
            d,
            radius,
            feature_bound,
            output_bound,
            noise_bound,
            initial_weights: vec![T::one() / T::lit(n2 as f64); n2],
            initial_estimates,
            initial_envelope: None,
        }
    }

    pub fn n2(&self) -> usize {
        self.initial_estimates.len()
    }

    pub fn threshold(&self) -> T {
        exp_concavity_threshold(self.output_bound, self.feature_bound, self.radius, self.noise_bound)
    }

    /// Whether the exp-concavity precondition for the min-style regret bound holds.
    pub fn exp_concave(&self) -> bool {
        self.lambda < self.threshold()
    }

    /// `A² / (1 − γ)²`, the lower limit for `d`.
    pub fn d_floor(&self) -> T {
        let a = self.feature_bound / (T::one() - self.gamma);
        a * a
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::invalid(m.to_string()));
        if !(self.lambda > T::zero()) || !self.lambda.is_finite() {
            return bad("lambda must be positive and finite");
        }
        if !(self.gamma > T::zero() && self.gamma < T::one()) {
            return bad("gamma must lie in (0, 1)");
        }
        if !(self.feature_bound >= T::zero()) || !(self.radius >= T::zero()) {
            return bad("A and B must be nonnegative");
        }
        if !(self.d > self.d_floor()) {
            return Err(Error::invalid(format!("d = {} must exceed A²/(1−γ)² = {}", self.d, self.d_floor())));
        }
        let n2 = self.n2();
        if n2 == 0 || self.initial_weights.len() != n2 {
            return bad("need N2 >= 1 and one initial weight per model");
        }
        if self.initial_weights.iter().any(|&w| !(w > T::zero())) {
            return bad("initial weights must be positive");
        }
        let s: T = self.initial_weights.iter().copied().sum();
        if (s - T::one()).abs() > T::lit(1e-12) {
            return bad("initial weights must sum to one");
        }
        let m = self.initial_estimates[0].len();
        let slack = self.radius * (T::one() + T::lit(1e-12));
        for (i, b) in self.initial_estimates.iter().enumerate() {
            if b.len() != m {
                return bad("initial estimates must share one dimension");
            }
            if norm(b) > slack {
                return Err(Error::invalid(format!("initial estimate {i} lies outside the ball")));
            }
            if self.initial_estimates[..i].iter().any(|c| c == b) {
                return Err(Error::invalid(format!("initial estimate {i} duplicates an earlier one")));
            }
        }
        if let Some(m0) = self.initial_envelope {
            let cap = self.feature_bound / (T::one() - self.gamma);
            if !(m0 >= T::zero() && m0 <= cap * (T::one() + T::lit(1e-12))) {
                return bad("m0 must lie in [0, A/(1−γ)]");
            }
        }
        Ok(())
    }
}

/// One informed starting point followed by `n2 − 1` random draws, all projected into the ball.
pub fn informed_initialization<T: Real, R: Rng + ?Sized>(
    informed: &[T],
    n2: usize,
    law: &NoiseLaw,
    radius: T,
    rng: &mut R,
) -> Vec<Vec<T>> {
    let mut out = vec![project_ball(informed, radius)];
    while out.len() < n2 {
        let draw: Vec<T> = informed.iter().map(|_| T::lit(law.sample(rng))).collect();
        let cand = project_ball(&draw, radius);
        if !out.contains(&cand) {
            out.push(cand);
        }
    }
    out.truncate(n2);
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleState<T> {
    pub t: usize,
    pub estimates: Vec<Vec<T>>,
    pub weights: Vec<T>,
    pub envelope: T,
}

/// Outcome of one predict/observe/update cycle.
#[derive(Clone, Debug)]
pub struct StepRecord<T> {
    pub predictions: Vec<T>,
    pub aggregate: T,
    pub losses: Vec<T>,
}

#[derive(Clone, Debug)]
pub struct MetaLms<T> {
    pub config: PredictorConfig<T>,
    pub state: EnsembleState<T>,
}

impl<T: Real> MetaLms<T> {
    /// Starts the ensemble at `t = 0` given `‖φ₀(α̂, x₀)‖`.
    pub fn new(config: PredictorConfig<T>, phi0_norm: T) -> Result<Self> {
        config.validate()?;
        let envelope = config.initial_envelope.unwrap_or(phi0_norm);
        if envelope < phi0_norm {
            return Err(Error::Contract { step: 0, detail: "m0 is below ‖φ0‖".into() });
        }
        let state = EnsembleState {
            t: 0,
            estimates: config.initial_estimates.clone(),
            weights: config.initial_weights.clone(),
            envelope,
        };
        Ok(MetaLms { config, state })
    }

    pub fn predict(&self, phi: &[T]) -> (Vec<T>, T) {
        predict_step(&self.state.estimates, &self.state.weights, phi)
    }

    /// Predicts from `φ_t`, then consumes `y_{t+1}`: weights and estimates move to `t + 1`.
    pub fn observe(&mut self, phi: &[T], y: T) -> StepRecord<T> {
        let (predictions, aggregate) = self.predict(phi);
        let losses: Vec<T> = predictions.iter().map(|&p| (y - p) * (y - p)).collect();
        self.state.weights = update_weights(&self.state.weights, &losses, self.config.lambda);
        let (d, m, r) = (self.config.d, self.state.envelope, self.config.radius);
        for b in self.state.estimates.iter_mut() {
            *b = lms_step(b, phi, y, d, m, r);
        }
        self.state.t += 1;
        StepRecord { predictions, aggregate, losses }
    }

    /// `m_{t+1} = γ m_t + ‖φ_{t+1}‖`.
    pub fn advance(&mut self, next_phi_norm: T) {
        self.state.envelope = advance_envelope(self.state.envelope, next_phi_norm, self.config.gamma);
    }
}

#[derive(Clone, Debug)]
pub struct PredictionTrace<T> {
    pub y: Vec<T>,
    pub y_pred: Vec<T>,
    pub loss: Vec<T>,
    /// `J_t = (1/t) Σ_{s<t} (y_{s+1} − ŷ_{s+1})²`, indexed by `t − 1`.
    pub running: Vec<T>,
    /// `Σ_t (y_{t+1} − ŷ_{t+1,i})²` per model.
    pub model_cumulative: Vec<T>,
    /// `[t][i]` per-model predictions, kept with `full = true`.
    pub per_model: Option<Vec<Vec<T>>>,
    /// `[t][i]` weights used for the prediction at `t`, kept with `full = true`.
    pub weights: Option<Vec<Vec<T>>>,
    pub exp_concave: bool,
    pub final_state: EnsembleState<T>,
}

impl<T: Real> PredictionTrace<T> {
    pub fn cumulative_loss(&self) -> T {
        self.loss.iter().copied().sum()
    }

    pub fn j_final(&self) -> T {
        self.running.last().copied().unwrap_or(T::zero())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        if self.y.is_empty() {
            return Err(Error::invalid("empty trace"));
        }
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        let n2 = self.model_cumulative.len();
        write!(f, "t,y,y_pred,loss,J_running")?;
        if self.per_model.is_some() {
            for i in 0..n2 {
                write!(f, ",pred_{i}")?;
            }
            for i in 0..n2 {
                write!(f, ",w_{i}")?;
            }
        }
        writeln!(f)?;
        for t in 0..self.y.len() {
            write!(
                f,
                "{},{},{},{},{}",
                t + 1,
                fmt_real(self.y[t].to_f64_lossy()),
                fmt_real(self.y_pred[t].to_f64_lossy()),
                fmt_real(self.loss[t].to_f64_lossy()),
                fmt_real(self.running[t].to_f64_lossy())
            )?;
            if let (Some(p), Some(w)) = (&self.per_model, &self.weights) {
                for v in p[t].iter().chain(&w[t]) {
                    write!(f, ",{}", fmt_real(v.to_f64_lossy()))?;
                }
            }
            writeln!(f)?;
        }
        f.flush()?;
        Ok(())
    }
}

/// Runs the predictor along `traj`; `observer` sees the state and `φ_t` before each update.
pub fn run_online_with<T, F>(
    traj: &Trajectory<T>,
    alpha_hat: &[T],
    config: &PredictorConfig<T>,
    spec: &SystemSpec<T>,
    full: bool,
    mut observer: F,
) -> Result<PredictionTrace<T>>
where
    T: Real,
    F: FnMut(usize, &EnsembleState<T>, &[T]),
{
    traj.validate()?;
    let horizon = traj.len();
    if horizon == 0 {
        return Err(Error::invalid("empty trajectory"));
    }
    if config.initial_estimates.first().map(|b| b.len()) != Some(spec.beta_dim()) {
        return Err(Error::invalid("initial estimates do not match the family's beta dimension"));
    }
    let a_cap = config.feature_bound * (T::one() + T::lit(1e-12));
    let phi_at = |t: usize| -> Result<(Vec<T>, T)> {
        let phi = spec.features(t, alpha_hat, &traj.x[t]);
        let n = norm(&phi);
        if !(n <= a_cap) {
            return Err(Error::Contract {
                step: t,
                detail: format!("‖φ_t(α̂, x_t)‖ = {n} exceeds A = {}", config.feature_bound),
            });
        }
        Ok((phi, n))
    };
    let (mut phi, n0) = phi_at(0)?;
    let mut meta = MetaLms::new(config.clone(), n0)?;
    let n2 = config.n2();
    let mut tr = PredictionTrace {
        y: Vec::with_capacity(horizon),
        y_pred: Vec::with_capacity(horizon),
        loss: Vec::with_capacity(horizon),
        running: Vec::with_capacity(horizon),
        model_cumulative: vec![T::zero(); n2],
        per_model: full.then(Vec::new),
        weights: full.then(Vec::new),
        exp_concave: config.exp_concave(),
        final_state: meta.state.clone(),
    };
    let mut cum = T::zero();
    let b_cap = config.radius * (T::one() + T::lit(1e-12));
    for t in 0..horizon {
        observer(t, &meta.state, &phi);
        if let Some(w) = tr.weights.as_mut() {
            w.push(meta.state.weights.clone());
        }
        let y = traj.y[t];
        let rec = meta.observe(&phi, y);
        let l = (y - rec.aggregate) * (y - rec.aggregate);
        cum = cum + l;
        for (c, &li) in tr.model_cumulative.iter_mut().zip(&rec.losses) {
            *c = *c + li;
        }
        tr.y.push(y);
        tr.y_pred.push(rec.aggregate);
        tr.loss.push(l);
        tr.running.push(cum / T::lit((t + 1) as f64));
        if let Some(p) = tr.per_model.as_mut() {
            p.push(rec.predictions);
        }
        if meta.state.estimates.iter().any(|b| norm(b) > b_cap) {
            return Err(Error::Contract { step: t, detail: "estimate left the ball".into() });
        }
        let ws: T = meta.state.weights.iter().copied().sum();
        if !((ws - T::one()).abs() <= T::lit(1e-12)) {
            return Err(Error::Contract { step: t, detail: "weights no longer sum to one".into() });
        }
        if t + 1 < horizon {
            let (next, n) = phi_at(t + 1)?;
            meta.advance(n);
            phi = next;
        }
    }
    tr.final_state = meta.state;
    Ok(tr)
}

pub fn run_online<T: Real>(
    traj: &Trajectory<T>,
    alpha_hat: &[T],
    config: &PredictorConfig<T>,
    spec: &SystemSpec<T>,
    full: bool,
) -> Result<PredictionTrace<T>> {
    run_online_with(traj, alpha_hat, config, spec, full, |_, _, _| {})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::*;

    fn linear_spec() -> SystemSpec<f64> {
        SystemSpec {
            id: "linear".into(),
            family: ModelFamily::Linear { inputs: 1 },
            alpha_star: vec![1.0],
            parameter_box: CompactBox::new(vec![0.0], vec![2.0]).unwrap(),
            beta: BetaSchedule::Constant { value: vec![0.7] },
            regressors: RegressorDynamics::Iid { law: NoiseLaw::Uniform { half_width: 1.0 }, dim: 1 },
            noise: NoiseLaw::Zero,
            bounds: SpecBounds::default(),
        }
    }

    #[test]
    fn exact_start_gives_zero_error() {
        let spec = linear_spec();
        let tr = simulate_target(&spec, 100, 3).unwrap();
        let cfg = PredictorConfig::with_defaults(0.5, 10.0, 5.0, 1.0, 1.0, 0.0, vec![vec![0.7]]);
        let trace = run_online(&tr, &[1.0], &cfg, &spec, false).unwrap();
        assert_eq!(trace.j_final(), 0.0);
    }

    #[test]
    fn feature_bound_breach_reports_step() {
        let mut spec = linear_spec();
        spec.regressors = RegressorDynamics::Ramp { slope: 0.3 };
        let tr = simulate_target(&spec, 20, 1).unwrap();
        let cfg = PredictorConfig::with_defaults(0.5, 10.0, 5.0, 1.0, 1.0, 0.0, vec![vec![0.0]]);
        match run_online(&tr, &[1.0], &cfg, &spec, false) {
            Err(Error::Contract { step, .. }) => assert_eq!(step, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = PredictorConfig::with_defaults(0.5, 4.0, 5.0, 1.0, 1.0, 0.0, vec![vec![0.0], vec![1.0]]);
        assert!(cfg.validate().is_err(), "d equal to the floor must be rejected");
        cfg.d = 4.5;
        cfg.validate().unwrap();
        cfg.initial_estimates[1] = vec![0.0];
        assert!(cfg.validate().is_err());
        cfg.initial_estimates[1] = vec![6.0];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn full_trace_aggregate_is_weighted_mean() {
        let mut spec = linear_spec();
        spec.noise = NoiseLaw::Uniform { half_width: 0.2 };
        let tr = simulate_target(&spec, 60, 8).unwrap();
        let cfg = PredictorConfig::with_defaults(
            0.5,
            10.0,
            5.0,
            1.0,
            1.0,
            0.2,
            vec![vec![0.0], vec![1.0], vec![-2.0]],
        );
        let trace = run_online(&tr, &[1.0], &cfg, &spec, true).unwrap();
        let p = trace.per_model.as_ref().unwrap();
        let w = trace.weights.as_ref().unwrap();
        for t in 0..60 {
            let agg: f64 = p[t].iter().zip(&w[t]).map(|(a, b)| a * b).sum();
            assert!((agg - trace.y_pred[t]).abs() <= 1e-15 * (1.0 + agg.abs()));
        }
    }
}
