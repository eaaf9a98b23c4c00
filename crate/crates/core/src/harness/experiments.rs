//! Monte Carlo studies behind the preset experiments.

use rand::Rng;
use rayon::prelude::*;

use super::scenarios;
use super::stats::{bands, ls_slope, mean, Band};
use crate::bounds::{
    dependency_matrix, generalization_bound, martingale_offset, offset_expectation_bound, prediction_bound, BoundInputs,
    DependencyMatrix, GeneralizationBound, PredictionBound,
};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, sub};
use crate::offline::{grid_search_nls, zoomed_grid_search_nls};
use crate::online::{informed_initialization, run_online, PredictorConfig};
use crate::system::{
    simulate_path, simulate_source, simulate_target, stream_rng, BetaSchedule, CompactBox, ModelFamily,
    MultiTrajectoryDataset, NoiseLaw, RegressorDynamics, SpecBounds, SystemSpec, Trajectory,
};
use crate::ExactProb;

/// Sub-streams reserved by the harness, above the source indices and the target stream.
const REPLICATION_STREAM: u64 = (1 << 63) + (1 << 40);
const INIT_STREAM: u64 = (1 << 63) + 1;
const FRESH_STREAM: u64 = (1 << 63) + 2;
const CONFIG_STREAM: u64 = (1 << 63) + 3;

/// Master seed of replication `r` (of sweep point `k`).
pub fn replication_seed(seed: u64, k: usize, r: usize) -> u64 {
    stream_rng(seed, REPLICATION_STREAM + ((k as u64) << 24) + r as u64).random()
}

fn par_reps<R: Send, F: Fn(usize) -> Result<R> + Sync + Send>(reps: usize, f: F) -> Result<Vec<R>> {
    if reps == 0 {
        return Err(Error::invalid("need at least one replication"));
    }
    (0..reps).into_par_iter().map(f).collect()
}

/// The first `n` steps of every trajectory.
pub fn prefix(data: &MultiTrajectoryDataset<f64>, n: usize) -> MultiTrajectoryDataset<f64> {
    let mut out = data.clone();
    for tr in &mut out.trajectories {
        tr.x.truncate(n);
        tr.y.truncate(n);
        if let Some(h) = tr.hidden.as_mut() {
            h.beta.truncate(n + 1);
            h.noise.truncate(n);
            h.eps = None;
        }
    }
    out
}

/// `(1/T) Σ (β⁰(t)ᵀ(φ_t(α̂, x_t) − φ_t(α*, x_t)))²` along `traj`.
pub fn generalization_error(spec: &SystemSpec<f64>, alpha_hat: &[f64], traj: &Trajectory<f64>) -> f64 {
    let s: f64 = traj
        .x
        .iter()
        .enumerate()
        .map(|(t, x)| {
            let d = sub(&spec.features(t, alpha_hat, x), &spec.features(t, &spec.alpha_star, x));
            dot(&spec.beta.at(t), &d).powi(2)
        })
        .sum();
    s / traj.len().max(1) as f64
}

fn running_mean(losses: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    losses
        .enumerate()
        .map(|(t, l)| {
            acc += l;
            acc / (t + 1) as f64
        })
        .collect()
}

fn doubling_grid(start: usize, end: usize) -> Vec<usize> {
    let mut g = Vec::new();
    let mut n = start.max(1);
    while n < end {
        g.push(n);
        n *= 2;
    }
    g.push(end);
    g
}

/// Online-stage settings of the sigmoid example.
#[derive(Clone, Debug, PartialEq)]
pub struct Fig1Settings {
    pub horizon: usize,
    pub source_horizon: usize,
    pub segments: usize,
    pub n2: usize,
    pub lambda: f64,
    pub d: f64,
    pub gamma: f64,
    pub radius: f64,
    pub informed: Vec<f64>,
    pub init_law: NoiseLaw,
    pub fixed_beta: Vec<f64>,
    /// Smallest source length of the estimation-error trace.
    pub trace_start: usize,
}

impl Default for Fig1Settings {
    fn default() -> Self {
        Fig1Settings {
            horizon: 5000,
            source_horizon: 5000,
            segments: 50,
            n2: 500,
            lambda: 1e-3,
            d: 1e3,
            gamma: 0.5,
            radius: 1e7f64.sqrt(),
            informed: vec![10.0, -10.0],
            init_law: NoiseLaw::Gaussian { mean: -3.0, sd: 1.0 },
            fixed_beta: vec![20.0, -10.0],
            trace_start: 50,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fig1Replication {
    pub alpha_hat: Vec<f64>,
    pub j_meta: Vec<f64>,
    pub j_single: Vec<f64>,
    pub j_fixed: Vec<f64>,
    /// `(source length, |b̂ − b|, |ĉ − c|)`.
    pub estimation: Vec<(usize, f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fig1Result {
    pub replications: Vec<Fig1Replication>,
    pub meta: Vec<Band>,
    pub single: Vec<Band>,
    pub fixed: Vec<Band>,
    pub trace_lengths: Vec<usize>,
    pub err_b: Vec<Band>,
    pub err_c: Vec<Band>,
}

fn online_config(s: &Fig1Settings, estimates: Vec<Vec<f64>>, a: f64) -> PredictorConfig<f64> {
    let mut cfg = PredictorConfig::with_defaults(s.gamma, s.d, s.radius, a, f64::INFINITY, f64::INFINITY, estimates);
    cfg.lambda = s.lambda;
    cfg
}

pub fn fig1_replication(s: &Fig1Settings, seed: u64) -> Result<Fig1Replication> {
    let source_spec = scenarios::sigmoid_source();
    let target_spec = scenarios::sigmoid_target();
    let bx = scenarios::sigmoid_box();
    let a = target_spec.bounds.feature_bound.unwrap_or(2f64.sqrt());
    let source = simulate_source(&source_spec, 1, s.source_horizon, seed)?;
    let mut estimation = Vec::new();
    let mut alpha_hat = Vec::new();
    for n in doubling_grid(s.trace_start.min(s.source_horizon), s.source_horizon) {
        let est = grid_search_nls(&prefix(&source, n), &bx, s.segments)?;
        let e = sub(&est.alpha_hat, &source_spec.alpha_star);
        estimation.push((n, e[0].abs(), e[1].abs()));
        alpha_hat = est.alpha_hat;
    }
    let target = simulate_target(&target_spec, s.horizon, seed)?;
    let mut rng = stream_rng(seed, INIT_STREAM);
    let estimates = informed_initialization(&s.informed, s.n2, &s.init_law, s.radius, &mut rng);
    let meta = run_online(&target, &alpha_hat, &online_config(s, estimates, a), &target_spec, false)?;
    let single = run_online(&target, &alpha_hat, &online_config(s, vec![s.informed.clone()], a), &target_spec, false)?;
    let j_fixed = running_mean(target.x.iter().zip(&target.y).enumerate().map(|(t, (x, &y))| {
        let p = dot(&s.fixed_beta, &target_spec.features(t, &alpha_hat, x));
        (y - p) * (y - p)
    }));
    Ok(Fig1Replication { alpha_hat, j_meta: meta.running, j_single: single.running, j_fixed, estimation })
}

pub fn fig1(s: &Fig1Settings, replications: usize, seed: u64) -> Result<Fig1Result> {
    let reps = par_reps(replications, |r| fig1_replication(s, replication_seed(seed, 0, r)))?;
    let curves = |f: fn(&Fig1Replication) -> &Vec<f64>| bands(&reps.iter().map(|r| f(r).clone()).collect::<Vec<_>>());
    let trace_lengths: Vec<usize> = reps[0].estimation.iter().map(|e| e.0).collect();
    let err = |k: usize| -> Vec<Band> {
        (0..trace_lengths.len())
            .map(|i| Band::of(&reps.iter().map(|r| if k == 0 { r.estimation[i].1 } else { r.estimation[i].2 }).collect::<Vec<_>>()))
            .collect()
    };
    Ok(Fig1Result {
        meta: curves(|r| &r.j_meta),
        single: curves(|r| &r.j_single),
        fixed: curves(|r| &r.j_fixed),
        err_b: err(0),
        err_c: err(1),
        trace_lengths,
        replications: reps,
    })
}

/// Settings of the generalization-rate sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct RateSettings {
    pub horizons: Vec<usize>,
    pub n1: usize,
    pub segments: usize,
    pub levels: usize,
    pub source: SystemSpec<f64>,
    pub fresh: SystemSpec<f64>,
}

impl Default for RateSettings {
    fn default() -> Self {
        RateSettings {
            horizons: vec![250, 500, 1000, 2000, 4000, 8000],
            n1: 1,
            segments: 20,
            levels: 6,
            source: scenarios::autoregressive_source(),
            fresh: scenarios::autoregressive_copy(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateRow {
    pub horizon: usize,
    pub errors: Vec<f64>,
    pub band: Band,
    /// `mean · T / ln T`.
    pub scaled: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateResult {
    pub rows: Vec<RateRow>,
    /// Least-squares slope of `ln(mean error)` against `ln(T / ln T)`.
    pub slope: f64,
}

pub fn rate_check(s: &RateSettings, replications: usize, seed: u64) -> Result<RateResult> {
    if s.horizons.windows(2).any(|w| w[0] >= w[1]) || s.horizons.first().is_none_or(|&t| t < 2) {
        return Err(Error::invalid("horizons must be strictly increasing and at least 2"));
    }
    let mut rows = Vec::new();
    for (k, &horizon) in s.horizons.iter().enumerate() {
        let errors = par_reps(replications, |r| {
            let rs = replication_seed(seed, k, r);
            let data = simulate_source(&s.source, s.n1, horizon, rs)?;
            let est = zoomed_grid_search_nls(&data, &s.source.parameter_box, s.segments, s.levels)?;
            let fresh = simulate_path(&s.fresh, horizon, &mut stream_rng(rs, FRESH_STREAM))?;
            Ok(generalization_error(&s.fresh, &est.alpha_hat, &fresh))
        })?;
        let band = Band::of(&errors);
        let t = horizon as f64;
        rows.push(RateRow { horizon, scaled: band.mean * t / t.ln(), band, errors });
    }
    let x: Vec<f64> = rows.iter().map(|r| (r.horizon as f64 / (r.horizon as f64).ln()).ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.band.mean.ln()).collect();
    Ok(RateResult { slope: ls_slope(&x, &y), rows })
}

/// Settings of the asymptotic-optimality check.
#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticSettings {
    pub horizon: usize,
    pub source_horizon: usize,
    pub n1: usize,
    pub n2: usize,
    pub gamma: f64,
    /// `ε / σ²`.
    pub eps_fraction: f64,
    pub half_width: f64,
    pub limit: Vec<f64>,
    pub amplitude: Vec<f64>,
    pub segments: usize,
    pub levels: usize,
    pub checkpoints: usize,
}

impl Default for AsymptoticSettings {
    fn default() -> Self {
        AsymptoticSettings {
            horizon: 20000,
            source_horizon: 20000,
            n1: 4,
            n2: 8,
            gamma: 0.5,
            eps_fraction: 0.2,
            half_width: 1.0,
            limit: vec![1.0, 0.5],
            amplitude: vec![0.5, -0.5],
            segments: 20,
            levels: 6,
            checkpoints: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticResult {
    pub d: f64,
    pub eps: f64,
    /// `σ²`, which is both `σ_inf²` and `σ_sup²` for i.i.d. noise.
    pub sigma_sq: f64,
    pub checkpoints: Vec<usize>,
    pub j_curve: Vec<Band>,
    pub j_final: Vec<f64>,
    pub j_final_mean: f64,
}

impl AsymptoticResult {
    /// `[σ_inf², σ_sup² + ε + tolerance]`.
    pub fn interval(&self, tolerance: f64) -> (f64, f64) {
        (self.sigma_sq, self.sigma_sq + self.eps + tolerance)
    }
}

pub fn asymptotic_check(s: &AsymptoticSettings, replications: usize, seed: u64) -> Result<AsymptoticResult> {
    let target = scenarios::settling_target(s.limit.clone(), s.amplitude.clone(), s.half_width);
    let source = scenarios::settling_source(s.limit.clone(), s.half_width);
    let a = target.bounds.feature_bound.unwrap_or(2f64.sqrt());
    let sigma_sq = target.noise.variance();
    let eps = s.eps_fraction * sigma_sq;
    let w = s.half_width;
    let d = (2.0 * a * a / (1.0 - s.gamma).powi(2)).max(8.0 * a * a * w * w / eps);
    let radius = norm(&s.limit) + norm(&s.amplitude);
    let step = (s.horizon / s.checkpoints.max(1)).max(1);
    let checkpoints: Vec<usize> = (1..=s.horizon).filter(|t| t % step == 0 || *t == s.horizon).collect();
    let curves = par_reps(replications, |r| {
        let rs = replication_seed(seed, 0, r);
        let data = simulate_source(&source, s.n1, s.source_horizon, rs)?;
        let est = zoomed_grid_search_nls(&data, &source.parameter_box, s.segments, s.levels)?;
        let traj = simulate_target(&target, s.horizon, rs)?;
        let law = NoiseLaw::Gaussian { mean: 0.0, sd: 0.5 };
        let init = informed_initialization(&s.limit, s.n2, &law, radius, &mut stream_rng(rs, INIT_STREAM));
        let cfg = PredictorConfig::with_defaults(s.gamma, d, radius, a, radius * a, w, init);
        let tr = run_online(&traj, &est.alpha_hat, &cfg, &target, false)?;
        Ok(checkpoints.iter().map(|&t| tr.running[t - 1]).collect::<Vec<f64>>())
    })?;
    let j_final: Vec<f64> = curves.iter().map(|c| *c.last().unwrap_or(&f64::NAN)).collect();
    Ok(AsymptoticResult { d, eps, sigma_sq, j_curve: bands(&curves), j_final_mean: mean(&j_final), j_final, checkpoints })
}

/// One randomly drawn configuration of the dominance study.
#[derive(Clone, Debug, PartialEq)]
pub struct DominanceCase {
    pub j_measured: f64,
    pub bound: PredictionBound<f64>,
    pub inputs: BoundInputs,
}

impl DominanceCase {
    pub fn dominated(&self) -> bool {
        self.bound.total >= self.j_measured
    }
}

fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Random tanh target with every constant read from the hidden truth.
pub fn dominance_case(seed: u64, horizon: usize) -> Result<DominanceCase> {
    let mut rng = stream_rng(seed, CONFIG_STREAM);
    let (lo, hi) = (0.2, 3.0);
    let alpha = uniform(&mut rng, 0.5, 2.5);
    let alpha_hat = (alpha + uniform(&mut rng, -0.2, 0.2)).clamp(lo, hi);
    let center = vec![uniform(&mut rng, -1.0, 1.0), uniform(&mut rng, -1.0, 1.0)];
    let amplitude = vec![uniform(&mut rng, 0.0, 0.3), uniform(&mut rng, 0.0, 0.3)];
    let beta = if rng.random::<bool>() {
        BetaSchedule::Sinusoid { center: center.clone(), amplitude: amplitude.clone(), period: uniform(&mut rng, 50.0, 500.0) }
    } else {
        BetaSchedule::Decaying { limit: center.clone(), amplitude: amplitude.clone(), power: uniform(&mut rng, 0.5, 2.0) }
    };
    let b = norm(&center) + norm(&amplitude);
    let half_width = uniform(&mut rng, 0.1, 1.0);
    let spec = SystemSpec {
        id: "dominance".into(),
        family: ModelFamily::TanhNetwork { hidden: 1, inputs: 1 },
        alpha_star: vec![alpha],
        parameter_box: CompactBox { lo: vec![lo], hi: vec![hi] },
        beta,
        regressors: RegressorDynamics::Iid { law: NoiseLaw::Uniform { half_width: 2.0 }, dim: 1 },
        noise: NoiseLaw::Uniform { half_width },
        bounds: SpecBounds { beta_bound: Some(b), ..SpecBounds::default() },
    };
    let a = 2f64.sqrt();
    let gamma: f64 = 0.5;
    let d = [2.0, 10.0, 100.0][rng.random_range(0..3)] * a * a / (1.0 - gamma).powi(2);
    let n2 = rng.random_range(1..=8);
    let law = NoiseLaw::Uniform { half_width: b / 2f64.sqrt() };
    let init = informed_initialization(&vec![0.0; 2], n2, &law, b, &mut rng);
    let cfg = PredictorConfig::with_defaults(gamma, d, b, a, b * a, half_width, init);
    let mut traj = simulate_target(&spec, horizon, seed)?;
    let tr = run_online(&traj, &[alpha_hat], &cfg, &spec, false)?;
    traj.fill_discrepancy(&spec, &[alpha_hat])?;
    let eps_sq: Vec<f64> =
        traj.hidden.as_ref().and_then(|h| h.eps.as_ref()).map(|e| e.iter().map(|v| v * v).collect()).unwrap_or_default();
    let inputs = BoundInputs {
        lipschitz: center.iter().map(|c| c.abs()).fold(0.0, f64::max) * scenarios::TANH_SLOPE_PEAK / lo,
        alpha_dim: 1,
        radius_m: spec.parameter_box.radius(),
        b1: 1.0,
        b2: 0.0,
        b1_prime: 1.0,
        b2_prime: 0.0,
        sigma_v: spec.sigma_v(),
        noise_dim: 1,
        eps_star: 0.0,
        kl: 0.0,
        n1: 1,
        horizon,
        l1: 0.0,
        l0_mean: 0.0,
        delta: traj.drift_sq()?.sqrt(),
        sigma_sq: traj.noise_power()?,
        feature_bound: a,
        beta_bound: b,
        gamma,
        d,
        noise_bound: half_width,
        output_bound: b * a,
        lambda: Some(cfg.lambda),
        empirical_offset: None,
    }
    .with_l0_schedule(&eps_sq);
    let bound = prediction_bound(&inputs)?;
    Ok(DominanceCase { j_measured: tr.j_final(), bound, inputs })
}

pub fn dominance_study(configs: usize, horizon: usize, seed: u64) -> Result<Vec<DominanceCase>> {
    par_reps(configs, |r| dominance_case(replication_seed(seed, 0, r), horizon))
}

/// Settings shared by the generalization-dominance and offset studies.
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaSettings {
    pub n1: usize,
    pub horizon: usize,
    pub beta0: f64,
    pub noise_sd: f64,
    /// Mean of the new-data regressors; the training regressors have mean zero.
    pub shift: f64,
    pub segments: usize,
    pub levels: usize,
    /// Length of the Monte Carlo path used to evaluate the generalization error.
    pub eval_horizon: usize,
}

impl Default for LemmaSettings {
    fn default() -> Self {
        LemmaSettings { n1: 4, horizon: 256, beta0: 1.0, noise_sd: 0.5, shift: 0.5, segments: 50, levels: 3, eval_horizon: 4096 }
    }
}

impl LemmaSettings {
    pub fn training_spec(&self) -> SystemSpec<f64> {
        scenarios::tanh_iid(self.beta0, 0.0, self.noise_sd)
    }

    pub fn inputs(&self) -> BoundInputs {
        let spec = self.training_spec();
        BoundInputs {
            lipschitz: spec.bounds.lipschitz.unwrap_or(f64::NAN),
            alpha_dim: 1,
            radius_m: spec.parameter_box.radius(),
            b1: 1.0,
            b2: 0.0,
            b1_prime: 1.0,
            b2_prime: 0.0,
            sigma_v: spec.sigma_v(),
            noise_dim: 1,
            eps_star: 0.0,
            // D(N(0,1)^{⊗T} ‖ N(shift,1)^{⊗T}) for i.i.d. regressors.
            kl: self.horizon as f64 * self.shift * self.shift / 2.0,
            n1: self.n1,
            horizon: self.horizon,
            l1: 0.0,
            l0_mean: 0.0,
            delta: 0.0,
            sigma_sq: 0.0,
            feature_bound: 0.0,
            beta_bound: 0.0,
            gamma: 0.0,
            d: 0.0,
            noise_bound: 0.0,
            output_bound: 0.0,
            lambda: None,
            empirical_offset: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaReplication {
    pub alpha_hat: f64,
    pub measured: f64,
    pub offset: f64,
    pub bound: GeneralizationBound<f64>,
}

pub fn lemma_replication(s: &LemmaSettings, seed: u64) -> Result<LemmaReplication> {
    let spec = s.training_spec();
    let data = simulate_source(&spec, s.n1, s.horizon, seed)?;
    let est = zoomed_grid_search_nls(&data, &spec.parameter_box, s.segments, s.levels)?;
    let mut inputs = s.inputs();
    inputs.eps_star = est.certificate.value().unwrap_or(0.0);
    let bound = generalization_bound(&inputs)?;
    let new_spec = scenarios::tanh_iid(s.beta0, s.shift, s.noise_sd);
    let fresh = simulate_path(&new_spec, s.eval_horizon, &mut stream_rng(seed, FRESH_STREAM))?;
    Ok(LemmaReplication {
        alpha_hat: est.alpha_hat[0],
        measured: generalization_error(&new_spec, &est.alpha_hat, &fresh),
        offset: martingale_offset(&data, &est.alpha_hat)?,
        bound,
    })
}

pub fn lemma_study(s: &LemmaSettings, replications: usize, seed: u64) -> Result<Vec<LemmaReplication>> {
    par_reps(replications, |r| lemma_replication(s, replication_seed(seed, 0, r)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct OffsetRow {
    pub n1: usize,
    pub horizon: usize,
    pub mean_offset: f64,
    pub bound: f64,
}

/// Monte Carlo mean of the martingale offset against its expectation bound.
pub fn offset_check(pairs: &[(usize, usize)], replications: usize, seed: u64) -> Result<Vec<OffsetRow>> {
    pairs
        .iter()
        .enumerate()
        .map(|(k, &(n1, horizon))| {
            let s = LemmaSettings { n1, horizon, ..LemmaSettings::default() };
            let spec = s.training_spec();
            let offsets = par_reps(replications, |r| {
                let data = simulate_source(&spec, n1, horizon, replication_seed(seed, k, r))?;
                let est = zoomed_grid_search_nls(&data, &spec.parameter_box, s.segments, s.levels)?;
                martingale_offset(&data, &est.alpha_hat)
            })?;
            Ok(OffsetRow { n1, horizon, mean_offset: mean(&offsets), bound: offset_expectation_bound(&s.inputs()) })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DepmatrixRow {
    pub horizon: usize,
    pub matrix: DependencyMatrix<ExactProb>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DepmatrixResult {
    pub rows: Vec<DepmatrixRow>,
    /// Least-squares slope of `‖Γ‖²` against `T`.
    pub slope: f64,
}

pub fn depmatrix_demo(horizons: &[usize], cap: u128) -> Result<DepmatrixResult> {
    let rows = horizons
        .par_iter()
        .map(|&h| Ok(DepmatrixRow { horizon: h, matrix: dependency_matrix(&scenarios::mixing_chain(h)?, cap)? }))
        .collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = rows.iter().map(|r| r.horizon as f64).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.matrix.norm_sq).collect();
    Ok(DepmatrixResult { slope: ls_slope(&x, &y), rows })
}
