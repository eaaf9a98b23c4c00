//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

use std::time::Instant;

use metalms::bounds::*;
use metalms::harness::scenarios::two_state_chain;
use metalms::harness::*;
use metalms::linalg::{eig2_sym, norm};
use metalms::online::{informed_initialization, run_online, PredictorConfig};
use metalms::system::*;
use metalms::ExactProb;
use num_traits::{One, Zero};
use rand::Rng;

const SEED: u64 = 20261016;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Random bounded tanh target with a drifting `β_t` inside a known ball.
fn random_instance(rng: &mut impl Rng, horizon: usize) -> (SystemSpec<f64>, Trajectory<f64>, f64, f64) {
    let alpha = 0.5 + 2.0 * rng.random::<f64>();
    let alpha_hat = alpha + 0.4 * (rng.random::<f64>() - 0.5);
    let center = vec![2.0 * rng.random::<f64>() - 1.0, 2.0 * rng.random::<f64>() - 1.0];
    let amplitude = vec![0.3 * rng.random::<f64>(), 0.3 * rng.random::<f64>()];
    let b = norm(&center) + norm(&amplitude);
    let w = 0.1 + 0.9 * rng.random::<f64>();
    let spec = SystemSpec {
        id: "random".into(),
        family: ModelFamily::TanhNetwork { hidden: 1, inputs: 1 },
        alpha_star: vec![alpha],
        parameter_box: CompactBox { lo: vec![0.2], hi: vec![3.0] },
        beta: BetaSchedule::Sinusoid { center, amplitude, period: 20.0 + 400.0 * rng.random::<f64>() },
        regressors: RegressorDynamics::Iid { law: NoiseLaw::Uniform { half_width: 2.0 }, dim: 1 },
        noise: NoiseLaw::Uniform { half_width: w },
        bounds: SpecBounds { beta_bound: Some(b), ..SpecBounds::default() },
    };
    let traj = simulate_target(&spec, horizon, rng.random()).expect("simulation");
    (spec, traj, alpha_hat, b)
}

fn aggregation_suite() -> (Outcome, Outcome) {
    let mut rng = stream_rng(SEED, 1);
    let (mut worst_max, mut worst_min) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let n = 200;
    for _ in 0..n {
        let horizon = rng.random_range(20..=500);
        let (spec, traj, alpha_hat, b) = random_instance(&mut rng, horizon);
        let a = 2f64.sqrt();
        let n2 = rng.random_range(1..=8);
        let law = NoiseLaw::Uniform { half_width: b };
        let init = informed_initialization(&[0.0, 0.0], n2, &law, b, &mut rng);
        let w = spec.noise.bound().unwrap();
        let mut cfg = PredictorConfig::with_defaults(0.5, 10.0, b, a, a * b, w, init);
        cfg.lambda = cfg.threshold() * (0.05 + 0.9 * rng.random::<f64>());
        let tr = run_online(&traj, &[alpha_hat], &cfg, &spec, false).unwrap();
        let agg = tr.cumulative_loss();
        let max = tr.model_cumulative.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = tr
            .model_cumulative
            .iter()
            .zip(&cfg.initial_weights)
            .map(|(c, w0)| c + (1.0 / w0).ln() / cfg.lambda)
            .fold(f64::INFINITY, f64::min);
        worst_max = worst_max.max(agg - max);
        worst_min = worst_min.max(agg - min);
    }
    (
        outcome(worst_max <= 1e-9, format!("{n} paths, max(aggregate − max model) = {worst_max:.3e}")),
        outcome(worst_min <= 1e-9, format!("{n} paths, max(aggregate − regret bound) = {worst_min:.3e}")),
    )
}

fn ac3() -> Outcome {
    let mut rng = stream_rng(SEED, 3);
    let mut worst = f64::INFINITY;
    let mut checks = 0;
    for _ in 0..100 {
        let (spec, mut traj, alpha_hat, b) = random_instance(&mut rng, 300);
        traj.fill_discrepancy(&spec, &[alpha_hat]).unwrap();
        let a = 2f64.sqrt();
        let gamma = 0.5;
        let n2 = rng.random_range(1..=4);
        let init = informed_initialization(&[0.0, 0.0], n2, &NoiseLaw::Uniform { half_width: b }, b, &mut rng);
        for mult in [2.0, 10.0, 100.0] {
            let d = mult * a * a / (1.0f64 - gamma).powi(2);
            let w = spec.noise.bound().unwrap();
            let cfg = PredictorConfig::with_defaults(gamma, d, b, a, a * b, w, init.clone());
            for c in lms_regret_check(&traj, &[alpha_hat], &cfg, &spec).unwrap() {
                worst = worst.min(c.slack() / c.rhs.abs().max(1.0));
                checks += 1;
            }
        }
    }
    outcome(worst >= -1e-8, format!("{checks} model checks, min relative slack = {worst:.3e}"))
}

fn ac4() -> Outcome {
    let r = fig1(&Fig1Settings::default(), 50, SEED).unwrap();
    let n = r.meta.len();
    let transient = (0..500.min(n)).all(|k| r.meta[k].mean <= r.single[k].mean);
    let (jm, jf) = (r.meta[n - 1].mean, r.fixed[n - 1].mean);
    let pass = transient && jf >= 5.0 * jm && (0.8..=3.0).contains(&jm);
    outcome(
        pass,
        format!(
            "transient meta ≤ single: {transient}, J_fixed/J_meta = {:.2}, J_meta(T) = {jm:.4}",
            jf / jm
        ),
    )
}

fn ac5() -> Outcome {
    let r = rate_check(&RateSettings::default(), 30, SEED).unwrap();
    outcome((-1.3..=-0.7).contains(&r.slope), format!("slope = {:.4}", r.slope))
}

/// `ρ(k)` by a 2×2 eigensolve of `uuᵀ − k vvᵀ`.
fn radius_by_eigensolve(u: &[f64], v: &[f64], k: f64) -> f64 {
    let m = |i: usize, j: usize| u[i] * u[j] - k * v[i] * v[j];
    let (lo, hi) = eig2_sym(m(0, 0), m(0, 1), m(1, 1));
    lo.abs().max(hi.abs())
}

fn ac6() -> Outcome {
    let mut rng = stream_rng(SEED, 6);
    let (mut dk, mut drho) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let v: Vec<Vec<f64>> = (0..2).map(|_| (0..2).map(|_| 4.0 * rng.random::<f64>() - 2.0).collect()).collect();
        let beta0: Vec<f64> = (0..2).map(|_| 4.0 * rng.random::<f64>() - 2.0).collect();
        let u: Vec<f64> = v.iter().map(|row| row[0] * beta0[0] + row[1] * beta0[1]).collect();
        let (a, b) = (norm(&u), norm(&beta0));
        let r = (u[0] * beta0[0] + u[1] * beta0[1]) / (a * b);
        let (k_star, rho_star) = case2_minimizer(a, b, r);
        let f = |k: f64| radius_by_eigensolve(&u, &beta0, k);
        let k_max = 4.0 * a * a / (b * b);
        let grid: Vec<f64> = (0..1000).map(|i| k_max * i as f64 / 999.0).collect();
        let best = (0..grid.len()).min_by(|&i, &j| f(grid[i]).total_cmp(&f(grid[j]))).unwrap();
        let (mut lo, mut hi) = (grid[best.saturating_sub(1)], grid[(best + 1).min(grid.len() - 1)]);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let (x1, x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
            if f(x1) <= f(x2) {
                hi = x2;
            } else {
                lo = x1;
            }
        }
        let k = 0.5 * (lo + hi);
        dk = dk.max((k - k_star).abs());
        drho = drho.max((f(k) - rho_star).abs());
    }
    outcome(dk <= 1e-6 && drho <= 1e-6, format!("100 instances, max |Δk| = {dk:.2e}, max |Δρ| = {drho:.2e}"))
}

fn ac7() -> Outcome {
    let q = |n: i64, d: i64| ExactProb::new(n.into(), d.into());
    let mut identity = true;
    for t in 1..=6 {
        let c = FiniteChain::iid(vec![q(1, 3), q(2, 3)], t).unwrap();
        let m = dependency_matrix(&c, DEFAULT_EVENT_CAP).unwrap();
        for i in 0..t {
            for j in 0..t {
                let e = &m.gamma_sq[i][j];
                identity &= if i == j { e.is_one() } else { e.is_zero() };
            }
        }
    }
    let copy = two_state_chain((0, 1), 3).unwrap();
    let copy_one = dependency_matrix(&copy, DEFAULT_EVENT_CAP).unwrap().gamma_sq[0][1].is_one();
    let demo = depmatrix_demo(&(3..=8).collect::<Vec<_>>(), DEFAULT_EVENT_CAP).unwrap();
    let flat = demo.slope.abs() <= 0.1;
    outcome(
        identity && copy_one && flat,
        format!("i.i.d. identity: {identity}, copy Γ01 = 1: {copy_one}, mixing slope = {:.4}", demo.slope),
    )
}

fn enumerate_kl(p: &FiniteChain<f64>, q: &FiniteChain<f64>) -> f64 {
    let (s, h) = (p.states(), p.horizon());
    let mut total = 0.0;
    for idx in 0..s.pow(h as u32) {
        let path: Vec<usize> = (0..h).map(|k| idx / s.pow((h - 1 - k) as u32) % s).collect();
        let (pp, qq) = (p.path_prob(&path), q.path_prob(&path));
        if pp > 0.0 {
            total += pp * (pp / qq).ln();
        }
    }
    total
}

fn random_stochastic(rng: &mut impl Rng) -> Vec<f64> {
    let p = 0.05 + 0.9 * rng.random::<f64>();
    vec![p, 1.0 - p]
}

fn ac8() -> Outcome {
    let mut gauss = 0.0f64;
    for t in 1..=20 {
        let p = GaussianAr1 { a: 0.7, c: 0.3, q: 1.0, init_mean: 10.0, init_var: 1.0 };
        let q = GaussianAr1 { init_mean: 0.0, ..p };
        let v = kl_chain(&ChainLaw::GaussianAr1 { law: p, horizon: t }, &ChainLaw::GaussianAr1 { law: q, horizon: t }).unwrap();
        gauss = gauss.max((v - 50.0).abs());
    }
    let mut rng = stream_rng(SEED, 8);
    let mut finite = 0.0f64;
    for _ in 0..50 {
        let chain = |rng: &mut rand_chacha::ChaCha20Rng| {
            let kernels = (0..3).map(|_| vec![random_stochastic(rng), random_stochastic(rng)]).collect();
            FiniteChain::new(random_stochastic(rng), kernels).unwrap()
        };
        let (p, q) = (chain(&mut rng), chain(&mut rng));
        let v = kl_chain(&ChainLaw::Finite(p.clone()), &ChainLaw::Finite(q.clone())).unwrap();
        finite = finite.max((v - enumerate_kl(&p, &q)).abs());
    }
    outcome(gauss <= 1e-9 && finite <= 1e-12, format!("Gaussian max |Δ| = {gauss:.2e}, finite max |Δ| = {finite:.2e}"))
}

fn ac9() -> Outcome {
    let cases = dominance_study(50, 500, SEED).unwrap();
    let dominated = cases.iter().filter(|c| c.dominated()).count();
    let lemma = lemma_study(&LemmaSettings::default(), 200, SEED).unwrap();
    let held = lemma.iter().filter(|l| l.bound.total >= l.measured).count();
    outcome(
        dominated == cases.len() && held as f64 >= 0.95 * lemma.len() as f64,
        format!("prediction bound {dominated}/{}, generalization bound {held}/{}", cases.len(), lemma.len()),
    )
}

fn ac10() -> Outcome {
    let r = asymptotic_check(&AsymptoticSettings::default(), 50, SEED).unwrap();
    let (lo, hi) = r.interval(0.05);
    outcome(
        (lo..=hi).contains(&r.j_final_mean),
        format!("d = {:.1}, mean J_T = {:.5} in [{lo:.5}, {hi:.5}]", r.d, r.j_final_mean),
    )
}

fn ac11() -> Outcome {
    let rows = offset_check(&[(1, 1024), (4, 256), (16, 64)], 200, SEED).unwrap();
    let pass = rows.iter().all(|r| r.mean_offset <= r.bound);
    let detail = rows
        .iter()
        .map(|r| format!("({},{}): {:.3e} ≤ {:.3e}", r.n1, r.horizon, r.mean_offset, r.bound))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(pass, detail)
}

fn main() {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!o.pass);
        println!("AC{n:<2} {verdict} {name}: {} [{:.1?}]", o.detail, start.elapsed());
    };
    let (ac1, ac2) = {
        let start = Instant::now();
        let r = aggregation_suite();
        println!("      (aggregation suite ran in {:.1?})", start.elapsed());
        r
    };
    report(1, "aggregate never worse than the worst model", &|| outcome(ac1.pass, ac1.detail.clone()));
    report(2, "aggregation regret bound", &|| outcome(ac2.pass, ac2.detail.clone()));
    report(3, "projected-LMS regret inequality", &ac3);
    report(4, "sigmoid example ordering", &ac4);
    report(5, "generalization rate", &ac5);
    report(6, "drift minimizer oracle", &ac6);
    report(7, "dependency matrix", &ac7);
    report(8, "KL chain rule", &ac8);
    report(9, "bound dominance", &ac9);
    report(10, "asymptotic optimality", &ac10);
    report(11, "martingale offset", &ac11);
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
