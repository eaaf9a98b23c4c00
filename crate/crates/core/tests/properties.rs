//! Invariants checked on random inputs.

use metalms::bounds::*;
use metalms::harness::{emit_csv, read_csv, Series};
use metalms::linalg::{dot, norm, sym_eigenvalues};
use metalms::online::{project_ball, run_online, PredictorConfig};
use metalms::system::*;
use proptest::prelude::*;

fn prob() -> impl Strategy<Value = f64> {
    0.02f64..0.98
}

fn chain(horizon: usize) -> impl Strategy<Value = FiniteChain<f64>> {
    (prob(), proptest::collection::vec((prob(), prob()), horizon - 1)).prop_map(|(p0, ks)| {
        let kernels = ks.into_iter().map(|(a, b)| vec![vec![a, 1.0 - a], vec![b, 1.0 - b]]).collect();
        FiniteChain::new(vec![p0, 1.0 - p0], kernels).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dependency_matrix_is_unit_upper_triangular(c in (2usize..=5).prop_flat_map(chain)) {
        let m = dependency_matrix(&c, DEFAULT_EVENT_CAP).unwrap();
        let t = c.horizon();
        for i in 0..t {
            prop_assert_eq!(m.gamma[i][i], 1.0);
            for j in 0..i {
                prop_assert_eq!(m.gamma[i][j], 0.0);
            }
        }
        prop_assert!(m.norm_sq >= 1.0 - 1e-12);
    }

    #[test]
    fn identical_kernels_leave_only_the_initial_term(c in (2usize..=6).prop_flat_map(chain), p0 in prob()) {
        let mut other = c.clone();
        other.init = vec![p0, 1.0 - p0];
        let v = kl_chain(&ChainLaw::Finite(c.clone()), &ChainLaw::Finite(other.clone())).unwrap();
        prop_assert!((v - kl_discrete(&c.init, &other.init)).abs() < 1e-14);
    }

    #[test]
    fn kl_is_nonnegative(p in chain(4), q in chain(4)) {
        prop_assert!(kl_finite_chain(&p, &q).unwrap() >= -1e-15);
        prop_assert!(kl_finite_chain(&p, &p).unwrap().abs() < 1e-15);
    }

    #[test]
    fn case2_constants_dominate_the_spectrum(
        v in proptest::collection::vec(-2.0f64..2.0, 4),
        beta0 in proptest::collection::vec(-2.0f64..2.0, 2),
        dir in proptest::collection::vec(-1.0f64..1.0, 2),
        b in 0.0f64..0.5,
    ) {
        prop_assume!(norm(&beta0) > 1e-3);
        let vm = vec![vec![v[0], v[1]], vec![v[2], v[3]]];
        let vb: Vec<f64> = vm.iter().map(|r| dot(r, &beta0)).collect();
        let scale = if norm(&dir) > 0.0 { b / norm(&dir) } else { 0.0 };
        let beta: Vec<f64> = vb.iter().zip(&dir).map(|(x, d)| x + scale * d).collect();
        let step = Case2Step { v: vm, beta0: beta0.clone(), beta: beta.clone(), b, m: 1.0 };
        let c = drift_characterize(&DriftCase::Case2 { steps: vec![step] }).unwrap();
        let k = c.k[0];
        let m: Vec<Vec<f64>> = (0..2)
            .map(|i| (0..2).map(|j| beta[i] * beta[j] - k * beta0[i] * beta0[j]).collect())
            .collect();
        let top = sym_eigenvalues(&m).into_iter().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(top <= c.l0[0] + 1e-9 * (1.0 + c.l0[0]), "top {} vs {}", top, c.l0[0]);
    }

    #[test]
    fn prediction_bound_nonincreasing_in_n1(n1 in 1usize..64, horizon in 16usize..4096) {
        let mut inp = BoundInputs {
            lipschitz: 1.0, alpha_dim: 2, radius_m: 2.0, b1: 1.0, b2: 0.0, b1_prime: 1.0, b2_prime: 0.0,
            sigma_v: 0.5, noise_dim: 1, eps_star: 0.0, kl: 10.0, n1, horizon, l1: 1.0, l0_mean: 0.1,
            delta: 0.01, sigma_sq: 0.25, feature_bound: 1.0, beta_bound: 1.0, gamma: 0.5, d: 10.0,
            noise_bound: 1.0, output_bound: 1.0, lambda: None, empirical_offset: None,
        };
        let a: f64 = prediction_bound(&inp).unwrap().total;
        inp.n1 += 1;
        let b: f64 = prediction_bound(&inp).unwrap().total;
        prop_assert!(b <= a * (1.0 + 1e-12));
    }

    #[test]
    fn projection_lands_in_the_ball(v in proptest::collection::vec(-100.0f64..100.0, 1..5), r in 0.1f64..10.0) {
        let p = project_ball(&v, r);
        prop_assert!(norm(&p) <= r * (1.0 + 1e-12));
        let again = project_ball(&p, r);
        prop_assert!(again.iter().zip(&p).all(|(a, b)| (a - b).abs() <= 1e-12 * r));
        if norm(&v) <= r {
            prop_assert_eq!(p, v);
        }
    }

    #[test]
    fn csv_round_trip(values in proptest::collection::vec(proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO, 1..40)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let s = Series::new("t", (0..values.len() as u64).collect()).with("v", values.clone());
        emit_csv(&s, &path).unwrap();
        let back = read_csv(&path).unwrap();
        let same = back.column("v").unwrap().iter().zip(&values).all(|(a, b)| a.to_bits() == b.to_bits());
        prop_assert!(same);
    }

    #[test]
    fn ensemble_stays_in_the_ball_with_normalized_weights(seed in any::<u64>(), n2 in 1usize..6, b in 0.5f64..3.0) {
        let spec = SystemSpec {
            id: "p".into(),
            family: ModelFamily::TanhNetwork { hidden: 1, inputs: 1 },
            alpha_star: vec![1.0],
            parameter_box: CompactBox { lo: vec![0.0], hi: vec![2.0] },
            beta: BetaSchedule::Sinusoid { center: vec![0.3, 0.2], amplitude: vec![0.1, 0.1], period: 40.0 },
            regressors: RegressorDynamics::Iid { law: NoiseLaw::Gaussian { mean: 0.0, sd: 1.0 }, dim: 1 },
            noise: NoiseLaw::Uniform { half_width: 0.5 },
            bounds: SpecBounds::default(),
        };
        let traj = simulate_target(&spec, 120, seed).unwrap();
        let init: Vec<Vec<f64>> = (0..n2).map(|i| vec![b * (i as f64 / n2 as f64), -0.1 * i as f64]).map(|v| project_ball(&v, b)).collect();
        let cfg = PredictorConfig::with_defaults(0.5, 20.0, b, 2f64.sqrt(), b * 2f64.sqrt(), 0.5, init);
        let tr = run_online(&traj, &[0.9], &cfg, &spec, true).unwrap();
        for w in tr.weights.as_ref().unwrap() {
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        for e in &tr.final_state.estimates {
            prop_assert!(norm(e) <= b * (1.0 + 1e-12));
        }
        let worst = tr.model_cumulative.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(tr.cumulative_loss() <= worst + 1e-9);
    }
}

#[test]
fn single_precision_pipeline_tracks_double() {
    let spec64 = SystemSpec {
        id: "p".into(),
        family: ModelFamily::TanhNetwork { hidden: 1, inputs: 1 },
        alpha_star: vec![1.0],
        parameter_box: CompactBox { lo: vec![0.0], hi: vec![2.0] },
        beta: BetaSchedule::Constant { value: vec![0.5, 0.1] },
        regressors: RegressorDynamics::Iid { law: NoiseLaw::Uniform { half_width: 1.0 }, dim: 1 },
        noise: NoiseLaw::Uniform { half_width: 0.2 },
        bounds: SpecBounds::default(),
    };
    let spec32: SystemSpec<f32> = SystemSpec {
        id: spec64.id.clone(),
        family: spec64.family.clone(),
        alpha_star: vec![1.0],
        parameter_box: CompactBox { lo: vec![0.0], hi: vec![2.0] },
        beta: BetaSchedule::Constant { value: vec![0.5, 0.1] },
        regressors: spec64.regressors.clone(),
        noise: spec64.noise.clone(),
        bounds: SpecBounds::default(),
    };
    let t64 = simulate_target(&spec64, 200, 5).unwrap();
    let t32 = simulate_target(&spec32, 200, 5).unwrap();
    let c64 = PredictorConfig::with_defaults(0.5, 20.0, 1.0, 2f64.sqrt(), 2f64.sqrt(), 0.2, vec![vec![0.0, 0.0]]);
    let c32 = PredictorConfig::with_defaults(0.5f32, 20.0, 1.0, 2f32.sqrt(), 2f32.sqrt(), 0.2, vec![vec![0.0, 0.0]]);
    let j64 = run_online(&t64, &[1.0], &c64, &spec64, false).unwrap().j_final();
    let j32 = run_online(&t32, &[1.0f32], &c32, &spec32, false).unwrap().j_final();
    assert!((j64 - j32 as f64).abs() < 1e-4 * j64.max(1.0), "{j64} vs {j32}");
}
