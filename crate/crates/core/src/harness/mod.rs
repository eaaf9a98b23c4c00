//! Preset experiments, Monte Carlo replication and CSV emission.

pub mod config;
pub mod experiments;
pub mod output;
pub mod scenarios;
pub mod stats;

use std::path::{Path, PathBuf};

pub use config::{ExperimentConfig, OnlineOverrides, Preset};
pub use experiments::{
    asymptotic_check, depmatrix_demo, dominance_case, dominance_study, fig1, fig1_replication, generalization_error,
    lemma_replication, lemma_study, offset_check, prefix, rate_check, replication_seed, AsymptoticResult,
    AsymptoticSettings, DepmatrixResult, DominanceCase, Fig1Result, Fig1Settings, LemmaSettings, OffsetRow, RateResult,
    RateSettings,
};
pub use output::{emit_csv, emit_terms, read_csv, read_terms, Series};
pub use stats::Band;

use crate::bounds::DEFAULT_EVENT_CAP;
use crate::error::Result;

/// Files written by [`run_experiment`] and the headline numbers.
#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub preset: Preset,
    pub files: Vec<PathBuf>,
    pub terms: Vec<(String, f64)>,
}

fn band_columns(mut s: Series, name: &str, b: &[Band], medians: bool) -> Series {
    s = s
        .with(format!("{name}_p10"), b.iter().map(|v| v.p10).collect())
        .with(format!("{name}_p90"), b.iter().map(|v| v.p90).collect());
    if medians {
        s = s.with(format!("{name}_median"), b.iter().map(|v| v.median).collect());
    }
    s
}

fn means(b: &[Band]) -> Vec<f64> {
    b.iter().map(|v| v.mean).collect()
}

struct Writer<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn series(&mut self, name: &str, s: &Series) -> Result<()> {
        let p = self.dir.join(name);
        emit_csv(s, &p)?;
        self.files.push(p);
        Ok(())
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Summary> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let reps = cfg.replications();
    let mut w = Writer { dir: &cfg.out_dir, files: Vec::new() };
    let mut terms: Vec<(String, f64)> = Vec::new();
    let mut term = |k: &str, v: f64| terms.push((k.to_string(), v));
    match cfg.preset {
        Preset::Fig1Repro => {
            let mut s = Fig1Settings::default();
            if let Some(h) = cfg.horizon {
                s.horizon = h;
                s.source_horizon = h;
            }
            if let Some(o) = &cfg.predictor {
                s.n2 = o.n2.unwrap_or(s.n2);
                s.lambda = o.lambda.unwrap_or(s.lambda);
                s.d = o.d.unwrap_or(s.d);
                s.gamma = o.gamma.unwrap_or(s.gamma);
                s.radius = o.radius.unwrap_or(s.radius);
            }
            let r = fig1(&s, reps, cfg.seed)?;
            let t: Vec<u64> = (1..=r.meta.len() as u64).collect();
            w.series(
                "fig1_j.csv",
                &Series::new("t", t.clone())
                    .with("J_meta", means(&r.meta))
                    .with("J_single", means(&r.single))
                    .with("J_fixed", means(&r.fixed)),
            )?;
            let mut bands = Series::new("t", t);
            for (name, b) in [("meta", &r.meta), ("single", &r.single), ("fixed", &r.fixed)] {
                bands = band_columns(bands, name, b, cfg.medians);
            }
            w.series("fig1_bands.csv", &bands)?;
            let mut est = Series::new("T", r.trace_lengths.iter().map(|&n| n as u64).collect())
                .with("err_b", means(&r.err_b))
                .with("err_c", means(&r.err_c));
            est = band_columns(est, "err_b", &r.err_b, cfg.medians);
            est = band_columns(est, "err_c", &r.err_c, cfg.medians);
            w.series("fig2_estimation_error.csv", &est)?;
            let last = |b: &[Band]| b.last().map_or(f64::NAN, |v| v.mean);
            let (jm, js, jf) = (last(&r.meta), last(&r.single), last(&r.fixed));
            let window = r.meta.len().min(500);
            let violations = (0..window).filter(|&k| r.meta[k].mean > r.single[k].mean).count();
            term("J_meta_T", jm);
            term("J_single_T", js);
            term("J_fixed_T", jf);
            term("fixed_over_meta", jf / jm);
            term("transient_violations", violations as f64);
            term("err_b_final", last(&r.err_b));
            term("err_c_final", last(&r.err_c));
        }
        Preset::RateCheck => {
            let mut s = RateSettings::default();
            if let Some(h) = &cfg.horizons {
                s.horizons = h.clone();
            }
            if let Some(n1) = cfg.n1 {
                s.n1 = n1;
            }
            if let Some(spec) = cfg.load_spec()? {
                s.fresh = spec.clone();
                s.source = spec;
            }
            let r = rate_check(&s, reps, cfg.seed)?;
            let b: Vec<Band> = r.rows.iter().map(|row| row.band).collect();
            let table = Series::new("T", r.rows.iter().map(|row| row.horizon as u64).collect())
                .with("mean_err", means(&b))
                .with("err_T_over_logT", r.rows.iter().map(|row| row.scaled).collect());
            w.series("rate_check.csv", &band_columns(table, "err", &b, cfg.medians))?;
            term("slope", r.slope);
        }
        Preset::AsymptoticCheck => {
            let mut s = AsymptoticSettings::default();
            if let Some(h) = cfg.horizon {
                s.horizon = h;
                s.source_horizon = h;
            }
            if let Some(n1) = cfg.n1 {
                s.n1 = n1;
            }
            let r = asymptotic_check(&s, reps, cfg.seed)?;
            let n = r.checkpoints.len();
            let series = Series::new("t", r.checkpoints.iter().map(|&t| t as u64).collect())
                .with("J_mean", means(&r.j_curve))
                .with("sigma_sq_plus_eps", vec![r.sigma_sq + r.eps; n])
                .with("sigma_sq", vec![r.sigma_sq; n]);
            w.series("theorem37.csv", &band_columns(series, "J", &r.j_curve, cfg.medians))?;
            let (lo, hi) = r.interval(0.05);
            term("d", r.d);
            term("eps", r.eps);
            term("sigma_sq", r.sigma_sq);
            term("J_T_mean", r.j_final_mean);
            term("interval_lo", lo);
            term("interval_hi", hi);
        }
        Preset::BoundsReport => {
            let cases = dominance_study(reps, cfg.horizon.unwrap_or(500), cfg.seed)?;
            let col = |f: fn(&DominanceCase) -> f64| cases.iter().map(f).collect::<Vec<f64>>();
            w.series(
                "bounds_report.csv",
                &Series::new("config", (0..cases.len() as u64).collect())
                    .with("J_measured", col(|c| c.j_measured))
                    .with("J_mis", col(|c| c.bound.j_mis))
                    .with("J_opt", col(|c| c.bound.j_opt))
                    .with("J_est", col(|c| c.bound.j_est))
                    .with("total", col(|c| c.bound.total))
                    .with("grouped_total", col(|c| c.bound.grouped_total)),
            )?;
            let mut ls = LemmaSettings::default();
            if let Some(n1) = cfg.n1 {
                ls.n1 = n1;
            }
            let lemma = lemma_study(&ls, 4 * reps, cfg.seed ^ 0x5eed)?;
            w.series(
                "lemma_report.csv",
                &Series::new("replication", (0..lemma.len() as u64).collect())
                    .with("measured", lemma.iter().map(|l| l.measured).collect())
                    .with("bound", lemma.iter().map(|l| l.bound.total).collect())
                    .with("offset", lemma.iter().map(|l| l.offset).collect()),
            )?;
            let dominated = cases.iter().filter(|c| c.dominated()).count() as f64 / cases.len() as f64;
            let lemma_ok = lemma.iter().filter(|l| l.bound.total >= l.measured).count() as f64 / lemma.len() as f64;
            term("prediction_dominance_fraction", dominated);
            term("lemma_dominance_fraction", lemma_ok);
        }
        Preset::DepmatrixDemo => {
            let horizons = cfg.horizons.clone().unwrap_or_else(|| (3..=8).collect());
            let r = depmatrix_demo(&horizons, DEFAULT_EVENT_CAP)?;
            w.series(
                "depmatrix.csv",
                &Series::new("T", r.rows.iter().map(|row| row.horizon as u64).collect())
                    .with("norm_sq", r.rows.iter().map(|row| row.matrix.norm_sq).collect()),
            )?;
            term("slope", r.slope);
        }
    }
    let summary_path = cfg.out_dir.join("summary.csv");
    emit_terms(&terms, &summary_path)?;
    w.files.push(summary_path);
    Ok(Summary { preset: cfg.preset, files: w.files, terms })
}
