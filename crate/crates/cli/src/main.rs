//! Command-line front end: simulation, offline fitting, online prediction,
//! bound evaluators and preset experiments.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use metalms::bounds::{
    dependency_matrix, dependency_matrix_state_events, drift_characterize, kl_chain, prediction_bound, BoundInputs,
    Case2Step, ChainLaw, DependencyMatrix, DriftCase, FiniteChain,
};
use metalms::harness::{emit_terms, run_experiment, ExperimentConfig, Preset};
use metalms::offline::{random_search_nls, write_estimate_csv, zoomed_grid_search_nls, read_alpha_csv};
use metalms::online::{run_online, PredictorConfig};
use metalms::system::io::{load_dataset, read_trajectory_csv, save_dataset};
use metalms::system::{simulate_source, simulate_target, CompactBox, MultiTrajectoryDataset, SystemSpec, TARGET_STREAM};
use metalms::{Error, ExactProb, Result};
use num_traits::Num;
use serde::Deserialize;

#[derive(Parser)]
#[command(name = "metalms", version, about = "Offline NLS plus online meta-LMS prediction, with bound evaluators")]
struct Cli {
    /// Master seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Monte Carlo replications (experiments only).
    #[arg(long, global = true)]
    replications: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate source trajectories, or one target path with --target.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 1)]
        n1: usize,
        #[arg(long)]
        horizon: usize,
        #[arg(long)]
        target: bool,
    },
    /// Approximate nonlinear least squares over a box.
    OfflineFit(FitArgs),
    /// Run the meta-LMS predictor along a path.
    Predict(PredictArgs),
    /// Bound evaluators.
    Bounds {
        #[command(subcommand)]
        command: BoundsCommand,
    },
    /// KL divergences of chain laws.
    Kl {
        #[command(subcommand)]
        command: KlCommand,
    },
    /// Dependency matrix of a finite chain.
    Depmatrix {
        #[arg(long)]
        chain: PathBuf,
        #[arg(long, default_value_t = 65536)]
        max_events: u128,
        /// Search only single-coordinate events (a lower bound, exact for Markov chains).
        #[arg(long)]
        state_events: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Drift constants (L1, L0(t)) from a per-step description.
    Drift {
        #[arg(long, value_enum)]
        case: CaseArg,
        #[arg(long)]
        inputs: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a preset experiment.
    Experiment {
        preset: String,
        /// TOML configuration; command-line flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        horizons: Option<Vec<usize>>,
        #[arg(long)]
        n1: Option<usize>,
        #[arg(long)]
        medians: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Grid,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    Case1,
    Case2,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// `lo..hi` per dimension, comma separated or repeated; defaults to the spec's box.
    #[arg(long = "box", value_delimiter = ',', allow_hyphen_values = true)]
    bounds: Vec<String>,
    #[arg(long, value_enum, default_value = "grid")]
    method: Method,
    #[arg(long, default_value_t = 50)]
    segments: usize,
    /// Zoom refinements after the first grid, plus one.
    #[arg(long, default_value_t = 1)]
    levels: usize,
    #[arg(long, default_value_t = 10000)]
    budget: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    /// A dataset manifest, a trajectory CSV, or `-` for a trajectory CSV on stdin.
    #[arg(long)]
    dataset: String,
    /// System spec; required unless the dataset is a manifest.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Trajectory index within a manifest.
    #[arg(long, default_value_t = 0)]
    index: usize,
    #[arg(long)]
    alpha_hat: PathBuf,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    trace: PathBuf,
    #[arg(long)]
    full_trace: bool,
}

#[derive(Subcommand)]
enum BoundsCommand {
    /// Prediction-bound breakdown from a TOML file of constants.
    Report {
        #[arg(long)]
        inputs: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum KlCommand {
    /// `D(p ‖ q)` for a TOML file with `[p]` and `[q]` chain laws.
    Chain {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(toml::from_str(&std::fs::read_to_string(path)?)?)
}

fn write_terms(terms: &[(String, f64)], out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => emit_terms(terms, p),
        None => {
            println!("term,value");
            for (k, v) in terms {
                println!("{k},{}", metalms::system::io::fmt_real(*v));
            }
            Ok(())
        }
    }
}

fn parse_box(items: &[String]) -> Result<CompactBox<f64>> {
    let (mut lo, mut hi) = (Vec::new(), Vec::new());
    for it in items {
        let (a, b) = it.split_once("..").ok_or_else(|| Error::Parse(format!("expected lo..hi, got {it:?}")))?;
        lo.push(metalms::system::io::parse_real(a)?);
        hi.push(metalms::system::io::parse_real(b)?);
    }
    CompactBox::new(lo, hi)
}

fn simulate(cli: &Cli, spec: &Path, n1: usize, horizon: usize, target: bool) -> Result<()> {
    let spec: SystemSpec<f64> = read_toml(spec)?;
    spec.validate()?;
    let data = if target {
        let traj = simulate_target(&spec, horizon, cli.seed)?;
        MultiTrajectoryDataset { spec, trajectories: vec![traj], seed: cli.seed, streams: vec![TARGET_STREAM] }
    } else {
        simulate_source(&spec, n1, horizon, cli.seed)?
    };
    let manifest = save_dataset(&cli.out_dir, &data)?;
    println!("{}", manifest.display());
    Ok(())
}

fn offline_fit(cli: &Cli, a: &FitArgs) -> Result<()> {
    let data: MultiTrajectoryDataset<f64> = load_dataset(&a.dataset)?;
    let bx = if a.bounds.is_empty() { data.spec.parameter_box.clone() } else { parse_box(&a.bounds)? };
    let est = match a.method {
        Method::Grid => zoomed_grid_search_nls(&data, &bx, a.segments, a.levels)?,
        Method::Random => random_search_nls(&data, &bx, a.budget, cli.seed)?,
    };
    write_estimate_csv(&a.out, &est)
}

fn predict(cli: &Cli, a: &PredictArgs) -> Result<()> {
    let (spec, traj) = if a.dataset.ends_with(".toml") {
        let data: MultiTrajectoryDataset<f64> = load_dataset(Path::new(&a.dataset))?;
        let traj = data.trajectories.get(a.index).cloned().ok_or_else(|| Error::invalid("trajectory index out of range"))?;
        let spec = match &a.spec {
            Some(p) => read_toml(p)?,
            None => data.spec,
        };
        (spec, traj)
    } else {
        let spec_path = a.spec.as_ref().ok_or_else(|| Error::invalid("--spec is required for a trajectory CSV"))?;
        let path = if a.dataset == "-" {
            std::fs::create_dir_all(&cli.out_dir)?;
            let p = cli.out_dir.join("stdin_trajectory.csv");
            let mut buf = Vec::new();
            std::io::Read::read_to_end(&mut std::io::stdin(), &mut buf)?;
            std::fs::write(&p, buf)?;
            p
        } else {
            PathBuf::from(&a.dataset)
        };
        (read_toml(spec_path)?, read_trajectory_csv(&path)?)
    };
    spec.validate()?;
    let alpha: Vec<f64> = read_alpha_csv(&a.alpha_hat)?;
    let cfg: PredictorConfig<f64> = read_toml(&a.config)?;
    let tr = run_online(&traj, &alpha, &cfg, &spec, a.full_trace)?;
    tr.write_csv(&a.trace)?;
    println!("J_T,{}", metalms::system::io::fmt_real(tr.j_final()));
    Ok(())
}

fn bounds_report(inputs: &Path, out: &Path) -> Result<()> {
    let inp: BoundInputs = read_toml(inputs)?;
    let p = prediction_bound::<f64>(&inp)?;
    let g = &p.generalization;
    let c = &p.coefficients;
    let terms: Vec<(String, f64)> = [
        ("J_mis", p.j_mis),
        ("J_opt", p.j_opt),
        ("J_est", p.j_est),
        ("total", p.total),
        ("grouped_total", p.grouped_total),
        ("C_d", c.c_d),
        ("N_d", c.n_d),
        ("coef_drift", c.drift),
        ("coef_eps", c.eps),
        ("coef_noise", c.noise),
        ("generalization_total", g.total),
        ("concentration", g.concentration),
        ("offset", g.offset),
        ("shift", g.shift),
        ("optimization", g.optimization),
        ("C1", g.c1),
        ("C0", g.c0),
        ("r_sq", g.r_sq),
        ("p_bad", g.p_bad),
        ("N0", g.n0),
        ("pre_asymptotic", f64::from(u8::from(g.pre_asymptotic))),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    emit_terms(&terms, out)
}

#[derive(Deserialize)]
struct ChainPair {
    p: ChainLaw,
    q: ChainLaw,
}

/// A probability written as a number or as an exact fraction such as `"9/20"`.
#[derive(Deserialize)]
#[serde(untagged)]
enum Entry {
    Exact(String),
    Int(i64),
    Float(f64),
}

#[derive(Deserialize)]
struct ChainFile {
    init: Vec<Entry>,
    kernels: Vec<Vec<Vec<Entry>>>,
}

fn exact(e: &Entry) -> Result<Option<ExactProb>> {
    match e {
        Entry::Exact(s) => ExactProb::from_str_radix(s.trim(), 10)
            .map(Some)
            .map_err(|_| Error::Parse(format!("bad fraction {s:?}"))),
        Entry::Int(i) => Ok(Some(ExactProb::from_integer((*i).into()))),
        Entry::Float(_) => Ok(None),
    }
}

fn float(e: &Entry) -> Result<f64> {
    match e {
        Entry::Float(v) => Ok(*v),
        Entry::Int(i) => Ok(*i as f64),
        Entry::Exact(s) => {
            let q = ExactProb::from_str_radix(s.trim(), 10).map_err(|_| Error::Parse(format!("bad fraction {s:?}")))?;
            Ok(num_traits::ToPrimitive::to_f64(&q).unwrap_or(f64::NAN))
        }
    }
}

fn convert<P, F: Fn(&Entry) -> Result<P>>(f: &ChainFile, conv: F) -> Result<FiniteChain<P>>
where
    P: metalms::Probability,
{
    let init = f.init.iter().map(&conv).collect::<Result<Vec<_>>>()?;
    let kernels = f
        .kernels
        .iter()
        .map(|k| k.iter().map(|row| row.iter().map(&conv).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    FiniteChain::new(init, kernels)
}

fn matrix_terms<P>(m: &DependencyMatrix<P>) -> Vec<(String, f64)> {
    let mut terms = vec![("norm_sq".to_string(), m.norm_sq), ("lower_bound".to_string(), f64::from(u8::from(m.lower_bound)))];
    for (i, row) in m.gamma.iter().enumerate() {
        for (j, v) in row.iter().enumerate().skip(i + 1) {
            terms.push((format!("gamma_{i}_{j}"), *v));
        }
    }
    terms
}

fn depmatrix(path: &Path, cap: u128, state_events: bool, out: Option<&Path>) -> Result<()> {
    let f: ChainFile = read_toml(path)?;
    let all_exact = f.init.iter().chain(f.kernels.iter().flatten().flatten()).all(|e| !matches!(e, Entry::Float(_)));
    let terms = if all_exact {
        let chain = convert(&f, |e| exact(e).map(|v| v.unwrap_or_default()))?;
        let m = if state_events { dependency_matrix_state_events(&chain)? } else { dependency_matrix(&chain, cap)? };
        matrix_terms(&m)
    } else {
        let chain = convert(&f, float)?;
        let m = if state_events { dependency_matrix_state_events(&chain)? } else { dependency_matrix(&chain, cap)? };
        matrix_terms(&m)
    };
    write_terms(&terms, out)
}

fn read_rows(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).map_err(Error::from)?;
    let header: Vec<String> = r.headers().map_err(Error::from)?.iter().map(|s| s.trim().to_string()).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(Error::from)?;
        rows.push(rec.iter().map(metalms::system::io::parse_real).collect::<Result<Vec<f64>>>()?);
    }
    Ok((header, rows))
}

fn column(header: &[String], name: &str) -> Result<usize> {
    header.iter().position(|h| h == name).ok_or_else(|| Error::Parse(format!("missing column {name}")))
}

fn drift(case: CaseArg, inputs: &Path, out: Option<&Path>) -> Result<()> {
    let (header, rows) = read_rows(inputs)?;
    let dc = match case {
        CaseArg::Case1 => {
            let (k, b, m) = (column(&header, "k")?, column(&header, "b")?, column(&header, "m")?);
            DriftCase::Case1 { steps: rows.iter().map(|r| (r[k], r[b], r[m])).collect() }
        }
        CaseArg::Case2 => {
            let dim = header.iter().filter(|h| h.starts_with("beta0_")).count();
            let idx = |name: String| column(&header, &name);
            let mut steps = Vec::with_capacity(rows.len());
            for r in &rows {
                let mut v = vec![vec![0.0; dim]; dim];
                for (i, row) in v.iter_mut().enumerate() {
                    for (j, x) in row.iter_mut().enumerate() {
                        *x = r[idx(format!("v_{i}_{j}"))?];
                    }
                }
                let beta0 = (0..dim).map(|i| idx(format!("beta0_{i}")).map(|c| r[c])).collect::<Result<Vec<_>>>()?;
                let beta = (0..dim).map(|i| idx(format!("beta_{i}")).map(|c| r[c])).collect::<Result<Vec<_>>>()?;
                steps.push(Case2Step { v, beta0, beta, b: r[idx("b".into())?], m: r[idx("m".into())?] });
            }
            DriftCase::Case2 { steps }
        }
    };
    let c = drift_characterize(&dc)?;
    let mut terms = vec![("L1".to_string(), c.l1), ("L0_mean".to_string(), c.l0_mean())];
    for (t, (l0, k)) in c.l0.iter().zip(&c.k).enumerate() {
        terms.push((format!("L0_{t}"), *l0));
        terms.push((format!("k_{t}"), *k));
    }
    write_terms(&terms, out)
}

fn experiment(
    cli: &Cli,
    preset: &str,
    config: Option<&Path>,
    horizon: Option<usize>,
    horizons: Option<&Vec<usize>>,
    n1: Option<usize>,
    medians: bool,
) -> Result<()> {
    let preset = Preset::parse(preset)?;
    let mut cfg = match config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::new(preset),
    };
    if cfg.preset != preset {
        return Err(Error::invalid(format!("config is for {}, not {}", cfg.preset.name(), preset.name())));
    }
    if config.is_none() || cli.seed != 0 {
        cfg.seed = cli.seed;
    }
    if config.is_none() || cli.out_dir != Path::new("out") {
        cfg.out_dir = cli.out_dir.clone();
    }
    cfg.replications = cli.replications.or(cfg.replications);
    cfg.horizon = horizon.or(cfg.horizon);
    cfg.horizons = horizons.cloned().or(cfg.horizons);
    cfg.n1 = n1.or(cfg.n1);
    cfg.medians |= medians;
    let summary = run_experiment(&cfg)?;
    for f in &summary.files {
        eprintln!("wrote {}", f.display());
    }
    write_terms(&summary.terms, None)
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate { spec, n1, horizon, target } => simulate(cli, spec, *n1, *horizon, *target),
        Command::OfflineFit(a) => offline_fit(cli, a),
        Command::Predict(a) => predict(cli, a),
        Command::Bounds { command: BoundsCommand::Report { inputs, out } } => bounds_report(inputs, out),
        Command::Kl { command: KlCommand::Chain { spec, out } } => {
            let pair: ChainPair = read_toml(spec)?;
            write_terms(&[("kl".to_string(), kl_chain(&pair.p, &pair.q)?)], out.as_deref())
        }
        Command::Depmatrix { chain, max_events, state_events, out } => {
            depmatrix(chain, *max_events, *state_events, out.as_deref())
        }
        Command::Drift { case, inputs, out } => drift(*case, inputs, out.as_deref()),
        Command::Experiment { preset, config, horizon, horizons, n1, medians } => {
            experiment(cli, preset, config.as_deref(), *horizon, horizons.as_ref(), *n1, *medians)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
