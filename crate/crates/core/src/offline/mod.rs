//! Approximate nonlinear least squares over the parameter box, with a sub-optimality certificate.

use std::path::Path;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::scalar::Real;
use crate::system::io::{fmt_real, parse_real};
use crate::system::{stream_rng, CompactBox, MultiTrajectoryDataset};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Certificate<T> {
    /// Proven bound from the grid resolution and a Lipschitz constant.
    Deterministic(T),
    /// Gap to an independent random probe; not a proof.
    Statistical(T),
    Uncertified,
}

impl<T: Real> Certificate<T> {
    pub fn value(&self) -> Option<T> {
        match *self {
            Certificate::Deterministic(v) | Certificate::Statistical(v) => Some(v),
            Certificate::Uncertified => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SearchMeta<T> {
    Grid {
        segments: usize,
        levels: usize,
        /// Half-diagonal of a cell of the first (covering) grid.
        half_diagonal: T,
        /// Minimum loss found on the first grid.
        coarse_loss: T,
    },
    Random { budget: usize, probe: usize, seed: u64 },
    /// Loaded from disk without search metadata.
    External,
}

impl<T> SearchMeta<T> {
    pub fn method(&self) -> &'static str {
        match self {
            SearchMeta::Grid { .. } => "grid",
            SearchMeta::Random { .. } => "random",
            SearchMeta::External => "external",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NlsEstimate<T> {
    pub alpha_hat: Vec<T>,
    pub loss: T,
    pub certificate: Certificate<T>,
    pub meta: SearchMeta<T>,
    pub evaluations: usize,
}

/// Loss evaluator with the known source schedule `β⁰(t)` cached.
struct Objective<'a, T> {
    data: &'a MultiTrajectoryDataset<T>,
    betas: Vec<Vec<T>>,
}

impl<'a, T: Real> Objective<'a, T> {
    fn new(data: &'a MultiTrajectoryDataset<T>) -> Result<Self> {
        if data.sample_count() == 0 {
            return Err(Error::invalid("empty dataset"));
        }
        let horizon = data.trajectories.iter().map(|t| t.len()).max().unwrap_or(0);
        let betas = (0..horizon).map(|t| data.spec.beta.at(t)).collect();
        Ok(Objective { data, betas })
    }

    fn loss(&self, alpha: &[T]) -> T {
        let fam = &self.data.spec.family;
        let mut acc = T::zero();
        for tr in &self.data.trajectories {
            for (t, (x, &y)) in tr.x.iter().zip(&tr.y).enumerate() {
                let r = y - dot(&self.betas[t], &fam.features(t, alpha, x));
                acc = acc + r * r;
            }
        }
        acc / T::lit(self.data.sample_count() as f64)
    }
}

/// `(1/(N₁T)) Σ_i Σ_t (y_{t+1,i} − f_t(α, β⁰(t), x_{t,i}))²`.
pub fn empirical_loss<T: Real>(data: &MultiTrajectoryDataset<T>, alpha: &[T]) -> Result<T> {
    if alpha.len() != data.spec.alpha_dim() {
        return Err(Error::invalid("alpha has the wrong dimension"));
    }
    if !data.spec.parameter_box.contains(alpha) {
        return Err(Error::invalid("alpha outside the parameter box"));
    }
    Ok(Objective::new(data)?.loss(alpha))
}

/// Grid coordinate `lo + (hi − lo)·i/K`; doubling `K` keeps every old node.
fn grid_axis<T: Real>(lo: T, hi: T, k: usize) -> Vec<T> {
    (0..=k).map(|i| lo + (hi - lo) * (T::lit(i as f64) / T::lit(k as f64))).collect()
}

/// Evaluates every node of the grid and returns the first strict minimum in
/// lexicographic index order, plus the evaluation count.
fn scan_grid<T: Real>(obj: &Objective<T>, lo: &[T], hi: &[T], k: usize) -> (Vec<T>, T, usize) {
    let axes: Vec<Vec<T>> = lo.iter().zip(hi).map(|(&l, &h)| grid_axis(l, h, k)).collect();
    let n = axes.len();
    let total = (k + 1).pow(n as u32);
    let point = |mut idx: usize| -> Vec<T> {
        let mut p = vec![T::zero(); n];
        for d in (0..n).rev() {
            p[d] = axes[d][idx % (k + 1)];
            idx /= k + 1;
        }
        p
    };
    let losses: Vec<T> = (0..total).into_par_iter().map(|i| obj.loss(&point(i))).collect();
    let mut best = 0;
    for (i, &l) in losses.iter().enumerate() {
        if l < losses[best] || (losses[best].is_nan() && !l.is_nan()) {
            best = i;
        }
    }
    (point(best), losses[best], total)
}

fn grid_certificate<T: Real>(loss: T, coarse: T, h: T, lipschitz: Option<T>) -> Certificate<T> {
    match lipschitz {
        None => Certificate::Uncertified,
        Some(l) => {
            // √loss is a scaled Euclidean norm of the residual vector, so moving α by at most h
            // changes it by at most L·h; hence min over the box ≥ (√coarse − L·h)₊².
            let floor = (coarse.sqrt() - l * h).max(T::zero());
            Certificate::Deterministic((loss - floor * floor).max(T::zero()))
        }
    }
}

pub fn grid_search_nls<T: Real>(data: &MultiTrajectoryDataset<T>, bx: &CompactBox<T>, segments: usize) -> Result<NlsEstimate<T>> {
    zoomed_grid_search_nls(data, bx, segments, 1)
}

/// Uniform grid followed by `levels − 1` refinements of the same resolution,
/// each spanning one cell of the previous level around its best point.
pub fn zoomed_grid_search_nls<T: Real>(
    data: &MultiTrajectoryDataset<T>,
    bx: &CompactBox<T>,
    segments: usize,
    levels: usize,
) -> Result<NlsEstimate<T>> {
    bx.validate()?;
    if segments == 0 || levels == 0 {
        return Err(Error::invalid("segments and levels must be at least 1"));
    }
    if bx.dim() != data.spec.alpha_dim() {
        return Err(Error::invalid("box dimension differs from alpha dimension"));
    }
    let obj = Objective::new(data)?;
    let (mut best, mut best_loss, mut evals) = scan_grid(&obj, &bx.lo, &bx.hi, segments);
    let coarse = best_loss;
    let k = T::lit(segments as f64);
    let mut cell: Vec<T> = bx.lo.iter().zip(&bx.hi).map(|(&l, &h)| (h - l) / k).collect();
    let half_diagonal = crate::linalg::norm(&cell) / T::lit(2.0);
    for _ in 1..levels {
        let lo: Vec<T> = best.iter().zip(&cell).zip(&bx.lo).map(|((&b, &c), &l)| (b - c).max(l)).collect();
        let hi: Vec<T> = best.iter().zip(&cell).zip(&bx.hi).map(|((&b, &c), &h)| (b + c).min(h)).collect();
        let (cand, cand_loss, e) = scan_grid(&obj, &lo, &hi, segments);
        evals += e;
        if cand_loss < best_loss {
            best = cand;
            best_loss = cand_loss;
        }
        cell = lo.iter().zip(&hi).map(|(&l, &h)| (h - l) / k).collect();
    }
    Ok(NlsEstimate {
        certificate: grid_certificate(best_loss, coarse, half_diagonal, data.spec.bounds.lipschitz),
        alpha_hat: best,
        loss: best_loss,
        meta: SearchMeta::Grid { segments, levels, half_diagonal, coarse_loss: coarse },
        evaluations: evals,
    })
}

fn uniform_point<T: Real, R: Rng>(bx: &CompactBox<T>, rng: &mut R) -> Vec<T> {
    bx.lo
        .iter()
        .zip(&bx.hi)
        .map(|(&l, &h)| l + (h - l) * T::lit(rng.random::<f64>()))
        .collect()
}

/// Best of `budget` uniform samples (a prefix-stable stream) and all box corners.
/// The statistical certificate is the gap to the best of an independent probe
/// batch of `max(budget/10, 1)` samples.
pub fn random_search_nls<T: Real>(
    data: &MultiTrajectoryDataset<T>,
    bx: &CompactBox<T>,
    budget: usize,
    seed: u64,
) -> Result<NlsEstimate<T>> {
    bx.validate()?;
    if budget == 0 {
        return Err(Error::invalid("budget must be at least 1"));
    }
    if bx.dim() != data.spec.alpha_dim() {
        return Err(Error::invalid("box dimension differs from alpha dimension"));
    }
    let obj = Objective::new(data)?;
    let mut rng = stream_rng(seed, 0);
    let mut cands: Vec<Vec<T>> = (0..budget).map(|_| uniform_point(bx, &mut rng)).collect();
    cands.extend(bx.corners());
    let probe = (budget / 10).max(1);
    let mut prng = stream_rng(seed, 1);
    let probes: Vec<Vec<T>> = (0..probe).map(|_| uniform_point(bx, &mut prng)).collect();
    let losses: Vec<T> = cands.par_iter().map(|a| obj.loss(a)).collect();
    let probe_best = probes.par_iter().map(|a| obj.loss(a)).reduce(T::infinity, T::min);
    let mut best = 0;
    for (i, &l) in losses.iter().enumerate() {
        if l < losses[best] {
            best = i;
        }
    }
    let loss = losses[best];
    Ok(NlsEstimate {
        alpha_hat: cands.swap_remove(best),
        loss,
        certificate: Certificate::Statistical((loss - probe_best).max(T::zero())),
        meta: SearchMeta::Random { budget, probe, seed },
        evaluations: losses.len() + probe,
    })
}

/// Result of [`certify_epsilon`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifiedBound<T> {
    pub value: T,
    /// Set when the estimate did not come from a grid and the value is statistical.
    pub warning: bool,
}

/// Deterministic ε* bound for a grid estimate with Lipschitz constant `lipschitz`.
pub fn certify_epsilon<T: Real>(
    est: &NlsEstimate<T>,
    data: &MultiTrajectoryDataset<T>,
    bx: &CompactBox<T>,
    lipschitz: T,
) -> Result<CertifiedBound<T>> {
    if !(lipschitz >= T::zero()) {
        return Err(Error::invalid("Lipschitz constant must be nonnegative"));
    }
    match &est.meta {
        SearchMeta::Grid { half_diagonal, coarse_loss, .. } => {
            let loss = empirical_loss(data, &est.alpha_hat)?;
            let v = grid_certificate(loss, *coarse_loss, *half_diagonal, Some(lipschitz));
            Ok(CertifiedBound { value: v.value().unwrap_or(T::zero()), warning: false })
        }
        _ => {
            let _ = bx;
            Ok(CertifiedBound { value: est.certificate.value().unwrap_or(T::infinity()), warning: true })
        }
    }
}

/// `alpha_0..alpha_{n-1},loss,eps_cert,method`.
pub fn write_estimate_csv<T: Real>(path: &Path, est: &NlsEstimate<T>) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (0..est.alpha_hat.len()).map(|i| format!("alpha_{i}")).collect();
    header.extend(["loss", "eps_cert", "method"].map(String::from));
    wtr.write_record(&header)?;
    let mut row: Vec<String> = est.alpha_hat.iter().map(|a| fmt_real(a.to_f64_lossy())).collect();
    row.push(fmt_real(est.loss.to_f64_lossy()));
    row.push(match est.certificate {
        Certificate::Deterministic(v) | Certificate::Statistical(v) => fmt_real(v.to_f64_lossy()),
        Certificate::Uncertified => "uncertified".into(),
    });
    let method = match est.certificate {
        Certificate::Statistical(_) => format!("{}-statistical", est.meta.method()),
        _ => est.meta.method().to_string(),
    };
    row.push(method);
    wtr.write_record(&row)?;
    wtr.flush()?;
    Ok(())
}

/// Reads the α columns of an estimate CSV.
pub fn read_alpha_csv<T: Real>(path: &Path) -> Result<Vec<T>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(String::from).collect();
    let rec = rdr
        .records()
        .next()
        .ok_or_else(|| Error::Parse(format!("{}: no rows", path.display())))??;
    header
        .iter()
        .enumerate()
        .filter(|(_, h)| h.starts_with("alpha_"))
        .map(|(i, _)| Ok(T::lit(parse_real(rec.get(i).unwrap_or(""))?)))
        .collect()
}
