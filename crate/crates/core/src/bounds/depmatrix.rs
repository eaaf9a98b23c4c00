//! Dependency matrix of a finite chain by exhaustive enumeration.

use super::kl::FiniteChain;
use crate::error::{Error, Result};
use crate::linalg::sym_eigenvalues;
use crate::scalar::Probability;

pub const DEFAULT_EVENT_CAP: u128 = 1 << 16;

/// `Γ` together with the exact squares it was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct DependencyMatrix<P> {
    /// `Γ_ij²`, exact in the probability type.
    pub gamma_sq: Vec<Vec<P>>,
    pub gamma: Vec<Vec<f64>>,
    /// `‖Γ‖²`.
    pub norm_sq: f64,
    /// Set when only state events `{Z_i = s}`, `{Z_j ∈ ·}` were searched.
    pub lower_bound: bool,
}

/// Number of atoms the exhaustive search must enumerate, `S^{T−1}` for `T ≥ 2`.
pub fn events_needed(states: usize, horizon: usize) -> u128 {
    let mut worst = 1u128;
    for i in 0..horizon {
        for j in (i + 1)..horizon {
            let e = (i + 1).max(horizon - j) as u32;
            worst = worst.max((states as u128).saturating_pow(e));
        }
    }
    worst
}

fn finish<P: Probability>(gamma_sq: Vec<Vec<P>>, lower_bound: bool) -> DependencyMatrix<P> {
    let gamma: Vec<Vec<f64>> = gamma_sq
        .iter()
        .map(|r| r.iter().map(|v| v.to_f64().unwrap_or(f64::NAN).max(0.0).sqrt()).collect())
        .collect();
    let n = gamma.len();
    let mut gram = vec![vec![0.0; n]; n];
    for row in &gamma {
        for i in 0..n {
            for j in 0..n {
                gram[i][j] += row[i] * row[j];
            }
        }
    }
    let norm_sq = sym_eigenvalues(&gram).last().copied().unwrap_or(0.0);
    DependencyMatrix { gamma_sq, gamma, norm_sq, lower_bound }
}

fn unit_matrix<P: Probability>(n: usize) -> Vec<Vec<P>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { P::one() } else { P::zero() }).collect()).collect()
}

/// `Γ_ij² = 2 sup_{A,B} |P(B|A) − P(B)|`, which equals
/// `max_a Σ_b |P(b|a) − P(b)|` over prefix atoms `a` and suffix atoms `b`.
pub fn dependency_matrix<P: Probability>(chain: &FiniteChain<P>, cap: u128) -> Result<DependencyMatrix<P>> {
    chain.validate()?;
    let (s, horizon) = (chain.states(), chain.horizon());
    let needed = events_needed(s, horizon);
    let table_size = (s as u128).saturating_pow(horizon as u32);
    if needed > cap || table_size > cap.saturating_mul(s as u128) {
        return Err(Error::CapExceeded { needed, cap });
    }
    let joint = chain.joint();
    let mut g = unit_matrix::<P>(horizon);
    for i in 0..horizon {
        let n_pre = s.pow(i as u32 + 1);
        let pre_div = s.pow((horizon - i - 1) as u32);
        for j in (i + 1)..horizon {
            let n_suf = s.pow((horizon - j) as u32);
            let mut ab = vec![P::zero(); n_pre * n_suf];
            for (idx, p) in joint.iter().enumerate() {
                if p.is_zero() {
                    continue;
                }
                let k = (idx / pre_div) * n_suf + idx % n_suf;
                ab[k] = ab[k].clone() + p.clone();
            }
            let mut pa = vec![P::zero(); n_pre];
            let mut pb = vec![P::zero(); n_suf];
            for a in 0..n_pre {
                for b in 0..n_suf {
                    let v = ab[a * n_suf + b].clone();
                    pa[a] = pa[a].clone() + v.clone();
                    pb[b] = pb[b].clone() + v;
                }
            }
            let mut best = P::zero();
            for a in 0..n_pre {
                if pa[a].is_zero() {
                    continue;
                }
                let mut dev = P::zero();
                for b in 0..n_suf {
                    let cond = ab[a * n_suf + b].clone() / pa[a].clone();
                    dev = dev + (cond - pb[b].clone()).abs();
                }
                if dev > best {
                    best = dev;
                }
            }
            g[i][j] = best;
        }
    }
    Ok(finish(g, false))
}

/// Lower bound restricted to events on single coordinates `Z_i` and `Z_j`.
/// Needs no enumeration; for a Markov chain it coincides with the exact matrix.
pub fn dependency_matrix_state_events<P: Probability>(chain: &FiniteChain<P>) -> Result<DependencyMatrix<P>> {
    chain.validate()?;
    let (s, horizon) = (chain.states(), chain.horizon());
    let mut g = unit_matrix::<P>(horizon);
    for i in 0..horizon {
        let mi = chain.marginal(i);
        let mut cond: Vec<Vec<P>> = unit_matrix(s);
        for j in (i + 1)..horizon {
            let k = &chain.kernels[j - 1];
            cond = cond
                .iter()
                .map(|row| {
                    (0..s)
                        .map(|c| (0..s).fold(P::zero(), |acc, m| acc + row[m].clone() * k[m][c].clone()))
                        .collect()
                })
                .collect();
            let mj = chain.marginal(j);
            let mut best = P::zero();
            for (a, pa) in mi.iter().enumerate() {
                if pa.is_zero() {
                    continue;
                }
                let dev = (0..s).fold(P::zero(), |acc, b| acc + (cond[a][b].clone() - mj[b].clone()).abs());
                if dev > best {
                    best = dev;
                }
            }
            g[i][j] = best;
        }
    }
    Ok(finish(g, true))
}
