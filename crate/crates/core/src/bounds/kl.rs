//! KL divergences between Gaussians and between whole Markov chains.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Probability, Real};

/// `D(N(a, σ²) ‖ N(b, σ²)) = (a − b)² / (2σ²)`.
pub fn kl_gaussian_same_var<T: Real>(a: T, b: T, sigma: T) -> Result<T> {
    if !(sigma > T::zero()) {
        return Err(Error::invalid("sigma must be positive"));
    }
    let d = a - b;
    Ok(d * d / (T::lit(2.0) * sigma * sigma))
}

/// `D(N(μ₁, v₁) ‖ N(μ₂, v₂))` for variances `v₁, v₂`.
pub fn kl_gaussian<T: Real>(m1: T, v1: T, m2: T, v2: T) -> Result<T> {
    if !(v1 > T::zero() && v2 > T::zero()) {
        return Err(Error::invalid("variances must be positive"));
    }
    let d = m1 - m2;
    Ok(T::lit(0.5) * ((v2 / v1).ln() + (v1 + d * d) / v2 - T::one()))
}

/// `Σ p log(p/q)`, `+∞` when `p` charges a state `q` does not.
pub fn kl_discrete<P: Probability>(p: &[P], q: &[P]) -> f64 {
    let mut acc = 0.0;
    for (pi, qi) in p.iter().zip(q) {
        if pi.is_zero() {
            continue;
        }
        if qi.is_zero() {
            return f64::INFINITY;
        }
        let (a, b) = (pi.to_f64().unwrap_or(f64::NAN), qi.to_f64().unwrap_or(f64::NAN));
        acc += a * (a / b).ln();
    }
    acc
}

/// Time-inhomogeneous Markov chain `Z_0 … Z_{T−1}` on `S` states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteChain<P> {
    pub init: Vec<P>,
    /// `kernels[t][s][s']` is `P(Z_{t+1} = s' | Z_t = s)`; there are `T − 1` of them.
    pub kernels: Vec<Vec<Vec<P>>>,
}

fn check_distribution<P: Probability>(row: &[P], what: &str) -> Result<()> {
    if row.iter().any(|p| p.is_negative()) {
        return Err(Error::invalid(format!("{what} has a negative entry")));
    }
    let s = row.iter().fold(P::zero(), |acc, p| acc + p.clone());
    let s = s.to_f64().unwrap_or(f64::NAN);
    if !((s - 1.0).abs() <= 1e-9) {
        return Err(Error::invalid(format!("{what} sums to {s}, not 1")));
    }
    Ok(())
}

impl<P: Probability> FiniteChain<P> {
    pub fn new(init: Vec<P>, kernels: Vec<Vec<Vec<P>>>) -> Result<Self> {
        let c = FiniteChain { init, kernels };
        c.validate()?;
        Ok(c)
    }

    /// `horizon` copies of the same kernel.
    pub fn homogeneous(init: Vec<P>, kernel: Vec<Vec<P>>, horizon: usize) -> Result<Self> {
        Self::new(init, vec![kernel; horizon.saturating_sub(1)])
    }

    /// Independent draws from `law`.
    pub fn iid(law: Vec<P>, horizon: usize) -> Result<Self> {
        let kernel = vec![law.clone(); law.len()];
        Self::homogeneous(law, kernel, horizon)
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.init.len();
        if s == 0 {
            return Err(Error::invalid("chain needs at least one state"));
        }
        check_distribution(&self.init, "initial distribution")?;
        for (t, k) in self.kernels.iter().enumerate() {
            if k.len() != s || k.iter().any(|r| r.len() != s) {
                return Err(Error::invalid(format!("kernel {t} is not {s}×{s}")));
            }
            for (i, row) in k.iter().enumerate() {
                check_distribution(row, &format!("kernel {t} row {i}"))?;
            }
        }
        Ok(())
    }

    pub fn states(&self) -> usize {
        self.init.len()
    }

    pub fn horizon(&self) -> usize {
        self.kernels.len() + 1
    }

    pub fn path_prob(&self, path: &[usize]) -> P {
        let mut p = self.init[path[0]].clone();
        for (t, w) in path.windows(2).enumerate() {
            p = p * self.kernels[t][w[0]][w[1]].clone();
        }
        p
    }

    /// Law of `Z_t`.
    pub fn marginal(&self, t: usize) -> Vec<P> {
        let s = self.states();
        let mut m = self.init.clone();
        for k in &self.kernels[..t] {
            let mut next = vec![P::zero(); s];
            for (i, mi) in m.iter().enumerate() {
                for (j, n) in next.iter_mut().enumerate() {
                    *n = n.clone() + mi.clone() * k[i][j].clone();
                }
            }
            m = next;
        }
        m
    }

    /// Probability of every path, indexed in base `S` with `Z_0` the most significant digit.
    pub fn joint(&self) -> Vec<P> {
        let s = self.states();
        let mut table = self.init.clone();
        for k in &self.kernels {
            let mut next = Vec::with_capacity(table.len() * s);
            for (idx, p) in table.iter().enumerate() {
                let last = idx % s;
                for j in 0..s {
                    next.push(p.clone() * k[last][j].clone());
                }
            }
            table = next;
        }
        table
    }
}

/// Scalar Gaussian AR(1): `x_{t+1} = a x_t + c + N(0, q)`, `x_0 ~ N(m₀, v₀)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianAr1 {
    pub a: f64,
    pub c: f64,
    pub q: f64,
    pub init_mean: f64,
    pub init_var: f64,
}

impl GaussianAr1 {
    fn same_kernel(&self, other: &Self) -> bool {
        self.a == other.a && self.c == other.c && self.q == other.q
    }
}

/// A chain law whose KL divergence can be computed exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ChainLaw {
    Finite(FiniteChain<f64>),
    GaussianAr1 { law: GaussianAr1, horizon: usize },
}

/// `D(P ‖ Q)` of two finite chains by the chain rule. Identical kernels contribute nothing.
pub fn kl_finite_chain<P: Probability>(p: &FiniteChain<P>, q: &FiniteChain<P>) -> Result<f64> {
    if p.states() != q.states() || p.horizon() != q.horizon() {
        return Err(Error::invalid("chains differ in state count or horizon"));
    }
    let mut total = kl_discrete(&p.init, &q.init);
    for t in 1..p.horizon() {
        let (kp, kq) = (&p.kernels[t - 1], &q.kernels[t - 1]);
        if kp == kq {
            continue;
        }
        let m = p.marginal(t - 1);
        for (s, ms) in m.iter().enumerate() {
            if ms.is_zero() {
                continue;
            }
            let d = kl_discrete(&kp[s], &kq[s]);
            if d.is_infinite() {
                return Ok(f64::INFINITY);
            }
            total += ms.to_f64().unwrap_or(f64::NAN) * d;
        }
    }
    Ok(total)
}

/// `D(P ‖ Q)` of two Gaussian AR(1) chains over `horizon` states.
pub fn kl_gaussian_ar1(p: &GaussianAr1, q: &GaussianAr1, horizon: usize) -> Result<f64> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be positive"));
    }
    let mut total = kl_gaussian(p.init_mean, p.init_var, q.init_mean, q.init_var)?;
    if p.same_kernel(q) {
        return Ok(total);
    }
    let (mut mean, mut var) = (p.init_mean, p.init_var);
    let (da, dc) = (p.a - q.a, p.c - q.c);
    for _ in 1..horizon {
        let shift = (da * mean + dc).powi(2) + da * da * var;
        total += 0.5 * ((q.q / p.q).ln() + (p.q + shift) / q.q - 1.0);
        mean = p.a * mean + p.c;
        var = p.a * p.a * var + p.q;
    }
    Ok(total)
}

pub fn kl_chain(p: &ChainLaw, q: &ChainLaw) -> Result<f64> {
    match (p, q) {
        (ChainLaw::Finite(a), ChainLaw::Finite(b)) => {
            a.validate()?;
            b.validate()?;
            kl_finite_chain(a, b)
        }
        (ChainLaw::GaussianAr1 { law: a, horizon: ha }, ChainLaw::GaussianAr1 { law: b, horizon: hb }) => {
            if ha != hb {
                return Err(Error::invalid("chains differ in horizon"));
            }
            kl_gaussian_ar1(a, b, *ha)
        }
        _ => Err(Error::invalid("chains live on different state spaces")),
    }
}
