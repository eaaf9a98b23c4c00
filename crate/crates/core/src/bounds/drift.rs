//! Source-to-target drift constants `(L₁, L₀(t))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::scalar::Real;

/// One time step of a case-2 description: `‖β_t − V_tβ⁰_t‖ ≤ B_t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Case2Step<T> {
    pub v: Vec<Vec<T>>,
    pub beta0: Vec<T>,
    pub beta: Vec<T>,
    pub b: T,
    pub m: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum DriftCase<T> {
    /// Per step `(K_t, B_t, M_t)` with `‖β_tβ_tᵀ − K_tβ⁰_tβ⁰_tᵀ‖ ≤ B_t`.
    Case1 { steps: Vec<(T, T, T)> },
    Case2 { steps: Vec<Case2Step<T>> },
}

/// Which formula produced a step's constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DriftBranch {
    Case1,
    Eigenvector,
    General,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriftConstants<T> {
    pub l1: T,
    pub l0: Vec<T>,
    /// Per-step minimizing `k` (case 2 only).
    pub k: Vec<T>,
    pub branch: Vec<DriftBranch>,
}

impl<T: Real> DriftConstants<T> {
    /// `L_{0,T}`.
    pub fn l0_mean(&self) -> T {
        if self.l0.is_empty() {
            return T::zero();
        }
        self.l0.iter().copied().sum::<T>() / T::lit(self.l0.len() as f64)
    }
}

/// Spectral radius of `uuᵀ − k vvᵀ` for `‖u‖ = a`, `‖v‖ = b` and cosine `r`.
pub fn case2_radius<T: Real>(a: T, b: T, r: T, k: T) -> T {
    let s2 = (T::one() - r * r).max(T::zero());
    let tr = a * a - k * b * b;
    let disc = tr * tr + T::lit(4.0) * k * a * a * b * b * s2;
    (tr.abs() + disc.sqrt()) / T::lit(2.0)
}

/// Minimizer `(k*, ρ*)` of the spectral radius over `k ≥ 0`: `k* = a²/b²`, `ρ* = a²√(1 − r²)`.
/// When `r = 0` the radius is `a²` for every `k ∈ [0, a²/b²]` and `k* = 0` is returned.
pub fn case2_minimizer<T: Real>(a: T, b: T, r: T) -> (T, T) {
    if r == T::zero() {
        return (T::zero(), a * a);
    }
    let s = (T::one() - r * r).max(T::zero()).sqrt();
    (a * a / (b * b), a * a * s)
}

fn mat_vec<T: Real>(m: &[Vec<T>], v: &[T]) -> Vec<T> {
    m.iter().map(|row| dot(row, v)).collect()
}

pub fn collinear_tolerance<T: Real>() -> T {
    T::lit(1e-9)
}

pub fn drift_characterize<T: Real>(case: &DriftCase<T>) -> Result<DriftConstants<T>> {
    match case {
        DriftCase::Case1 { steps } => {
            let mut l1 = T::zero();
            let mut l0 = Vec::with_capacity(steps.len());
            for &(k, b, m) in steps {
                if !(b >= T::zero() && m >= T::zero()) {
                    return Err(Error::invalid("B_t and M_t must be nonnegative"));
                }
                l1 = l1.max(k.abs());
                l0.push(b * m);
            }
            let n = steps.len();
            Ok(DriftConstants { l1, l0, k: steps.iter().map(|s| s.0).collect(), branch: vec![DriftBranch::Case1; n] })
        }
        DriftCase::Case2 { steps } => {
            let mut out = DriftConstants { l1: T::zero(), l0: vec![], k: vec![], branch: vec![] };
            for (t, st) in steps.iter().enumerate() {
                let m = st.beta0.len();
                if st.beta.len() != m || st.v.len() != m || st.v.iter().any(|r| r.len() != m) {
                    return Err(Error::invalid(format!("step {t}: inconsistent dimensions")));
                }
                if !(st.b >= T::zero() && st.m >= T::zero()) {
                    return Err(Error::invalid(format!("step {t}: B_t and M_t must be nonnegative")));
                }
                let vb = mat_vec(&st.v, &st.beta0);
                let (a, b) = (norm(&vb), norm(&st.beta0));
                if b == T::zero() {
                    return Err(Error::invalid(format!("step {t}: β⁰ must be nonzero")));
                }
                let reach = st.b * (norm(&st.beta) + a);
                let r = if a == T::zero() { T::one() } else { dot(&st.beta0, &vb) / (a * b) };
                if T::one() - r.abs() <= collinear_tolerance() {
                    let lam = dot(&st.beta0, &vb) / (b * b);
                    out.l1 = out.l1.max(lam * lam);
                    out.k.push(lam * lam);
                    out.l0.push(reach * st.m);
                    out.branch.push(DriftBranch::Eigenvector);
                } else {
                    let (k, rho) = case2_minimizer(a, b, r);
                    out.l1 = out.l1.max(k);
                    out.k.push(k);
                    out.l0.push((rho + reach) * st.m);
                    out.branch.push(DriftBranch::General);
                }
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eig2_sym;

    #[test]
    fn rotation_example() {
        let st = Case2Step {
            v: vec![vec![0.0, -1.0], vec![1.0, 0.0]],
            beta0: vec![1.0, 0.0],
            beta: vec![0.0, 1.0],
            b: 0.0,
            m: 1.0,
        };
        let c = drift_characterize(&DriftCase::Case2 { steps: vec![st] }).unwrap();
        assert_eq!(c.k[0], 0.0);
        assert_eq!(c.l0[0], 1.0);
        // Vβ⁰β⁰ᵀVᵀ = diag(0, 1)
        let (_, hi) = eig2_sym(0.0, 0.0, 1.0f64);
        assert_eq!(hi, 1.0);
    }

    #[test]
    fn eigenvector_example() {
        let st = Case2Step {
            v: vec![vec![2.0, 0.0], vec![0.0, 2.0]],
            beta0: vec![0.6, 0.8],
            beta: vec![1.0, 1.5],
            b: 0.5,
            m: 2.0,
        };
        let c = drift_characterize(&DriftCase::Case2 { steps: vec![st.clone()] }).unwrap();
        assert_eq!(c.branch[0], DriftBranch::Eigenvector);
        assert!((c.l1 - 4.0f64).abs() < 1e-12);
        let expect = st.b * st.m * (norm(&st.beta) + 2.0 * norm(&st.beta0));
        assert!((c.l0[0] - expect).abs() < 1e-12);
    }

    #[test]
    fn case1_takes_maxima() {
        let c = drift_characterize(&DriftCase::Case1 { steps: vec![(0.5, 1.0, 2.0), (-3.0, 0.5, 0.5)] }).unwrap();
        assert_eq!(c.l1, 3.0);
        assert_eq!(c.l0, vec![2.0, 0.25]);
    }

    #[test]
    fn minimizer_beats_neighbours() {
        let (a, b, r) = (1.7f64, 0.9, 0.35);
        let (k, rho) = case2_minimizer(a, b, r);
        assert!((case2_radius(a, b, r, k) - rho).abs() < 1e-12);
        for dk in [-1e-3, 1e-3, 0.1, -0.1] {
            assert!(case2_radius(a, b, r, (k + dk).max(0.0)) >= rho - 1e-12);
        }
    }
}
