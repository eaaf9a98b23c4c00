use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar distribution used for observation noise, initial values and innovations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseLaw {
    Zero,
    Gaussian { mean: f64, sd: f64 },
    /// Gaussian conditioned on `|w − mean| ≤ bound`.
    TruncatedGaussian { mean: f64, sd: f64, bound: f64 },
    Uniform { half_width: f64 },
}

impl NoiseLaw {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            NoiseLaw::Zero => true,
            NoiseLaw::Gaussian { mean, sd } => mean.is_finite() && sd.is_finite() && sd >= 0.0,
            NoiseLaw::TruncatedGaussian { mean, sd, bound } => {
                mean.is_finite() && sd > 0.0 && sd.is_finite() && bound > 0.0 && bound.is_finite()
            }
            NoiseLaw::Uniform { half_width } => half_width >= 0.0 && half_width.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid noise law {self:?}")))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            NoiseLaw::Zero => 0.0,
            NoiseLaw::Gaussian { mean, sd } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + sd * z
            }
            NoiseLaw::TruncatedGaussian { mean, sd, bound } => loop {
                let z: f64 = StandardNormal.sample(rng);
                if (sd * z).abs() <= bound {
                    break mean + sd * z;
                }
            },
            NoiseLaw::Uniform { half_width } => {
                if half_width == 0.0 {
                    0.0
                } else {
                    rng.random_range(-half_width..=half_width)
                }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            NoiseLaw::Zero | NoiseLaw::Uniform { .. } => 0.0,
            NoiseLaw::Gaussian { mean, .. } | NoiseLaw::TruncatedGaussian { mean, .. } => mean,
        }
    }

    /// Almost-sure bound on `|w|`, `None` for unbounded laws.
    pub fn bound(&self) -> Option<f64> {
        match *self {
            NoiseLaw::Zero => Some(0.0),
            NoiseLaw::Gaussian { mean, sd } => (sd == 0.0).then_some(mean.abs()),
            NoiseLaw::TruncatedGaussian { mean, bound, .. } => Some(mean.abs() + bound),
            NoiseLaw::Uniform { half_width } => Some(half_width),
        }
    }

    /// Sub-Gaussian variance proxy `σ_v` of the centered law.
    pub fn sub_gaussian_proxy(&self) -> f64 {
        match *self {
            NoiseLaw::Zero => 0.0,
            NoiseLaw::Gaussian { sd, .. } | NoiseLaw::TruncatedGaussian { sd, .. } => sd,
            NoiseLaw::Uniform { half_width } => half_width / 3f64.sqrt(),
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            NoiseLaw::Zero => 0.0,
            NoiseLaw::Gaussian { sd, .. } => sd * sd,
            NoiseLaw::Uniform { half_width } => half_width * half_width / 3.0,
            NoiseLaw::TruncatedGaussian { sd, bound, .. } => {
                // Simpson's rule on the standardized truncated density.
                let b = bound / sd;
                let n = 4000usize;
                let h = 2.0 * b / n as f64;
                let (mut m0, mut m2) = (0.0, 0.0);
                for i in 0..=n {
                    let z = -b + i as f64 * h;
                    let w = if i == 0 || i == n {
                        1.0
                    } else if i % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    let p = (-0.5 * z * z).exp();
                    m0 += w * p;
                    m2 += w * p * z * z;
                }
                sd * sd * m2 / m0
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn truncated_samples_stay_in_bound() {
        let law = NoiseLaw::TruncatedGaussian { mean: 0.0, sd: 1.0, bound: 0.5 };
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            assert!(law.sample(&mut rng).abs() <= 0.5);
        }
        assert_eq!(law.bound(), Some(0.5));
    }

    #[test]
    fn truncated_variance_limits() {
        let wide = NoiseLaw::TruncatedGaussian { mean: 0.0, sd: 2.0, bound: 40.0 };
        assert!((wide.variance() - 4.0).abs() < 1e-9);
        let narrow = NoiseLaw::TruncatedGaussian { mean: 0.0, sd: 1.0, bound: 1e-3 };
        // nearly uniform on [−b, b]
        assert!((narrow.variance() - 1e-6 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn uniform_moments() {
        let law = NoiseLaw::Uniform { half_width: 3.0 };
        assert_eq!(law.variance(), 3.0);
        assert!((law.sub_gaussian_proxy() - 3f64.sqrt()).abs() < 1e-15);
    }
}
