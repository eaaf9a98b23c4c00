use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::scalar::Real;

/// Axis-aligned parameter box `M = [lo, hi]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompactBox<T> {
    pub lo: Vec<T>,
    pub hi: Vec<T>,
}

impl<T: Real> CompactBox<T> {
    pub fn new(lo: Vec<T>, hi: Vec<T>) -> Result<Self> {
        let b = CompactBox { lo, hi };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lo.len() != self.hi.len() || self.lo.is_empty() {
            return Err(Error::invalid("box bounds must be nonempty and of equal length"));
        }
        for (i, (l, h)) in self.lo.iter().zip(&self.hi).enumerate() {
            if !(l.is_finite() && h.is_finite()) || l > h {
                return Err(Error::invalid(format!("box coordinate {i}: need finite lo <= hi")));
            }
        }
        if !(self.radius() > T::zero()) {
            return Err(Error::invalid("box radius must be positive"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// `R_M = ‖hi − lo‖ / 2`.
    pub fn radius(&self) -> T {
        let diff: Vec<T> = self.hi.iter().zip(&self.lo).map(|(&h, &l)| h - l).collect();
        norm(&diff) / T::lit(2.0)
    }

    pub fn contains(&self, a: &[T]) -> bool {
        a.len() == self.dim()
            && a
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(&x, (&l, &h))| x >= l && x <= h)
    }

    pub fn corners(&self) -> Vec<Vec<T>> {
        let n = self.dim();
        (0..1usize << n)
            .map(|mask| {
                (0..n)
                    .map(|k| if mask >> k & 1 == 1 { self.hi[k] } else { self.lo[k] })
                    .collect()
            })
            .collect()
    }
}

/// Euclidean ball `D = {β : ‖β‖ ≤ B}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallDomain<T> {
    pub radius: T,
}

impl<T: Real> BallDomain<T> {
    pub fn new(radius: T) -> Result<Self> {
        if !(radius >= T::zero()) || !radius.is_finite() {
            return Err(Error::invalid("ball radius must be finite and nonnegative"));
        }
        Ok(BallDomain { radius })
    }

    pub fn contains(&self, beta: &[T]) -> bool {
        norm(beta) <= self.radius
    }

    pub fn project(&self, beta: &[T]) -> Vec<T> {
        crate::online::project_ball(beta, self.radius)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_is_half_diagonal() {
        let b = CompactBox::new(vec![-3.5, -5.5], vec![6.5, 4.5]).unwrap();
        assert!((b.radius() - 50f64.sqrt()).abs() < 1e-12);
        assert!(b.contains(&[1.5, -0.5]));
        assert!(!b.contains(&[7.0, 0.0]));
        assert_eq!(b.corners().len(), 4);
    }

    #[test]
    fn degenerate_box_rejected() {
        assert!(CompactBox::new(vec![1.0], vec![1.0]).is_err());
        assert!(CompactBox::new(vec![2.0], vec![1.0]).is_err());
        assert!(CompactBox::<f64>::new(vec![], vec![]).is_err());
    }

    #[test]
    fn ball_membership() {
        let d = BallDomain::new(5.0).unwrap();
        assert!(d.contains(&[3.0, 4.0]));
        assert!(!d.contains(&[3.0, 4.1]));
        assert!(BallDomain::new(-1.0).is_err());
    }
}
