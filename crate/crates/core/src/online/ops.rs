use crate::linalg::{dot, norm};
use crate::scalar::Real;

/// Euclidean projection onto `{β : ‖β‖ ≤ radius}`.
pub fn project_ball<T: Real>(beta: &[T], radius: T) -> Vec<T> {
    let n = norm(beta);
    if n <= radius {
        beta.to_vec()
    } else {
        let s = radius / n;
        beta.iter().map(|&b| b * s).collect()
    }
}

/// `Π_D{β̂ + φ(y − β̂ᵀφ)/(d + m²)}`.
pub fn lms_step<T: Real>(beta: &[T], phi: &[T], y: T, d: T, m: T, radius: T) -> Vec<T> {
    let gain = (y - dot(beta, phi)) / (d + m * m);
    let raw: Vec<T> = beta.iter().zip(phi).map(|(&b, &p)| b + p * gain).collect();
    project_ball(&raw, radius)
}

/// `m_{t+1} = γ m_t + ‖φ_{t+1}‖`.
pub fn advance_envelope<T: Real>(m: T, phi_norm: T, gamma: T) -> T {
    gamma * m + phi_norm
}

/// `w_i exp(−λ l_i)` renormalized, with the minimum loss subtracted first.
pub fn update_weights<T: Real>(w: &[T], losses: &[T], lambda: T) -> Vec<T> {
    let lmin = losses.iter().copied().fold(T::infinity(), T::min);
    let raw: Vec<T> = w
        .iter()
        .zip(losses)
        .map(|(&wi, &li)| {
            let shifted = li - lmin;
            if shifted.is_finite() {
                wi * (-lambda * shifted).exp()
            } else {
                T::zero()
            }
        })
        .collect();
    let total: T = raw.iter().copied().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Per-model predictions `β̂_iᵀφ` and their weighted aggregate, summed in index order.
pub fn predict_step<T: Real>(estimates: &[Vec<T>], weights: &[T], phi: &[T]) -> (Vec<T>, T) {
    let preds: Vec<T> = estimates.iter().map(|b| dot(b, phi)).collect();
    let agg = preds.iter().zip(weights).fold(T::zero(), |acc, (&p, &w)| acc + p * w);
    (preds, agg)
}
