use crate::error::{Error, Result};

use super::rate::optimal_momentum;

/// How the momentum `θ_t` evolves over outer iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentumSchedule {
    Fixed(f64),
    /// `θ_t = t / (t + k)`.
    Anneal(f64),
    /// The fixed `θ` that makes the companion matrix of a contraction-`π`
    /// method have a double root, reduced by `eps0`.
    Optimal { pi: f64, eps0: f64 },
}

impl MomentumSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            MomentumSchedule::Fixed(th) if !(0.0..1.0).contains(&th) => {
                Err(Error::invalid(format!("fixed momentum must lie in [0, 1), got {th}")))
            }
            MomentumSchedule::Anneal(k) if !(k > 0.0) || !k.is_finite() => {
                Err(Error::invalid(format!("anneal constant must be positive, got {k}")))
            }
            MomentumSchedule::Optimal { pi, eps0 } => optimal_momentum(pi, eps0).map(|_| ()),
            _ => Ok(()),
        }
    }

    /// Momentum used to form `y^{(t+1)}` from `x^{(t)}` and `x^{(t−1)}`.
    pub fn theta(&self, t: usize) -> f64 {
        match *self {
            MomentumSchedule::Fixed(th) => th,
            MomentumSchedule::Anneal(k) => t as f64 / (t as f64 + k),
            MomentumSchedule::Optimal { pi, eps0 } => optimal_momentum(pi, eps0).unwrap_or(0.0),
        }
    }
}
