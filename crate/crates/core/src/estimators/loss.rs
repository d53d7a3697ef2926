//! Gaussian negative log-likelihood losses for direction and speed.

use core::f64::consts::PI;

use super::{DirectionField, SpeedProfile};
use crate::error::{Error, Result};
use crate::vec2::Vec2;

/// Standard deviations below this are clamped before evaluating a likelihood.
pub const SIGMA_CLAMP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NllLoss {
    pub value: f64,
    /// Number of terms whose sigma had to be clamped.
    pub clamped: usize,
}

fn clamp_sigma(sigma: f64, clamped: &mut usize) -> f64 {
    if sigma < SIGMA_CLAMP {
        *clamped += 1;
        SIGMA_CLAMP
    } else {
        sigma
    }
}

/// `-Σ log N(v/|v| ; O(x), σ(x)² I₂)` with mean and sigma sampled bilinearly.
///
/// Observations are `(position, velocity)`; zero velocities carry no
/// direction and are skipped.
pub fn direction_nll_loss(
    field: &DirectionField,
    observations: &[(Vec2, Vec2)],
) -> Result<NllLoss> {
    let mut value = 0.0;
    let mut clamped = 0;
    for &(pos, vel) in observations {
        let Some(dir) = vel.normalized() else {
            continue;
        };
        let taps = field.grid().bilinear_taps(pos)?;
        let mut mean = Vec2::ZERO;
        let mut sigma = 0.0;
        for &(i, w) in &taps {
            mean += field.mean.at(i) * w;
            sigma += w * field.sigma[i] as f64;
        }
        let sigma = clamp_sigma(sigma, &mut clamped);
        let var = sigma * sigma;
        value += libm::log(2.0 * PI * var) + (dir - mean).norm_sq() / (2.0 * var);
    }
    Ok(NllLoss { value, clamped })
}

/// `-Σ_τ log N(|v_τ| ; S(τ), σ_S(τ)²)`.
pub fn speed_nll_loss(profile: &SpeedProfile, observed: &[f64]) -> Result<NllLoss> {
    if observed.len() != profile.mean.len() || profile.sigma.len() != profile.mean.len() {
        return Err(Error::LengthMismatch {
            expected: profile.mean.len(),
            found: observed.len(),
        });
    }
    let mut value = 0.0;
    let mut clamped = 0;
    for ((&s, &mu), &sd) in observed.iter().zip(&profile.mean).zip(&profile.sigma) {
        let sd = clamp_sigma(sd, &mut clamped);
        let var = sd * sd;
        value += 0.5 * libm::log(2.0 * PI * var) + (s - mu) * (s - mu) / (2.0 * var);
    }
    Ok(NllLoss { value, clamped })
}
