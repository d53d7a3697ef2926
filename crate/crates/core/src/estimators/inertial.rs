use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField};
use crate::labeling::{label_potentials, rasterize_band};
use crate::vec2::Vec2;

/// Extends `past` by constant-velocity extrapolation (mean observed step)
/// for `pred_len` steps, labels the result and rasterizes it with a band
/// that widens linearly from `width` at the current position to
/// `spread * width` at the horizon.
///
/// A stationary observation yields an all-zero field with an empty band.
pub fn baseline_inertial_field(
    past: &[Vec2],
    grid: &GridSpec,
    pred_len: usize,
    width: f64,
    spread: f64,
) -> Result<ScalarField> {
    if past.len() < 2 {
        return Err(Error::invalid(
            "inertial field needs at least 2 observed points",
        ));
    }
    let points = extrapolate(past, pred_len);
    let label = match label_potentials(&points) {
        Ok(l) => l,
        Err(Error::DegenerateLabel) => return Ok(ScalarField::zeros(*grid)),
        Err(e) => return Err(e),
    };
    let widths: Vec<f64> = (0..points.len())
        .map(|i| {
            let k = i.saturating_sub(past.len() - 1) as f64;
            let frac = if pred_len == 0 {
                0.0
            } else {
                k / pred_len as f64
            };
            width * (1.0 + (spread - 1.0) * frac)
        })
        .collect();
    rasterize_band(&points, &label, grid, &widths)
}

/// `past` followed by `pred_len` constant-velocity steps.
pub(crate) fn extrapolate(past: &[Vec2], pred_len: usize) -> Vec<Vec2> {
    let first = past[0];
    let last = past[past.len() - 1];
    let step = (last - first) / (past.len() - 1) as f64;
    let mut points = Vec::with_capacity(past.len() + pred_len);
    points.extend_from_slice(past);
    points.extend((1..=pred_len).map(|k| last + step * k as f64));
    points
}
