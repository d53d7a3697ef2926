use alloc::vec;
use alloc::vec::Vec;

use super::SpeedProfile;
use crate::grid::ScalarField;
use crate::vec2::Vec2;

/// Constant-speed profile: the mean observed step length repeated over the
/// horizon, with the observed (population) deviation floored at `sigma_floor`.
pub fn baseline_speed(
    _inertial: &ScalarField,
    past: &[Vec2],
    pred_len: usize,
    sigma_floor: f64,
) -> SpeedProfile {
    let steps: Vec<f64> = past.windows(2).map(|w| w[0].distance(w[1])).collect();
    let (mean, sd) = if steps.is_empty() {
        (0.0, 0.0)
    } else {
        let n = steps.len() as f64;
        let mean = steps.iter().sum::<f64>() / n;
        let var = steps.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n;
        (mean, libm::sqrt(var))
    };
    SpeedProfile {
        mean: vec![mean; pred_len],
        sigma: vec![sd.max(sigma_floor); pred_len],
    }
}
