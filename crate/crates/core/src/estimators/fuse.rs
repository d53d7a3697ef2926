use alloc::vec::Vec;

use super::DirectionField;

/// Inverse-variance weight of the inertial field against the environmental one:
/// `σ_env² / (σ_inertial² + σ_env²)` where both are defined, `1` where only the
/// inertial field is, `0` where only the environmental field is, `0.5` elsewhere.
pub fn fuse_weight_inverse_variance(
    inertial: &DirectionField,
    environment: &DirectionField,
) -> Vec<f32> {
    (0..inertial.sigma.len())
        .map(
            |i| match (inertial.is_defined(i), environment.is_defined(i)) {
                (true, true) => {
                    let vx = inertial.sigma[i] as f64 * inertial.sigma[i] as f64;
                    let vi = environment.sigma[i] as f64 * environment.sigma[i] as f64;
                    if vx + vi > 0.0 {
                        (vi / (vx + vi)) as f32
                    } else {
                        0.5
                    }
                }
                (true, false) => 1.0,
                (false, true) => 0.0,
                (false, false) => 0.5,
            },
        )
        .collect()
}
