use super::DirectionField;
use crate::grid::ScalarField;
use crate::vec2::Vec2;

/// Unit direction of steepest descent of a banded potential field.
///
/// Central differences where both neighbors are on the band, one-sided
/// differences at band edges. Pixels off the band, or whose gradient norm
/// is at most `epsilon` (per pixel), stay undefined.
pub fn gradient_direction(field: &ScalarField, sigma: f64, epsilon: f64) -> DirectionField {
    let grid = field.grid;
    let mut out = DirectionField::undefined(grid);
    let on = |u: isize, v: isize| -> Option<f64> {
        if u < 0 || v < 0 || u >= grid.width as isize || v >= grid.height as isize {
            return None;
        }
        let i = grid.index(u as usize, v as usize);
        field.on_band(i).then(|| field.data[i] as f64)
    };
    let diff = |here: f64, prev: Option<f64>, next: Option<f64>| match (prev, next) {
        (Some(a), Some(b)) => 0.5 * (b - a),
        (None, Some(b)) => b - here,
        (Some(a), None) => here - a,
        (None, None) => 0.0,
    };
    let sigma = sigma as f32;
    for v in 0..grid.height {
        for u in 0..grid.width {
            let i = grid.index(u, v);
            if !field.on_band(i) {
                continue;
            }
            let (ui, vi) = (u as isize, v as isize);
            let here = field.data[i] as f64;
            let g = Vec2::new(
                diff(here, on(ui - 1, vi), on(ui + 1, vi)),
                diff(here, on(ui, vi - 1), on(ui, vi + 1)),
            );
            if g.norm() > epsilon {
                out.mean.set(i, -g / g.norm());
                out.sigma[i] = sigma;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn ramp_points_downhill() {
        let grid = GridSpec::new(6, 5, Vec2::ZERO, 0.5).unwrap();
        let f = ScalarField::from_fn(grid, |u, _| -(u as f32));
        let d = gradient_direction(&f, 0.3, 1e-6);
        for v in 0..5 {
            for u in 0..6 {
                assert_eq!(d.mean.get(u, v), Vec2::new(1.0, 0.0));
                assert_eq!(d.sigma[grid.index(u, v)], 0.3);
            }
        }
    }

    #[test]
    fn uniform_field_is_undefined() {
        let grid = GridSpec::new(4, 4, Vec2::ZERO, 1.0).unwrap();
        let d = gradient_direction(&ScalarField::from_fn(grid, |_, _| 0.7), 0.3, 1e-6);
        assert!((0..grid.len()).all(|i| !d.is_defined(i)));
    }

    #[test]
    fn off_band_pixels_stay_undefined() {
        let grid = GridSpec::new(4, 4, Vec2::ZERO, 1.0).unwrap();
        let d = gradient_direction(&ScalarField::zeros(grid), 0.3, 1e-6);
        assert!((0..grid.len()).all(|i| !d.is_defined(i) && d.sigma[i] == 0.0));
    }
}
