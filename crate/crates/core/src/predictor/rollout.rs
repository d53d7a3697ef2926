use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::estimators::{DirectionField, ForceField, SpeedProfile};
use crate::grid::VectorField;
use crate::vec2::Vec2;

/// Blends two direction fields with a per-pixel weight on the first:
/// `mean = normalize(y·a + (1 - y)·b)`, `sigma = y·σ_a + (1 - y)·σ_b`.
pub fn fuse_directions(
    inertial: &DirectionField,
    environment: &DirectionField,
    weight: &[f32],
) -> Result<DirectionField> {
    inertial.grid().ensure_same(environment.grid())?;
    if weight.len() != inertial.sigma.len() {
        return Err(Error::LengthMismatch {
            expected: inertial.sigma.len(),
            found: weight.len(),
        });
    }
    let mut out = DirectionField::undefined(*inertial.grid());
    for (i, &y) in weight.iter().enumerate() {
        let y = y as f64;
        let blend = inertial.mean.at(i) * y + environment.mean.at(i) * (1.0 - y);
        if let Some(unit) = blend.normalized() {
            out.mean.set(i, unit);
        }
        out.sigma[i] =
            (y * inertial.sigma[i] as f64 + (1.0 - y) * environment.sigma[i] as f64) as f32;
    }
    Ok(out)
}

/// `D(u, v) = O(u, v) · S(step) + F(u, v)` for future step `step` (0-based).
pub fn displacement_field(
    direction: &DirectionField,
    speed: &SpeedProfile,
    force: &ForceField,
    step: usize,
) -> Result<VectorField> {
    direction.grid().ensure_same(&force.grid)?;
    let s = *speed.mean.get(step).ok_or(Error::LengthMismatch {
        expected: step + 1,
        found: speed.mean.len(),
    })?;
    Ok(displacement_with(direction, s, force))
}

pub(crate) fn displacement_with(
    direction: &DirectionField,
    speed: f64,
    force: &ForceField,
) -> VectorField {
    let mut out = VectorField::zeros(*direction.grid());
    for i in 0..out.data.len() {
        out.set(i, direction.mean.at(i) * speed + force.at(i));
    }
    out
}

/// A rolled-out future; `truncated` when it left the grid before the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    pub positions: Vec<Vec2>,
    pub truncated: bool,
}

impl Rollout {
    pub fn map(&self, f: impl Fn(Vec2) -> Vec2) -> Rollout {
        Rollout {
            positions: self.positions.iter().map(|&p| f(p)).collect(),
            truncated: self.truncated,
        }
    }
}

/// `x_{k+1} = x_k + D_k(x_k)`, one field per future step.
///
/// The position that leaves the grid hull is kept, and the rollout stops
/// there with `truncated` set; fields are never read outside the hull.
pub fn rollout(start: Vec2, fields: &[VectorField]) -> Result<Rollout> {
    let Some(first) = fields.first() else {
        return Ok(Rollout {
            positions: Vec::new(),
            truncated: false,
        });
    };
    if !first.grid.contains(start) {
        return Err(Error::OutOfHull {
            x: start.x,
            y: start.y,
        });
    }
    let mut positions = Vec::with_capacity(fields.len());
    let mut pos = start;
    for field in fields {
        match field.sample(pos) {
            Ok(d) => {
                pos += d;
                positions.push(pos);
            }
            Err(Error::OutOfHull { .. }) => {
                return Ok(Rollout {
                    positions,
                    truncated: true,
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Rollout {
        positions,
        truncated: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use alloc::vec;

    fn unit(grid: GridSpec, dir: Vec2, sigma: f32) -> DirectionField {
        let mut d = DirectionField::undefined(grid);
        for i in 0..grid.len() {
            d.mean.set(i, dir);
            d.sigma[i] = sigma;
        }
        d
    }

    #[test]
    fn fusion_endpoints_and_midpoint() {
        let grid = GridSpec::centered(4, 1.0);
        let a = unit(grid, Vec2::new(1.0, 0.0), 0.1);
        let b = unit(grid, Vec2::new(0.0, 1.0), 0.3);
        let ones = vec![1.0; grid.len()];
        assert_eq!(fuse_directions(&a, &b, &ones).unwrap(), a);
        let zeros = vec![0.0; grid.len()];
        assert_eq!(fuse_directions(&a, &b, &zeros).unwrap(), b);
        let half = fuse_directions(&a, &b, &vec![0.5; grid.len()]).unwrap();
        let m = half.mean.at(0);
        let h = core::f64::consts::FRAC_1_SQRT_2;
        assert!((m.x - h).abs() < 1e-7 && (m.y - h).abs() < 1e-7);
        assert!((half.sigma[0] - 0.2).abs() < 1e-7);
    }

    #[test]
    fn opposite_blend_is_undefined() {
        let grid = GridSpec::centered(2, 1.0);
        let a = unit(grid, Vec2::new(1.0, 0.0), 0.1);
        let b = unit(grid, Vec2::new(-1.0, 0.0), 0.1);
        let f = fuse_directions(&a, &b, &vec![0.5; grid.len()]).unwrap();
        assert!(!f.is_defined(0));
    }

    #[test]
    fn undefined_direction_leaves_only_force() {
        let grid = GridSpec::centered(3, 1.0);
        let o = DirectionField::undefined(grid);
        let f = VectorField::constant(grid, Vec2::new(0.25, -0.5));
        let s = SpeedProfile {
            mean: vec![1.3],
            sigma: vec![0.1],
        };
        let d = displacement_field(&o, &s, &f, 0).unwrap();
        assert_eq!(d, f);
        assert!(displacement_field(&o, &s, &f, 1).is_err());
    }

    #[test]
    fn constant_field_walks_straight() {
        let grid = GridSpec::centered(32, 1.0);
        let fields = vec![VectorField::constant(grid, Vec2::new(0.5, 0.0)); 6];
        let r = rollout(Vec2::ZERO, &fields).unwrap();
        assert!(!r.truncated);
        for (k, p) in r.positions.iter().enumerate() {
            assert_eq!(*p, Vec2::new(0.5 * (k + 1) as f64, 0.0));
        }
        let still = rollout(Vec2::new(1.0, 1.0), &vec![VectorField::zeros(grid); 4]).unwrap();
        assert!(still.positions.iter().all(|&p| p == Vec2::new(1.0, 1.0)));
    }

    #[test]
    fn leaving_the_hull_truncates() {
        let grid = GridSpec::centered(8, 1.0);
        let fields = vec![VectorField::constant(grid, Vec2::new(2.0, 0.0)); 6];
        let r = rollout(Vec2::ZERO, &fields).unwrap();
        assert!(r.truncated);
        assert_eq!(r.positions.len(), 2);
        assert_eq!(r.positions[1], Vec2::new(4.0, 0.0));
        assert!(rollout(Vec2::new(50.0, 0.0), &fields).is_err());
    }
}
