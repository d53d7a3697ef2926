use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField, VectorField};
use crate::labeling::{label_potentials, rasterize_band};
use crate::vec2::Vec2;

/// Neighbor kinematics at the target's current time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborState {
    pub position: Vec2,
    /// Last observed step (world units per step).
    pub velocity: Vec2,
}

impl NeighborState {
    pub fn from_past(past: &[Vec2]) -> Option<Self> {
        let position = *past.last()?;
        let velocity = match past {
            [.., a, b] => *b - *a,
            _ => Vec2::ZERO,
        };
        Some(NeighborState { position, velocity })
    }
}

/// Exponential repulsion: decay length `range` and peak magnitude `strength`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SocialParams {
    pub range: f64,
    pub strength: f64,
}

impl Default for SocialParams {
    fn default() -> Self {
        SocialParams {
            range: 1.0,
            strength: 0.3,
        }
    }
}

/// Distances below this use the tie-break direction.
pub const COINCIDENT_DISTANCE: f64 = 1e-3;

/// `F(g) = Σ_c β exp(-|g - x_c| / ℓ) · unit(g - x_c)` over the neighbors.
///
/// On top of a neighbor the direction is the normal of its velocity on the
/// target's side of its path (the left normal if the velocity is zero or
/// the target lies on the path).
pub fn social_force(
    neighbors: &[NeighborState],
    grid: &GridSpec,
    params: SocialParams,
    target: Vec2,
) -> VectorField {
    let mut out = VectorField::zeros(*grid);
    if neighbors.is_empty() {
        return out;
    }
    let fallback: Vec<Vec2> = neighbors
        .iter()
        .map(|n| {
            let normal = n
                .velocity
                .normalized()
                .map_or(Vec2::new(0.0, 1.0), |v| v.perp());
            if normal.dot(target - n.position) < 0.0 {
                -normal
            } else {
                normal
            }
        })
        .collect();
    for v in 0..grid.height {
        for u in 0..grid.width {
            let g = grid.pixel_center(u, v);
            let mut f = Vec2::ZERO;
            for (n, &tie) in neighbors.iter().zip(&fallback) {
                let away = g - n.position;
                let d = away.norm();
                let dir = if d < COINCIDENT_DISTANCE {
                    tie
                } else {
                    away / d
                };
                f += dir * (params.strength * libm::exp(-d / params.range));
            }
            out.set(grid.index(u, v), f);
        }
    }
    out
}

/// Pixel-wise sum of the neighbors' observed potential fields, band = union.
/// Stationary neighbors contribute nothing.
pub fn neighbor_field(neighbors: &[Vec<Vec2>], grid: &GridSpec, width: f64) -> Result<ScalarField> {
    let mut out = ScalarField::zeros(*grid);
    for past in neighbors {
        if past.len() < 2 {
            continue;
        }
        let label = match label_potentials(past) {
            Ok(l) => l,
            Err(Error::DegenerateLabel) => continue,
            Err(e) => return Err(e),
        };
        let widths = alloc::vec![width; past.len()];
        let field = rasterize_band(past, &label, grid, &widths)?;
        for i in 0..grid.len() {
            if field.on_band(i) {
                out.data[i] += field.data[i];
                out.mask[i] = 1.0;
            }
        }
    }
    Ok(out)
}
