//! Inverse potential labeling of trajectories and band rasterization.
//!
//! A trajectory is read as a charge sliding down a potential: the potential
//! drop across a segment is proportional to the squared segment length, and
//! the first and last points are pinned to `+1` and `-1`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField};
use crate::vec2::Vec2;

/// Potential values along a trajectory together with its segment lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialLabel {
    /// One value per point; first is `+1`, last is `-1`.
    pub values: Vec<f64>,
    /// `distances[i] = |x[i+1] - x[i]|`.
    pub distances: Vec<f64>,
}

impl PotentialLabel {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Closed-form potential values for an ordered point list.
///
/// `p[i] = (E_after(i) - E_before(i)) / E_total` where `E` sums squared
/// segment lengths. Endpoints are assigned exactly.
pub fn label_potentials(points: &[Vec2]) -> Result<PotentialLabel> {
    if points.len() < 2 {
        return Err(Error::invalid("labeling needs at least 2 points"));
    }
    let distances: Vec<f64> = points.windows(2).map(|w| w[0].distance(w[1])).collect();
    let total: f64 = distances.iter().map(|d| d * d).sum();
    if !total.is_finite() || total <= 0.0 {
        return Err(Error::DegenerateLabel);
    }
    let mut values = Vec::with_capacity(points.len());
    let mut before = 0.0;
    for d in &distances {
        values.push((total - 2.0 * before) / total);
        before += d * d;
    }
    values.push(-1.0);
    values[0] = 1.0;
    Ok(PotentialLabel { values, distances })
}

/// Cross-multiplied residual of the triplet ratio identity for `i < j < k`
/// (0-based point indices):
/// `|(p_i - p_j) * E(j..k) - (p_j - p_k) * E(i..j)|`.
pub fn verify_triplet_ratio(label: &PotentialLabel, i: usize, j: usize, k: usize) -> Result<f64> {
    if !(i < j && j < k && k < label.len()) {
        return Err(Error::invalid(alloc::format!(
            "triplet ({i}, {j}, {k}) must satisfy i < j < k < {}",
            label.len()
        )));
    }
    let energy = |a: usize, b: usize| label.distances[a..b].iter().map(|d| d * d).sum::<f64>();
    let p = &label.values;
    Ok(((p[i] - p[j]) * energy(j, k) - (p[j] - p[k]) * energy(i, j)).abs())
}

/// Rasterizes a labeled polyline into a band of width `width` (world units).
///
/// Every pixel whose center lies within `width / 2` of the polyline takes
/// the potential of its nearest polyline point, interpolated linearly along
/// the segment. All points must lie inside the grid hull.
pub fn rasterize(
    points: &[Vec2],
    label: &PotentialLabel,
    grid: &GridSpec,
    width: f64,
) -> Result<ScalarField> {
    if width.is_nan() || width <= 0.0 {
        return Err(Error::invalid("trajectory width must be > 0"));
    }
    let outside: Vec<usize> = points
        .iter()
        .enumerate()
        .filter(|(_, p)| !grid.contains(**p))
        .map(|(i, _)| i)
        .collect();
    if !outside.is_empty() {
        return Err(Error::OutOfBounds { indices: outside });
    }
    rasterize_band(points, label, grid, &vec![width; points.len()])
}

/// Band rasterization with a per-vertex width, clipped to the grid.
///
/// The half-width varies linearly along each segment. Points may lie outside
/// the grid; only pixels inside it are written.
pub fn rasterize_band(
    points: &[Vec2],
    label: &PotentialLabel,
    grid: &GridSpec,
    widths: &[f64],
) -> Result<ScalarField> {
    if points.len() != label.len() {
        return Err(Error::LengthMismatch {
            expected: points.len(),
            found: label.len(),
        });
    }
    if widths.len() != points.len() {
        return Err(Error::LengthMismatch {
            expected: points.len(),
            found: widths.len(),
        });
    }
    let mut field = ScalarField::zeros(*grid);
    let mut best = vec![f64::INFINITY; grid.len()];
    let slack = 1e-9 * grid.resolution;
    for s in 0..points.len() - 1 {
        let (a, b) = (points[s], points[s + 1]);
        let (pa, pb) = (label.values[s], label.values[s + 1]);
        let (ha, hb) = (0.5 * widths[s], 0.5 * widths[s + 1]);
        let reach = ha.max(hb);
        let ab = b - a;
        let len_sq = ab.norm_sq();

        let (fu0, fv0) = grid.to_pixel(Vec2::new(a.x.min(b.x) - reach, a.y.min(b.y) - reach));
        let (fu1, fv1) = grid.to_pixel(Vec2::new(a.x.max(b.x) + reach, a.y.max(b.y) + reach));
        let Some((u0, u1)) = pixel_span(fu0, fu1, grid.width) else {
            continue;
        };
        let Some((v0, v1)) = pixel_span(fv0, fv1, grid.height) else {
            continue;
        };

        for v in v0..=v1 {
            for u in u0..=u1 {
                let c = grid.pixel_center(u, v);
                let t = if len_sq > 0.0 {
                    ((c - a).dot(ab) / len_sq).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                let dist = c.distance(a + ab * t);
                let half = ha + t * (hb - ha);
                let i = grid.index(u, v);
                if dist <= half + slack && dist < best[i] {
                    best[i] = dist;
                    field.data[i] = (pa + t * (pb - pa)) as f32;
                    field.mask[i] = 1.0;
                }
            }
        }
    }
    Ok(field)
}

fn pixel_span(lo: f64, hi: f64, n: usize) -> Option<(usize, usize)> {
    let lo = libm::ceil(lo - 1e-9).max(0.0);
    let hi = libm::floor(hi + 1e-9).min(n as f64 - 1.0);
    if hi < lo {
        None
    } else {
        Some((lo as usize, hi as usize))
    }
}

/// Norm used by [`masked_field_loss`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossNorm {
    /// Sum of absolute masked residuals.
    #[default]
    L1,
    /// Sum of squared masked residuals.
    SquaredL2,
}

/// `Σ_s ‖M_s · (P_s − pred)‖` over every truth field `s`.
pub fn masked_field_loss(
    pred: &ScalarField,
    truths: &[ScalarField],
    norm: LossNorm,
) -> Result<f64> {
    let mut total = 0.0;
    for truth in truths {
        pred.grid.ensure_same(&truth.grid)?;
        for ((&p, &t), &m) in pred.data.iter().zip(&truth.data).zip(&truth.mask) {
            let r = m as f64 * (t as f64 - p as f64);
            total += match norm {
                LossNorm::L1 => r.abs(),
                LossNorm::SquaredL2 => r * r,
            };
        }
    }
    Ok(total)
}
