//! Canonical left-to-right frame, scene patches and raster sampling.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField, VectorField};
use crate::trajectory::TrajectorySample;
use crate::vec2::{Rotation, Vec2};

/// Observation headings shorter than this (world units) are degenerate.
pub const MIN_HEADING_NORM: f64 = 0.05;

/// Rigid map from world coordinates into a sample's canonical frame:
/// `q = R(rotation) * (p - crop_center) + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalTransform {
    pub rotation: f64,
    pub translation: Vec2,
    pub crop_center: Vec2,
    pub is_degenerate: bool,
}

impl CanonicalTransform {
    pub fn identity() -> Self {
        CanonicalTransform {
            rotation: 0.0,
            translation: Vec2::ZERO,
            crop_center: Vec2::ZERO,
            is_degenerate: false,
        }
    }

    pub fn forward(&self, p: Vec2) -> Vec2 {
        Rotation::from_angle(self.rotation).apply(p - self.crop_center) + self.translation
    }

    pub fn inverse(&self, q: Vec2) -> Vec2 {
        Rotation::from_angle(-self.rotation).apply(q - self.translation) + self.crop_center
    }

    /// Rotates a free vector (velocity, displacement) into the canonical frame.
    pub fn forward_vector(&self, v: Vec2) -> Vec2 {
        Rotation::from_angle(self.rotation).apply(v)
    }

    pub fn inverse_vector(&self, v: Vec2) -> Vec2 {
        Rotation::from_angle(-self.rotation).apply(v)
    }
}

/// Heading of an observation: `x_t - x_1`, or the last step at least
/// [`MIN_HEADING_NORM`] long when the endpoints (nearly) coincide.
///
/// Returns the heading and whether the endpoint rule was degenerate.
pub fn observation_heading(past: &[Vec2]) -> (Option<Vec2>, bool) {
    let (Some(&first), Some(&last)) = (past.first(), past.last()) else {
        return (None, true);
    };
    let net = last - first;
    if net.norm() >= MIN_HEADING_NORM {
        return (Some(net), false);
    }
    let fallback = past
        .windows(2)
        .rev()
        .map(|w| w[1] - w[0])
        .find(|d| d.norm() >= MIN_HEADING_NORM);
    (fallback, true)
}

/// Rotates and translates a sample so that its observed heading points along
/// `+u` and its current position lands on the grid's center pixel.
pub fn canonicalize(
    sample: &TrajectorySample,
    grid: &GridSpec,
) -> (TrajectorySample, CanonicalTransform) {
    let (heading, is_degenerate) = observation_heading(&sample.past);
    let rotation = heading.map_or(0.0, |h| -h.angle());
    let transform = CanonicalTransform {
        rotation,
        translation: grid.center_world(),
        crop_center: sample.current(),
        is_degenerate,
    };
    (sample.map_points(|p| transform.forward(p)), transform)
}

/// Bird's-eye raster (`channels` = 1 gray or 3 color), channel-interleaved.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenePatch {
    pub grid: GridSpec,
    pub channels: usize,
    pub data: Vec<f32>,
}

impl ScenePatch {
    pub fn new(grid: GridSpec, channels: usize, data: Vec<f32>) -> Result<Self> {
        if channels == 0 {
            return Err(Error::Shape(
                "scene patch needs at least one channel".into(),
            ));
        }
        if data.len() != grid.len() * channels {
            return Err(Error::LengthMismatch {
                expected: grid.len() * channels,
                found: data.len(),
            });
        }
        Ok(ScenePatch {
            grid,
            channels,
            data,
        })
    }

    pub fn blank(grid: GridSpec, channels: usize) -> Self {
        ScenePatch {
            grid,
            channels,
            data: vec![0.0; grid.len() * channels],
        }
    }

    #[inline]
    pub fn value(&self, index: usize, channel: usize) -> f32 {
        self.data[index * self.channels + channel]
    }

    /// Per-pixel mean over channels.
    pub fn gray(&self) -> Vec<f32> {
        self.data
            .chunks_exact(self.channels)
            .map(|px| px.iter().sum::<f32>() / self.channels as f32)
            .collect()
    }

    /// Bilinear sample of every channel at a world position; pixels outside
    /// the raster count as zero.
    pub fn sample_zero_padded(&self, pos: Vec2, out: &mut [f32]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let (fu, fv) = self.grid.to_pixel(pos);
        let (u0, v0) = (libm::floor(fu), libm::floor(fv));
        let (tu, tv) = (fu - u0, fv - v0);
        let taps = [
            (u0, v0, (1.0 - tu) * (1.0 - tv)),
            (u0 + 1.0, v0, tu * (1.0 - tv)),
            (u0, v0 + 1.0, (1.0 - tu) * tv),
            (u0 + 1.0, v0 + 1.0, tu * tv),
        ];
        for (u, v, w) in taps {
            if w == 0.0
                || u < 0.0
                || v < 0.0
                || u >= self.grid.width as f64
                || v >= self.grid.height as f64
            {
                continue;
            }
            let i = self.grid.index(u as usize, v as usize);
            for (c, o) in out.iter_mut().enumerate() {
                *o += (w * self.value(i, c) as f64) as f32;
            }
        }
    }

    /// Resamples this patch onto `grid` through `world_of`, which maps a
    /// target pixel center to the source position to read.
    fn resample(&self, grid: &GridSpec, world_of: impl Fn(Vec2) -> Vec2) -> ScenePatch {
        let mut out = ScenePatch::blank(*grid, self.channels);
        let mut px = vec![0.0f32; self.channels];
        for v in 0..grid.height {
            for u in 0..grid.width {
                self.sample_zero_padded(world_of(grid.pixel_center(u, v)), &mut px);
                let i = grid.index(u, v) * self.channels;
                out.data[i..i + self.channels].copy_from_slice(&px);
            }
        }
        out
    }
}

/// Crops (and rotates) a world-referenced scene raster into a sample's
/// canonical grid.
pub fn crop_patch(
    world: &ScenePatch,
    transform: &CanonicalTransform,
    grid: &GridSpec,
) -> ScenePatch {
    world.resample(grid, |q| transform.inverse(q))
}

/// The eight `k * 45°` rotations (k = 0..7) of a square patch about its
/// center, with the given trajectories rotated alongside.
pub fn augment_rotations(
    scene: &ScenePatch,
    trajectories: &[Vec<Vec2>],
) -> Result<Vec<(ScenePatch, Vec<Vec<Vec2>>)>> {
    if scene.grid.width != scene.grid.height {
        return Err(Error::Shape(format!(
            "rotation augmentation needs a square patch, got {}x{}",
            scene.grid.width, scene.grid.height
        )));
    }
    let center = scene.grid.hull_center();
    Ok((0..8)
        .map(|k| {
            let rot = Rotation::eighth_turns(k);
            let inv = rot.inverse();
            let patch = if k == 0 {
                scene.clone()
            } else {
                scene.resample(&scene.grid, |q| inv.apply(q - center) + center)
            };
            let trajs = trajectories
                .iter()
                .map(|t| t.iter().map(|&p| rot.apply(p - center) + center).collect())
                .collect();
            (patch, trajs)
        })
        .collect())
}

/// Fields that support bilinear sampling at world positions.
pub trait BilinearSample {
    type Value;
    fn sample_at(&self, pos: Vec2) -> Result<Self::Value>;
}

impl BilinearSample for ScalarField {
    type Value = f64;
    fn sample_at(&self, pos: Vec2) -> Result<f64> {
        self.sample(pos)
    }
}

impl BilinearSample for VectorField {
    type Value = Vec2;
    fn sample_at(&self, pos: Vec2) -> Result<Vec2> {
        self.sample(pos)
    }
}

/// Bilinear interpolation of the four pixel centers around `pos`.
/// Positions outside the half-pixel hull give [`Error::OutOfHull`].
pub fn sample_bilinear<F: BilinearSample>(field: &F, pos: Vec2) -> Result<F::Value> {
    field.sample_at(pos)
}
