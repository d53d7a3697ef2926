//! Uniform raster grids with world georeferencing.
//!
//! Pixel `(u, v)` has its center at `origin + (u, v) * resolution`; `u` runs
//! along world `x`, `v` along world `y`. Storage is row-major (`v * width + u`).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::vec2::Vec2;
use crate::LAMBDA;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    /// World position of the center of pixel (0, 0).
    pub origin: Vec2,
    /// World units per pixel.
    pub resolution: f64,
}

impl GridSpec {
    pub fn new(width: usize, height: usize, origin: Vec2, resolution: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Shape(format!("empty grid {width}x{height}")));
        }
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::invalid(format!(
                "resolution must be > 0, got {resolution}"
            )));
        }
        if !origin.is_finite() {
            return Err(Error::invalid("grid origin must be finite"));
        }
        Ok(GridSpec {
            width,
            height,
            origin,
            resolution,
        })
    }

    /// Square grid whose center pixel `(size/2, size/2)` sits at the world origin.
    pub fn centered(size: usize, resolution: f64) -> Self {
        let half = (size / 2) as f64 * resolution;
        GridSpec {
            width: size,
            height: size,
            origin: Vec2::new(-half, -half),
            resolution,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, u: usize, v: usize) -> usize {
        debug_assert!(u < self.width && v < self.height);
        v * self.width + u
    }

    #[inline]
    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.width, index / self.width)
    }

    #[inline]
    pub fn pixel_center(&self, u: usize, v: usize) -> Vec2 {
        Vec2::new(
            self.origin.x + u as f64 * self.resolution,
            self.origin.y + v as f64 * self.resolution,
        )
    }

    /// Fractional pixel coordinates of a world position.
    #[inline]
    pub fn to_pixel(&self, pos: Vec2) -> (f64, f64) {
        (
            (pos.x - self.origin.x) / self.resolution,
            (pos.y - self.origin.y) / self.resolution,
        )
    }

    /// The pixel that canonical samples are centered on.
    pub fn center_pixel(&self) -> (usize, usize) {
        (self.width / 2, self.height / 2)
    }

    pub fn center_world(&self) -> Vec2 {
        let (u, v) = self.center_pixel();
        self.pixel_center(u, v)
    }

    /// Geometric center of the raster (the rotation center for patches).
    pub fn hull_center(&self) -> Vec2 {
        Vec2::new(
            self.origin.x + (self.width as f64 - 1.0) * 0.5 * self.resolution,
            self.origin.y + (self.height as f64 - 1.0) * 0.5 * self.resolution,
        )
    }

    /// Whether `pos` is inside the pixel-center hull extended by half a pixel.
    pub fn contains(&self, pos: Vec2) -> bool {
        let (fu, fv) = self.to_pixel(pos);
        fu >= -0.5 && fv >= -0.5 && fu <= self.width as f64 - 0.5 && fv <= self.height as f64 - 0.5
    }

    /// The four bilinear taps `(index, weight)` around `pos`.
    ///
    /// Inside the half-pixel margin the coordinates are clamped onto the
    /// outermost pixel centers.
    pub fn bilinear_taps(&self, pos: Vec2) -> Result<[(usize, f64); 4]> {
        if !self.contains(pos) {
            return Err(Error::OutOfHull { x: pos.x, y: pos.y });
        }
        let (fu, fv) = self.to_pixel(pos);
        let (u0, tu) = axis_tap(fu, self.width);
        let (v0, tv) = axis_tap(fv, self.height);
        let u1 = (u0 + 1).min(self.width - 1);
        let v1 = (v0 + 1).min(self.height - 1);
        Ok([
            (self.index(u0, v0), (1.0 - tu) * (1.0 - tv)),
            (self.index(u1, v0), tu * (1.0 - tv)),
            (self.index(u0, v1), (1.0 - tu) * tv),
            (self.index(u1, v1), tu * tv),
        ])
    }

    pub fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{}x{} @ ({}, {}) res {} vs {}x{} @ ({}, {}) res {}",
                self.width,
                self.height,
                self.origin.x,
                self.origin.y,
                self.resolution,
                other.width,
                other.height,
                other.origin.x,
                other.origin.y,
                other.resolution
            )))
        }
    }
}

fn axis_tap(f: f64, n: usize) -> (usize, f64) {
    if n == 1 {
        return (0, 0.0);
    }
    let f = f.clamp(0.0, (n - 1) as f64);
    let i = (libm::floor(f) as usize).min(n - 2);
    (i, f - i as f64)
}

/// Scalar raster with a training mask (`1` on written pixels, `λ` elsewhere).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: GridSpec,
    pub data: Vec<f32>,
    pub mask: Vec<f32>,
}

impl ScalarField {
    /// All-zero field with an empty band (mask `λ` everywhere).
    pub fn zeros(grid: GridSpec) -> Self {
        ScalarField {
            grid,
            data: vec![0.0; grid.len()],
            mask: vec![LAMBDA; grid.len()],
        }
    }

    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(usize, usize) -> f32) -> Self {
        let mut field = ScalarField::zeros(grid);
        for v in 0..grid.height {
            for u in 0..grid.width {
                let i = grid.index(u, v);
                field.data[i] = f(u, v);
                field.mask[i] = 1.0;
            }
        }
        field
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> f32 {
        self.data[self.grid.index(u, v)]
    }

    #[inline]
    pub fn on_band(&self, index: usize) -> bool {
        self.mask[index] == 1.0
    }

    pub fn band_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m == 1.0).count()
    }

    pub fn sample(&self, pos: Vec2) -> Result<f64> {
        let taps = self.grid.bilinear_taps(pos)?;
        Ok(taps.iter().map(|&(i, w)| w * self.data[i] as f64).sum())
    }
}

/// Two-channel raster of vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: GridSpec,
    pub data: Vec<[f32; 2]>,
}

impl VectorField {
    pub fn zeros(grid: GridSpec) -> Self {
        VectorField {
            grid,
            data: vec![[0.0; 2]; grid.len()],
        }
    }

    pub fn constant(grid: GridSpec, value: Vec2) -> Self {
        VectorField {
            grid,
            data: vec![[value.x as f32, value.y as f32]; grid.len()],
        }
    }

    #[inline]
    pub fn at(&self, index: usize) -> Vec2 {
        let [x, y] = self.data[index];
        Vec2::new(x as f64, y as f64)
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> Vec2 {
        self.at(self.grid.index(u, v))
    }

    #[inline]
    pub fn set(&mut self, index: usize, value: Vec2) {
        self.data[index] = [value.x as f32, value.y as f32];
    }

    pub fn sample(&self, pos: Vec2) -> Result<Vec2> {
        let taps = self.grid.bilinear_taps(pos)?;
        let mut acc = Vec2::ZERO;
        for &(i, w) in &taps {
            acc += self.at(i) * w;
        }
        Ok(acc)
    }
}
