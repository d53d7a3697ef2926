//! `PFLD` raster files.
//!
//! Little-endian: magic `PFLD`, u32 version, u32 width, u32 height,
//! u32 channels, f64 origin_x, f64 origin_y, f64 resolution, row-major f32
//! data (channel-interleaved), row-major f32 mask.

use std::path::Path;

use potfield_core::estimators::DirectionField;
use potfield_core::geometry::ScenePatch;
use potfield_core::{GridSpec, ScalarField, Vec2, VectorField};

use super::{Reader, Writer};
use crate::error::{Error, Result};
use crate::io;

pub const MAGIC: &[u8; 4] = b"PFLD";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 * 4 + 3 * 8;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldFile {
    pub grid: GridSpec,
    pub channels: usize,
    pub data: Vec<f32>,
    pub mask: Vec<f32>,
}

impl FieldFile {
    pub fn new(grid: GridSpec, channels: usize, data: Vec<f32>, mask: Vec<f32>) -> Result<Self> {
        if channels == 0 {
            return Err(Error::Unsupported("field with zero channels".into()));
        }
        if data.len() != grid.len() * channels || mask.len() != grid.len() {
            return Err(Error::Core(potfield_core::Error::Shape(format!(
                "{}x{}x{} field with {} values and {} mask entries",
                grid.width,
                grid.height,
                channels,
                data.len(),
                mask.len()
            ))));
        }
        Ok(FieldFile {
            grid,
            channels,
            data,
            mask,
        })
    }

    pub fn from_scalar(field: &ScalarField) -> Self {
        FieldFile {
            grid: field.grid,
            channels: 1,
            data: field.data.clone(),
            mask: field.mask.clone(),
        }
    }

    /// Vector fields carry no band; the mask is all ones.
    pub fn from_vector(field: &VectorField) -> Self {
        FieldFile {
            grid: field.grid,
            channels: 2,
            data: field.data.iter().flatten().copied().collect(),
            mask: vec![1.0; field.grid.len()],
        }
    }

    /// Mean directions, masked to the pixels where the direction is defined.
    pub fn from_direction(field: &DirectionField) -> Self {
        let mut out = Self::from_vector(&field.mean);
        for (i, m) in out.mask.iter_mut().enumerate() {
            if !field.is_defined(i) {
                *m = potfield_core::LAMBDA;
            }
        }
        out
    }

    /// Per-pixel direction uncertainty; undefined pixels are off-band.
    pub fn from_direction_sigma(field: &DirectionField) -> Self {
        let grid = *field.grid();
        FieldFile {
            grid,
            channels: 1,
            data: field
                .sigma
                .iter()
                .map(|s| if s.is_finite() { *s } else { 0.0 })
                .collect(),
            mask: (0..grid.len())
                .map(|i| {
                    if field.is_defined(i) {
                        1.0
                    } else {
                        potfield_core::LAMBDA
                    }
                })
                .collect(),
        }
    }

    pub fn from_patch(patch: &ScenePatch) -> Self {
        FieldFile {
            grid: patch.grid,
            channels: patch.channels,
            data: patch.data.clone(),
            mask: vec![1.0; patch.grid.len()],
        }
    }

    pub fn into_scalar(self) -> Result<ScalarField> {
        if self.channels != 1 {
            return Err(Error::Unsupported(format!(
                "expected a 1-channel field, found {} channels",
                self.channels
            )));
        }
        Ok(ScalarField {
            grid: self.grid,
            data: self.data,
            mask: self.mask,
        })
    }

    pub fn into_vector(self) -> Result<VectorField> {
        if self.channels != 2 {
            return Err(Error::Unsupported(format!(
                "expected a 2-channel field, found {} channels",
                self.channels
            )));
        }
        Ok(VectorField {
            grid: self.grid,
            data: self.data.chunks_exact(2).map(|c| [c[0], c[1]]).collect(),
        })
    }

    /// The mask is dropped.
    pub fn into_patch(self) -> Result<ScenePatch> {
        Ok(ScenePatch::new(self.grid, self.channels, self.data)?)
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::with_capacity(HEADER_LEN + 4 * (self.data.len() + self.mask.len()));
        w.bytes(MAGIC);
        w.u32(VERSION);
        w.u32(self.grid.width as u32);
        w.u32(self.grid.height as u32);
        w.u32(self.channels as u32);
        w.f64(self.grid.origin.x);
        w.f64(self.grid.origin.y);
        w.f64(self.grid.resolution);
        self.data.iter().for_each(|&x| w.f32(x));
        self.mask.iter().for_each(|&x| w.f32(x));
        w.finish()
    }

    /// `name` labels error messages.
    pub fn decode(bytes: &[u8], name: &str) -> Result<Self> {
        let mut r = Reader::new(bytes, name);
        if r.take(4)? != MAGIC {
            return Err(Error::format(name, "not a PFLD file (bad magic)"));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::format(
                name,
                format!("unsupported PFLD version {version}"),
            ));
        }
        let width = r.u32()? as usize;
        let height = r.u32()? as usize;
        let channels = r.u32()? as usize;
        let origin = Vec2::new(r.f64()?, r.f64()?);
        let resolution = r.f64()?;
        if channels == 0 {
            return Err(Error::format(name, "zero channels"));
        }
        let grid = GridSpec::new(width, height, origin, resolution)
            .map_err(|e| Error::format(name, e.to_string()))?;
        let n = grid
            .len()
            .checked_mul(channels + 1)
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| Error::format(name, "field dimensions overflow"))?;
        if r.remaining() != n {
            return Err(Error::format(
                name,
                format!("expected {n} payload bytes, found {}", r.remaining()),
            ));
        }
        let data = (0..grid.len() * channels)
            .map(|_| r.f32())
            .collect::<Result<Vec<_>>>()?;
        let mask = (0..grid.len())
            .map(|_| r.f32())
            .collect::<Result<Vec<_>>>()?;
        Ok(FieldFile {
            grid,
            channels,
            data,
            mask,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::decode(&io::read(path)?, &path.display().to_string())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        io::write_atomic(path, &self.encode())
    }
}
