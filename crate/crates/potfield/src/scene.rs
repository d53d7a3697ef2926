//! World-referenced scene rasters from PNG or `PFLD` files.

use std::path::Path;

use potfield_core::geometry::ScenePatch;
use potfield_core::{GridSpec, Vec2};

use crate::error::{Error, Result};
use crate::format::FieldFile;

/// Loads a scene raster. `PFLD` files carry their own georeferencing; PNG
/// pixels are `resolution` world units wide with the bottom-left pixel
/// centered at `origin`, channels scaled to [0, 1].
pub fn load_scene(path: &Path, origin: Vec2, resolution: f64) -> Result<ScenePatch> {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("pfld") => FieldFile::read(path)?.into_patch(),
        Some("png") => {
            let img = image::open(path)?.to_rgb8();
            let (w, h) = (img.width() as usize, img.height() as usize);
            let grid = GridSpec::new(w, h, origin, resolution)?;
            let mut data = vec![0.0f32; w * h * 3];
            for (x, y, px) in img.enumerate_pixels() {
                let v = h - 1 - y as usize;
                let i = grid.index(x as usize, v) * 3;
                for c in 0..3 {
                    data[i + c] = px.0[c] as f32 / 255.0;
                }
            }
            Ok(ScenePatch::new(grid, 3, data)?)
        }
        _ => Err(Error::Unsupported(format!(
            "scene raster {} must be .png or .pfld",
            path.display()
        ))),
    }
}
