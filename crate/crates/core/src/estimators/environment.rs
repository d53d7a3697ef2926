use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::ScenePatch;
use crate::grid::ScalarField;

/// Training pairs of canonical scene patches and their observed potential
/// fields, queried by raster similarity.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelBank {
    /// Number of nearest patches averaged per query.
    pub k: usize,
    pub pairs: Vec<(ScenePatch, ScalarField)>,
}

impl KernelBank {
    pub fn new(k: usize) -> Self {
        KernelBank {
            k,
            pairs: Vec::new(),
        }
    }
}

const WEIGHT_EPS: f64 = 1e-6;

/// Mean absolute difference between a gray raster and the gray of `patch`.
fn gray_distance(gray: &[f32], patch: &ScenePatch) -> f64 {
    let c = patch.channels;
    gray.iter()
        .zip(patch.data.chunks_exact(c))
        .map(|(x, px)| (*x as f64 - (px.iter().sum::<f32>() / c as f32) as f64).abs())
        .sum::<f64>()
        / gray.len().max(1) as f64
}

/// The `k` most similar bank entries and their weights `1 / (MAD + 1e-6)`,
/// most similar first. Ties keep bank order.
pub fn kernel_weights(scene: &ScenePatch, bank: &KernelBank) -> Result<Vec<(usize, f64)>> {
    if bank.pairs.is_empty() || bank.k == 0 {
        return Err(Error::Unfit("environment bank is empty".into()));
    }
    let query = scene.gray();
    let mut scored = Vec::with_capacity(bank.pairs.len());
    for (i, (patch, field)) in bank.pairs.iter().enumerate() {
        scene.grid.ensure_same(&patch.grid)?;
        scene.grid.ensure_same(&field.grid)?;
        scored.push((i, gray_distance(&query, patch)));
    }
    scored.sort_by(|a, b| a.1.total_cmp(&b.1));
    scored.truncate(bank.k);
    Ok(scored
        .into_iter()
        .map(|(i, d)| (i, 1.0 / (d + WEIGHT_EPS)))
        .collect())
}

/// Weighted average of the on-band values of the `k` nearest bank fields.
/// The band of the result is the union of the contributing bands.
pub fn baseline_env_field(scene: &ScenePatch, bank: &KernelBank) -> Result<ScalarField> {
    let weights = kernel_weights(scene, bank)?;
    let mut out = ScalarField::zeros(scene.grid);
    for px in 0..scene.grid.len() {
        let (mut num, mut den) = (0.0, 0.0);
        for &(i, w) in &weights {
            let field = &bank.pairs[i].1;
            if field.on_band(px) {
                num += w * field.data[px] as f64;
                den += w;
            }
        }
        if den > 0.0 {
            out.data[px] = (num / den) as f32;
            out.mask[px] = 1.0;
        }
    }
    Ok(out)
}
