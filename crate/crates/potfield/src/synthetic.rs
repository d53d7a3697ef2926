//! Synthetic pedestrian datasets with known motion models.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use potfield_core::geometry::ScenePatch;
use potfield_core::{GridSpec, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::format::FieldFile;
use crate::io;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Motion {
    /// Straight lines at constant speed.
    ConstantVelocity,
    /// Constant speed with a slowly drifting turn rate.
    Curved,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub scenes: usize,
    pub agents: usize,
    /// Points per agent.
    pub length: usize,
    pub seed: u64,
    pub motion: Motion,
    pub dt: f64,
    /// Frame ids advance by this much per time step.
    pub frame_stride: i64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            scenes: 3,
            agents: 12,
            length: 24,
            seed: 0,
            motion: Motion::ConstantVelocity,
            dt: 0.4,
            frame_stride: 10,
        }
    }
}

/// Agent tracks of one scene as `(agent_id, first_frame, positions)`.
pub fn generate_scene(spec: &SyntheticSpec, scene: usize) -> Vec<(i64, i64, Vec<Vec2>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(scene as u64);
    (0..spec.agents)
        .map(|a| {
            let start_step = rng.random_range(0..16i64);
            let origin = Vec2::new(rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0));
            let mut heading: f64 = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            let speed = rng.random_range(0.6..1.6) * spec.dt;
            let mut points = Vec::with_capacity(spec.length);
            match spec.motion {
                Motion::ConstantVelocity => {
                    let step = Vec2::new(heading.cos(), heading.sin()) * speed;
                    points.extend((0..spec.length).map(|i| origin + step * i as f64));
                }
                Motion::Curved => {
                    let mut rate = rng.random_range(-0.12..0.12);
                    let mut pos = origin;
                    points.push(pos);
                    for _ in 1..spec.length {
                        pos += Vec2::new(heading.cos(), heading.sin()) * speed;
                        points.push(pos);
                        rate = (rate + rng.random_range(-0.02..0.02f64)).clamp(-0.2, 0.2);
                        heading += rate;
                    }
                }
            }
            (a as i64 + 1, start_step * spec.frame_stride, points)
        })
        .collect()
}

/// Rows `frame agent x y`, sorted by frame then agent.
pub fn scene_text(spec: &SyntheticSpec, scene: usize) -> String {
    let mut rows: Vec<(i64, i64, Vec2)> = generate_scene(spec, scene)
        .into_iter()
        .flat_map(|(agent, first, pts)| {
            pts.into_iter()
                .enumerate()
                .map(move |(i, p)| (first + i as i64 * spec.frame_stride, agent, p))
        })
        .collect();
    rows.sort_by_key(|r| (r.0, r.1));
    let mut s = String::new();
    for (frame, agent, p) in rows {
        writeln!(s, "{frame} {agent} {:?} {:?}", p.x, p.y).expect("write to string");
    }
    s
}

/// A smooth gray texture over the scene extent, so that scene-similarity
/// lookups have something to compare.
pub fn scene_raster(spec: &SyntheticSpec, scene: usize) -> ScenePatch {
    let grid = GridSpec::new(160, 160, Vec2::new(-20.0, -20.0), 0.25).expect("valid grid");
    let phase = scene as f64 * 0.7 + spec.seed as f64 * 0.1;
    let data = (0..grid.len())
        .map(|i| {
            let (u, v) = grid.coords(i);
            let p = grid.pixel_center(u, v);
            (0.5 + 0.25 * (0.3 * p.x + phase).sin() + 0.25 * (0.2 * p.y - phase).cos()) as f32
        })
        .collect();
    ScenePatch::new(grid, 1, data).expect("sized data")
}

pub fn scene_name(scene: usize) -> String {
    format!("scene{scene:02}")
}

/// Writes `<name>.txt` per scene (and `<name>.pfld` rasters if asked) and
/// returns the trajectory file paths.
pub fn write_dataset(dir: &Path, spec: &SyntheticSpec, rasters: bool) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for s in 0..spec.scenes {
        let name = scene_name(s);
        let path = dir.join(format!("{name}.txt"));
        io::write_atomic(&path, scene_text(spec, s).as_bytes())?;
        if rasters {
            FieldFile::from_patch(&scene_raster(spec, s))
                .write(&dir.join(format!("{name}.pfld")))?;
        }
        out.push(path);
    }
    Ok(out)
}
