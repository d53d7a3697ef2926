//! Displacement fields and recurrent rollout.
//!
//! A prediction fuses the inertial and environmental direction fields, scales
//! them by the speed profile, adds the social force and walks the current
//! position through the resulting displacement field one step at a time.
//! Multi-modal predictions draw one direction-field realization and one speed
//! profile per mode from the per-pixel and per-step Gaussians. Mode 0 is
//! always the mean rollout.

mod rollout;
mod social;

pub use rollout::{displacement_field, fuse_directions, rollout, Rollout};
pub use social::{neighbor_field, social_force, NeighborState, SocialParams, COINCIDENT_DISTANCE};

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::estimators::{DirectionField, FieldEstimators, ForceField, SocialContext, SpeedProfile};
use crate::geometry::{canonicalize, crop_patch, CanonicalTransform, ScenePatch};
use crate::grid::{GridSpec, ScalarField, VectorField};
use crate::trajectory::TrajectorySample;
use crate::vec2::Vec2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictConfig {
    /// Canonical working grid.
    pub grid: GridSpec,
    pub pred_len: usize,
    /// Band width used for neighbor fields (world units).
    pub trajectory_width: f64,
    /// Number of modes, including the mean rollout.
    pub k: usize,
    pub seed: u64,
}

/// Mean rollout plus `K` modes (mode 0 equals the mean rollout).
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    pub single: Rollout,
    pub samples: Vec<Rollout>,
}

impl PredictionSet {
    pub fn k(&self) -> usize {
        self.samples.len()
    }

    pub fn map(&self, f: impl Fn(Vec2) -> Vec2 + Copy) -> PredictionSet {
        PredictionSet {
            single: self.single.map(f),
            samples: self.samples.iter().map(|r| r.map(f)).collect(),
        }
    }
}

/// Every intermediate field of one prediction, in the canonical frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldStack {
    pub environment: Option<ScalarField>,
    pub inertial: ScalarField,
    pub env_direction: DirectionField,
    pub inertial_direction: DirectionField,
    pub weight: Vec<f32>,
    pub direction: DirectionField,
    pub speed: SpeedProfile,
    pub neighbor_field: ScalarField,
    pub force: ForceField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// Predictions in world coordinates.
    pub world: PredictionSet,
    /// The same predictions in the canonical frame.
    pub canonical: PredictionSet,
    pub transform: CanonicalTransform,
    pub fields: FieldStack,
}

/// Builds the fields for one sample in its canonical frame.
///
/// `neighbors` are the neighbors' observed trajectories and `scene` an
/// optional world-referenced scene raster, both in world coordinates.
pub fn build_fields<E: FieldEstimators + ?Sized>(
    sample: &TrajectorySample,
    neighbors: &[Vec<Vec2>],
    scene: Option<&ScenePatch>,
    estimators: &E,
    cfg: &PredictConfig,
) -> Result<(TrajectorySample, CanonicalTransform, FieldStack)> {
    if sample.past.len() < 2 {
        return Err(Error::invalid(
            "prediction needs at least 2 observed points",
        ));
    }
    let grid = cfg.grid;
    let (canon, transform) = canonicalize(sample, &grid);
    let patch = scene.map(|s| crop_patch(s, &transform, &grid));

    let environment = estimators
        .environment(patch.as_ref(), &grid)
        .map_err(|e| e.at("environment"))?;
    let inertial = estimators
        .inertial(&canon.past, &grid, cfg.pred_len)
        .map_err(|e| e.at("inertial"))?;
    let env_direction = match &environment {
        Some(f) => estimators.env_direction(f),
        None => DirectionField::undefined(grid),
    };
    let inertial_direction = estimators.inertial_direction(&inertial);
    let weight = estimators.fuse_weight(&inertial_direction, &env_direction);
    let direction = fuse_directions(&inertial_direction, &env_direction, &weight)
        .map_err(|e| e.at("fusion"))?;
    let speed = estimators.speed(&inertial, &canon.past, cfg.pred_len);
    if speed.mean.len() != cfg.pred_len || speed.sigma.len() != cfg.pred_len {
        return Err(Error::LengthMismatch {
            expected: cfg.pred_len,
            found: speed.mean.len(),
        }
        .at("speed"));
    }

    let local: Vec<Vec<Vec2>> = neighbors
        .iter()
        .map(|past| past.iter().map(|&p| transform.forward(p)).collect())
        .collect();
    let neighbor_field =
        neighbor_field(&local, &grid, cfg.trajectory_width).map_err(|e| e.at("social"))?;
    let states: Vec<NeighborState> = local
        .iter()
        .filter_map(|p| NeighborState::from_past(p))
        .collect();
    let force = estimators
        .social(&SocialContext {
            neighbor_field: &neighbor_field,
            neighbors: &states,
            target: canon.current(),
        })
        .map_err(|e| e.at("social"))?;
    grid.ensure_same(&force.grid).map_err(|e| e.at("social"))?;

    Ok((
        canon,
        transform,
        FieldStack {
            environment,
            inertial,
            env_direction,
            inertial_direction,
            weight,
            direction,
            speed,
            neighbor_field,
            force,
        },
    ))
}

/// Rolls out the mean and `k - 1` sampled modes from `start` (canonical frame).
pub fn rollout_modes(
    start: Vec2,
    fields: &FieldStack,
    k: usize,
    seed: u64,
) -> Result<PredictionSet> {
    if k == 0 {
        return Err(Error::invalid("K must be >= 1"));
    }
    let single = rollout_with(start, &fields.direction, &fields.speed.mean, &fields.force)?;
    let mut samples = Vec::with_capacity(k);
    samples.push(single.clone());
    for j in 1..k {
        let mut rng = mode_rng(seed, j);
        let direction = sample_directions(&fields.direction, &mut rng);
        let speed = sample_speeds(&fields.speed, &mut rng);
        samples.push(rollout_with(start, &direction, &speed, &fields.force)?);
    }
    Ok(PredictionSet { single, samples })
}

/// Full single- and multi-modal prediction for one sample.
pub fn predict<E: FieldEstimators + ?Sized>(
    sample: &TrajectorySample,
    neighbors: &[Vec<Vec2>],
    scene: Option<&ScenePatch>,
    estimators: &E,
    cfg: &PredictConfig,
) -> Result<Prediction> {
    let (canon, transform, fields) = build_fields(sample, neighbors, scene, estimators, cfg)?;
    let canonical =
        rollout_modes(canon.current(), &fields, cfg.k, cfg.seed).map_err(|e| e.at("rollout"))?;
    let world = canonical.map(|p| transform.inverse(p));
    Ok(Prediction {
        world,
        canonical,
        transform,
        fields,
    })
}

fn rollout_with(
    start: Vec2,
    direction: &DirectionField,
    speed: &[f64],
    force: &ForceField,
) -> Result<Rollout> {
    let fields: Vec<VectorField> = speed
        .iter()
        .map(|&s| rollout::displacement_with(direction, s, force))
        .collect();
    rollout(start, &fields)
}

/// Independent stream per mode so that mode `j` does not depend on `K`.
fn mode_rng(seed: u64, mode: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(mode as u64);
    rng
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// One realization of the direction field: `mean + σ ε` renormalized, per
/// defined pixel.
fn sample_directions(field: &DirectionField, rng: &mut ChaCha8Rng) -> DirectionField {
    let mut out = field.clone();
    for i in 0..field.sigma.len() {
        if !field.is_defined(i) {
            continue;
        }
        let sigma = field.sigma[i] as f64;
        let (ex, ey) = (normal(rng), normal(rng));
        let mean = field.mean.at(i);
        if sigma > 0.0 {
            if let Some(unit) = (mean + Vec2::new(ex, ey) * sigma).normalized() {
                out.mean.set(i, unit);
            }
        }
    }
    out
}

/// `max(0, mean + σ ε)` per step.
fn sample_speeds(profile: &SpeedProfile, rng: &mut ChaCha8Rng) -> Vec<f64> {
    profile
        .mean
        .iter()
        .zip(&profile.sigma)
        .map(|(&m, &s)| {
            let e = normal(rng);
            if s > 0.0 {
                (m + s * e).max(0.0)
            } else {
                m
            }
        })
        .collect()
}
