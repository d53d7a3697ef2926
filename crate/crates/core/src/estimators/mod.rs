//! Field estimators: the mappings from scenes, observations and neighbor
//! fields to potential, direction, speed and force fields.
//!
//! [`FieldEstimators`] is the interface the predictor drives. The serializable
//! [`EstimatorBundle`] implements it with the deterministic baselines in this
//! module; learned models can implement the trait directly.

mod direction;
mod environment;
mod fuse;
mod inertial;
mod loss;
mod speed;

pub use direction::gradient_direction;
pub use environment::{baseline_env_field, kernel_weights, KernelBank};
pub use fuse::fuse_weight_inverse_variance;
pub use inertial::baseline_inertial_field;
pub use loss::{direction_nll_loss, speed_nll_loss, NllLoss, SIGMA_CLAMP};
pub use speed::baseline_speed;

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Result;
use crate::geometry::ScenePatch;
use crate::grid::{GridSpec, ScalarField, VectorField};
use crate::predictor::{social_force, NeighborState, SocialParams};
use crate::vec2::Vec2;

/// Per-pixel unit motion direction with an isotropic standard deviation.
///
/// `mean` is a unit vector where the direction is defined and zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionField {
    pub mean: VectorField,
    pub sigma: Vec<f32>,
}

impl DirectionField {
    /// A field with no defined direction anywhere.
    pub fn undefined(grid: GridSpec) -> Self {
        DirectionField {
            mean: VectorField::zeros(grid),
            sigma: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.mean.grid
    }

    #[inline]
    pub fn is_defined(&self, index: usize) -> bool {
        let [x, y] = self.mean.data[index];
        x != 0.0 || y != 0.0
    }
}

/// Per-future-step speed (world units per step) with deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedProfile {
    pub mean: Vec<f64>,
    pub sigma: Vec<f64>,
}

/// Displacement-valued social pressure per pixel.
pub type ForceField = VectorField;

/// Inputs to the social mapping.
#[derive(Debug, Clone)]
pub struct SocialContext<'a> {
    /// Sum of the neighbors' observed potential fields.
    pub neighbor_field: &'a ScalarField,
    pub neighbors: &'a [NeighborState],
    /// Target position at the current time.
    pub target: Vec2,
}

pub trait FieldEstimators {
    /// Environmental potential field; `None` when no scene evidence is available.
    fn environment(
        &self,
        patch: Option<&ScenePatch>,
        grid: &GridSpec,
    ) -> Result<Option<ScalarField>>;
    /// Inertial potential field from the canonical observation.
    fn inertial(&self, past: &[Vec2], grid: &GridSpec, pred_len: usize) -> Result<ScalarField>;
    fn env_direction(&self, field: &ScalarField) -> DirectionField;
    fn inertial_direction(&self, field: &ScalarField) -> DirectionField;
    fn speed(&self, inertial: &ScalarField, past: &[Vec2], pred_len: usize) -> SpeedProfile;
    fn social(&self, ctx: &SocialContext<'_>) -> Result<ForceField>;
    /// Weight of the inertial direction field per pixel, in `[0, 1]`.
    fn fuse_weight(&self, inertial: &DirectionField, environment: &DirectionField) -> Vec<f32>;
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnvModel {
    Disabled,
    KernelBank(KernelBank),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InertialModel {
    /// Constant-velocity extrapolation with a band that widens from `width`
    /// to `spread * width` over the predicted part.
    ConstantVelocity { width: f64, spread: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DirectionModel {
    Gradient { sigma: f64, epsilon: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpeedModel {
    ConstantSpeed { sigma_floor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SocialModel {
    Disabled,
    Repulsion(SocialParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FuseModel {
    InverseVariance,
}

/// One model per mapping; the environment and inertial direction slots are
/// separate.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorBundle {
    pub environment: EnvModel,
    pub inertial: InertialModel,
    pub env_direction: DirectionModel,
    pub inertial_direction: DirectionModel,
    pub speed: SpeedModel,
    pub social: SocialModel,
    pub fuse: FuseModel,
}

impl EstimatorBundle {
    /// All-analytic bundle for a band width `width` (world units).
    pub fn analytic(width: f64) -> Self {
        let direction = DirectionModel::Gradient {
            sigma: 0.3,
            epsilon: 1e-6,
        };
        EstimatorBundle {
            environment: EnvModel::Disabled,
            inertial: InertialModel::ConstantVelocity { width, spread: 3.0 },
            env_direction: direction,
            inertial_direction: direction,
            speed: SpeedModel::ConstantSpeed { sigma_floor: 0.05 },
            social: SocialModel::Repulsion(SocialParams::default()),
            fuse: FuseModel::InverseVariance,
        }
    }
}

impl FieldEstimators for EstimatorBundle {
    fn environment(
        &self,
        patch: Option<&ScenePatch>,
        grid: &GridSpec,
    ) -> Result<Option<ScalarField>> {
        match (&self.environment, patch) {
            (EnvModel::KernelBank(bank), Some(p)) => {
                p.grid.ensure_same(grid)?;
                baseline_env_field(p, bank).map(Some)
            }
            _ => Ok(None),
        }
    }

    fn inertial(&self, past: &[Vec2], grid: &GridSpec, pred_len: usize) -> Result<ScalarField> {
        let InertialModel::ConstantVelocity { width, spread } = self.inertial;
        baseline_inertial_field(past, grid, pred_len, width, spread)
    }

    fn env_direction(&self, field: &ScalarField) -> DirectionField {
        let DirectionModel::Gradient { sigma, epsilon } = self.env_direction;
        gradient_direction(field, sigma, epsilon)
    }

    fn inertial_direction(&self, field: &ScalarField) -> DirectionField {
        let DirectionModel::Gradient { sigma, epsilon } = self.inertial_direction;
        gradient_direction(field, sigma, epsilon)
    }

    fn speed(&self, inertial: &ScalarField, past: &[Vec2], pred_len: usize) -> SpeedProfile {
        let SpeedModel::ConstantSpeed { sigma_floor } = self.speed;
        baseline_speed(inertial, past, pred_len, sigma_floor)
    }

    fn social(&self, ctx: &SocialContext<'_>) -> Result<ForceField> {
        match self.social {
            SocialModel::Disabled => Ok(VectorField::zeros(ctx.neighbor_field.grid)),
            SocialModel::Repulsion(params) => Ok(social_force(
                ctx.neighbors,
                &ctx.neighbor_field.grid,
                params,
                ctx.target,
            )),
        }
    }

    fn fuse_weight(&self, inertial: &DirectionField, environment: &DirectionField) -> Vec<f32> {
        match self.fuse {
            FuseModel::InverseVariance => fuse_weight_inverse_variance(inertial, environment),
        }
    }
}
