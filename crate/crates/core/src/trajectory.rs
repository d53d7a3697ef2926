//! Trajectories, fixed-length samples and neighbor lookup.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::vec2::Vec2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedPoint {
    pub time_index: i64,
    pub pos: Vec2,
}

/// Time-stamped positions of one agent at a constant sampling interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub agent_id: i64,
    pub points: Vec<TimedPoint>,
    /// Sampling interval in seconds.
    pub dt: f64,
}

impl Trajectory {
    /// Validates stride-1 time indices, `dt > 0` and at least two points.
    pub fn new(agent_id: i64, points: Vec<TimedPoint>, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be > 0, got {dt}")));
        }
        if points.len() < 2 {
            return Err(Error::invalid(format!(
                "agent {agent_id}: trajectory needs at least 2 points, got {}",
                points.len()
            )));
        }
        if let Some(w) = points
            .windows(2)
            .find(|w| w[1].time_index != w[0].time_index + 1)
        {
            return Err(Error::invalid(format!(
                "agent {agent_id}: time index jumps from {} to {}",
                w[0].time_index, w[1].time_index
            )));
        }
        Ok(Trajectory {
            agent_id,
            points,
            dt,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn positions(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.points.iter().map(|p| p.pos)
    }
}

/// A window of `n` consecutive points split into `t` observed and `n - t` future ones.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub agent_id: i64,
    pub scene_id: String,
    /// Time index of the first observed point.
    pub start_time_index: i64,
    pub past: Vec<Vec2>,
    pub future: Vec<Vec2>,
}

impl TrajectorySample {
    /// Position at the last observed step.
    pub fn current(&self) -> Vec2 {
        *self.past.last().expect("sample has an observation")
    }

    /// Time index of the last observed step.
    pub fn current_time_index(&self) -> i64 {
        self.start_time_index + self.past.len() as i64 - 1
    }

    pub fn obs_len(&self) -> usize {
        self.past.len()
    }

    pub fn pred_len(&self) -> usize {
        self.future.len()
    }

    /// Observation followed by the future.
    pub fn full(&self) -> Vec<Vec2> {
        let mut all = Vec::with_capacity(self.past.len() + self.future.len());
        all.extend_from_slice(&self.past);
        all.extend_from_slice(&self.future);
        all
    }

    /// Stable identifier `<scene>:<agent>:<start>`.
    pub fn id(&self) -> String {
        format!(
            "{}:{}:{}",
            self.scene_id, self.agent_id, self.start_time_index
        )
    }

    pub fn map_points(&self, mut f: impl FnMut(Vec2) -> Vec2) -> TrajectorySample {
        TrajectorySample {
            agent_id: self.agent_id,
            scene_id: self.scene_id.clone(),
            start_time_index: self.start_time_index,
            past: self.past.iter().map(|&p| f(p)).collect(),
            future: self.future.iter().map(|&p| f(p)).collect(),
        }
    }
}

/// Cuts every window of `n` consecutive points, advancing by `stride`.
///
/// The first `t` points of each window are the observation. Trajectories
/// shorter than `n` yield nothing.
pub fn segment(
    traj: &Trajectory,
    scene_id: &str,
    t: usize,
    n: usize,
    stride: usize,
) -> Result<Vec<TrajectorySample>> {
    if t < 2 || n <= t {
        return Err(Error::invalid(format!("need n > t >= 2, got t={t} n={n}")));
    }
    if stride == 0 {
        return Err(Error::invalid("stride must be >= 1"));
    }
    if traj.len() < n {
        return Ok(Vec::new());
    }
    Ok((0..=traj.len() - n)
        .step_by(stride)
        .map(|start| {
            let window = &traj.points[start..start + n];
            TrajectorySample {
                agent_id: traj.agent_id,
                scene_id: String::from(scene_id),
                start_time_index: window[0].time_index,
                past: window[..t].iter().map(|p| p.pos).collect(),
                future: window[t..].iter().map(|p| p.pos).collect(),
            }
        })
        .collect())
}

/// Neighbors of a target agent at its current time.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborSet {
    pub target: TrajectorySample,
    /// Observed trajectories of the neighbors, aligned with the target's past.
    pub neighbors: Vec<Vec<Vec2>>,
    pub radius: f64,
}

/// Co-temporal samples (same scene, same current time index, other agent)
/// whose current position lies within `radius` of the target's.
pub fn find_neighbors(
    target: &TrajectorySample,
    all: &[TrajectorySample],
    radius: f64,
) -> NeighborSet {
    let now = target.current_time_index();
    let here = target.current();
    let neighbors = all
        .iter()
        .filter(|s| {
            s.agent_id != target.agent_id
                && s.scene_id == target.scene_id
                && s.current_time_index() == now
                && s.current().distance(here) <= radius
        })
        .map(|s| s.past.clone())
        .collect();
    NeighborSet {
        target: target.clone(),
        neighbors,
        radius,
    }
}
