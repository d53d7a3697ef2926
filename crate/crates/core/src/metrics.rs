//! Displacement metrics and the constant-velocity reference.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::vec2::Vec2;

/// Average and final Euclidean error of two equally long position lists.
pub fn ade_fde(pred: &[Vec2], gt: &[Vec2]) -> Result<(f64, f64)> {
    if pred.len() != gt.len() {
        return Err(Error::LengthMismatch {
            expected: gt.len(),
            found: pred.len(),
        });
    }
    if gt.is_empty() {
        return Err(Error::invalid("ADE/FDE need at least one step"));
    }
    let errors: Vec<f64> = pred.iter().zip(gt).map(|(p, g)| p.distance(*g)).collect();
    Ok(summarize(&errors))
}

fn summarize(errors: &[f64]) -> (f64, f64) {
    (
        errors.iter().sum::<f64>() / errors.len() as f64,
        errors[errors.len() - 1],
    )
}

/// Per-step errors of a possibly truncated prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct StepErrors {
    pub errors: Vec<f64>,
    /// The prediction was shorter than the ground truth and its last
    /// position was held.
    pub held: bool,
}

impl StepErrors {
    /// Pads a short prediction by holding its last position (or `start` when
    /// it is empty) over the rest of the horizon.
    pub fn new(pred: &[Vec2], gt: &[Vec2], start: Vec2) -> Result<Self> {
        if pred.len() > gt.len() {
            return Err(Error::LengthMismatch {
                expected: gt.len(),
                found: pred.len(),
            });
        }
        if gt.is_empty() {
            return Err(Error::invalid("ADE/FDE need at least one step"));
        }
        let hold = pred.last().copied().unwrap_or(start);
        let errors = gt
            .iter()
            .enumerate()
            .map(|(i, g)| pred.get(i).copied().unwrap_or(hold).distance(*g))
            .collect();
        Ok(StepErrors {
            errors,
            held: pred.len() < gt.len(),
        })
    }

    pub fn ade(&self) -> f64 {
        summarize(&self.errors).0
    }

    pub fn fde(&self) -> f64 {
        summarize(&self.errors).1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestOfK {
    pub ade: f64,
    /// FDE of the minimum-ADE sample.
    pub fde: f64,
    pub index: usize,
}

/// Minimum ADE over the candidates and the FDE of that same candidate.
/// Ties keep the earliest candidate.
pub fn best_of_k(preds: &[Vec<Vec2>], gt: &[Vec2]) -> Result<BestOfK> {
    if preds.is_empty() {
        return Err(Error::invalid("best-of-K needs K >= 1"));
    }
    let mut best: Option<BestOfK> = None;
    for (index, p) in preds.iter().enumerate() {
        let (ade, fde) = ade_fde(p, gt)?;
        if best.is_none_or(|b| ade < b.ade) {
            best = Some(BestOfK { ade, fde, index });
        }
    }
    Ok(best.expect("non-empty"))
}

/// Constant-velocity extrapolation with the mean observed step.
pub fn linear_baseline(past: &[Vec2], pred_len: usize) -> Result<Vec<Vec2>> {
    if past.len() < 2 {
        return Err(Error::invalid(
            "linear baseline needs at least 2 observed points",
        ));
    }
    let last = past[past.len() - 1];
    let step = (last - past[0]) / (past.len() - 1) as f64;
    Ok((1..=pred_len).map(|k| last + step * k as f64).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizonMetric {
    pub seconds: f64,
    pub ade: f64,
    pub fde: f64,
}

/// Aggregated errors over a test set.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub ade: f64,
    pub fde: f64,
    pub per_horizon: Vec<HorizonMetric>,
    pub k_used: usize,
    pub sample_count: usize,
    /// Samples whose scored prediction was truncated and held.
    pub held_count: usize,
}

/// Running sums of per-step errors for [`MetricReport`].
#[derive(Debug, Clone, Default)]
pub struct MetricAccumulator {
    step_sums: Vec<f64>,
    prefix_means: Vec<f64>,
    count: usize,
    held: usize,
}

impl MetricAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, e: &StepErrors) -> Result<()> {
        if self.count == 0 {
            self.step_sums = vec![0.0; e.errors.len()];
            self.prefix_means = vec![0.0; e.errors.len()];
        } else if e.errors.len() != self.step_sums.len() {
            return Err(Error::LengthMismatch {
                expected: self.step_sums.len(),
                found: e.errors.len(),
            });
        }
        let mut running = 0.0;
        for (h, &err) in e.errors.iter().enumerate() {
            running += err;
            self.step_sums[h] += err;
            self.prefix_means[h] += running / (h + 1) as f64;
        }
        self.count += 1;
        self.held += e.held as usize;
        Ok(())
    }

    pub fn merge(&mut self, other: &MetricAccumulator) -> Result<()> {
        if other.count == 0 {
            return Ok(());
        }
        if self.count == 0 {
            *self = other.clone();
            return Ok(());
        }
        if other.step_sums.len() != self.step_sums.len() {
            return Err(Error::LengthMismatch {
                expected: self.step_sums.len(),
                found: other.step_sums.len(),
            });
        }
        for h in 0..self.step_sums.len() {
            self.step_sums[h] += other.step_sums[h];
            self.prefix_means[h] += other.prefix_means[h];
        }
        self.count += other.count;
        self.held += other.held;
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Report with every error divided by `scale` (5 for 1/5-resolution pixels).
    pub fn finish(&self, dt: f64, k_used: usize, scale: f64) -> MetricReport {
        let n = self.count.max(1) as f64 * scale;
        let per_horizon: Vec<HorizonMetric> = (0..self.step_sums.len())
            .map(|h| HorizonMetric {
                seconds: (h + 1) as f64 * dt,
                ade: self.prefix_means[h] / n,
                fde: self.step_sums[h] / n,
            })
            .collect();
        let (ade, fde) = per_horizon.last().map_or((0.0, 0.0), |m| (m.ade, m.fde));
        MetricReport {
            ade,
            fde,
            per_horizon,
            k_used,
            sample_count: self.count,
            held_count: self.held,
        }
    }
}
