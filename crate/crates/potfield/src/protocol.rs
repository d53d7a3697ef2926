//! Leave-one-out and split evaluation over a directory of scenes.

use std::fmt::Write as _;
use std::path::Path;

use potfield_core::estimators::{baseline_env_field, EnvModel, EstimatorBundle, KernelBank};
use potfield_core::geometry::{
    augment_rotations, crop_patch, CanonicalTransform, ScenePatch, MIN_HEADING_NORM,
};
use potfield_core::labeling::{label_potentials, masked_field_loss, rasterize_band};
use potfield_core::metrics::{linear_baseline, MetricAccumulator, MetricReport, StepErrors};
use potfield_core::predictor::{predict, Prediction};
use potfield_core::seed::sample_seed;
use potfield_core::trajectory::{find_neighbors, Trajectory, TrajectorySample};
use potfield_core::{ScalarField, Vec2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{BundleSource, Model, Protocol, RunConfig};
use crate::error::{Error, Result};
use crate::format::read_bundle;
use crate::ingest::{neighbor_candidates, parse_trajectory_file, segment_all};
use crate::io;
use crate::scene::load_scene;

/// One scene of a dataset: its trajectories and optional raster.
#[derive(Debug, Clone)]
pub struct Scene {
    pub name: String,
    pub trajectories: Vec<Trajectory>,
    pub raster: Option<ScenePatch>,
}

impl Scene {
    pub fn samples(&self, cfg: &RunConfig) -> Result<Vec<TrajectorySample>> {
        segment_all(
            &self.trajectories,
            &self.name,
            cfg.obs_len,
            cfg.pred_len,
            cfg.stride,
        )
    }
}

/// Every `*.txt` trajectory file of `dir` in name order; `<stem>.pfld` or
/// `<stem>.png` next to it is the scene raster.
pub fn load_dataset(dir: &Path, cfg: &RunConfig) -> Result<Vec<Scene>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for e in entries {
        let path = e.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|x| x == "txt") {
            files.push(path);
        }
    }
    files.sort();
    let origin = Vec2::new(cfg.scene_origin.0, cfg.scene_origin.1);
    files
        .iter()
        .map(|path| {
            let name = path
                .file_stem()
                .expect("has extension")
                .to_string_lossy()
                .into_owned();
            let raster = ["pfld", "png"]
                .iter()
                .map(|ext| path.with_extension(ext))
                .find(|p| p.is_file())
                .map(|p| load_scene(&p, origin, cfg.scene_resolution))
                .transpose()?;
            Ok(Scene {
                trajectories: parse_trajectory_file(path, cfg.dt)?,
                name,
                raster,
            })
        })
        .collect()
}

/// Newline-separated scene ids; blank lines and `#` comments ignored.
pub fn read_split(path: &Path) -> Result<Vec<String>> {
    Ok(io::read_to_string(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect())
}

pub fn write_split(path: &Path, test_ids: &[String]) -> Result<()> {
    let mut s = String::new();
    for id in test_ids {
        s.push_str(id);
        s.push('\n');
    }
    io::write_atomic(path, s.as_bytes())
}

/// Seeded random choice of test scenes; `train_ratio` of the scenes (rounded,
/// at least one left for testing) are kept for training. Returned in name order.
pub fn make_split(names: &[String], train_ratio: f64, seed: u64) -> Vec<String> {
    if names.is_empty() {
        return Vec::new();
    }
    let mut sorted = names.to_vec();
    sorted.sort();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sorted.shuffle(&mut rng);
    let n_test =
        ((names.len() as f64 * (1.0 - train_ratio)).round() as usize).clamp(1, names.len());
    let mut test = sorted[..n_test].to_vec();
    test.sort();
    test
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fold {
    pub name: String,
    pub test: Vec<usize>,
    pub train: Vec<usize>,
}

pub fn folds(cfg: &RunConfig, scenes: &[Scene]) -> Result<Vec<Fold>> {
    let index_of = |name: &str| scenes.iter().position(|s| s.name == name);
    let all: Vec<usize> = (0..scenes.len()).collect();
    let fold_for = |name: String, test: Vec<usize>| Fold {
        name,
        train: all.iter().copied().filter(|i| !test.contains(i)).collect(),
        test,
    };
    match cfg.protocol {
        Protocol::LeaveOneOut => match &cfg.test_scene {
            Some(name) => {
                let i = index_of(name).ok_or_else(|| {
                    Error::Config(vec![format!("test_scene {name:?} is not in the dataset")])
                })?;
                Ok(vec![fold_for(name.clone(), vec![i])])
            }
            None => Ok(scenes
                .iter()
                .enumerate()
                .map(|(i, s)| fold_for(s.name.clone(), vec![i]))
                .collect()),
        },
        Protocol::Split => {
            let path = cfg.path("split_file")?;
            let ids = read_split(path)?;
            let missing: Vec<String> = ids
                .iter()
                .filter(|id| index_of(id).is_none())
                .map(|id| format!("split file {} names unknown scene {id:?}", path.display()))
                .collect();
            if !missing.is_empty() {
                return Err(Error::Config(missing));
            }
            if ids.is_empty() {
                return Err(Error::Config(vec![format!(
                    "split file {} is empty",
                    path.display()
                )]));
            }
            let test = ids
                .iter()
                .map(|id| index_of(id).expect("checked"))
                .collect();
            Ok(vec![fold_for("test".into(), test)])
        }
    }
}

/// Training pair for the environment bank: the scene around the sample's
/// current position, rotated in 45° steps until the sample's heading points
/// closest to `+u`, with the labeled full sample in the same frame.
fn bank_pair(
    sample: &TrajectorySample,
    raster: &ScenePatch,
    cfg: &RunConfig,
) -> Result<Option<(ScenePatch, ScalarField)>> {
    let heading = sample.current() - sample.past[0];
    if heading.norm() < MIN_HEADING_NORM {
        return Ok(None);
    }
    let grid = cfg.grid();
    let transform = CanonicalTransform {
        rotation: 0.0,
        translation: grid.center_world(),
        crop_center: sample.current(),
        is_degenerate: false,
    };
    let patch = crop_patch(raster, &transform, &grid);
    let full: Vec<Vec2> = sample
        .full()
        .into_iter()
        .map(|p| transform.forward(p))
        .collect();
    let rotations = augment_rotations(&patch, &[full])?;
    let obs = sample.past.len();
    let (patch, trajs) = rotations
        .into_iter()
        .max_by(|a, b| {
            let along = |t: &Vec<Vec2>| {
                let h = t[obs - 1] - t[0];
                h.x / h.norm()
            };
            // earliest rotation wins ties
            along(&a.1[0])
                .total_cmp(&along(&b.1[0]))
                .then(std::cmp::Ordering::Greater)
        })
        .expect("eight rotations");
    let points = &trajs[0];
    let label = match label_potentials(points) {
        Ok(l) => l,
        Err(potfield_core::Error::DegenerateLabel) => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let field = rasterize_band(
        points,
        &label,
        &grid,
        &vec![cfg.width_world(); points.len()],
    )?;
    Ok(Some((patch, field)))
}

/// `n` evenly spread indices out of `len`.
fn spread(len: usize, n: usize) -> Vec<usize> {
    if n >= len {
        return (0..len).collect();
    }
    (0..n).map(|i| i * len / n).collect()
}

/// Off-band mask entries set to `lambda`.
pub fn with_lambda(mut field: ScalarField, lambda: f32) -> ScalarField {
    field
        .mask
        .iter_mut()
        .filter(|m| **m != 1.0)
        .for_each(|m| *m = lambda);
    field
}

#[derive(Debug, Clone)]
pub struct BankFit {
    pub bank: KernelBank,
    /// Mean masked field loss on the held-out tenth of the pairs, when there
    /// are enough pairs to hold some out.
    pub validation_loss: Option<f64>,
}

/// Kernel bank from the training scenes that have rasters (`None` if none do).
pub fn fit_bank(train: &[&Scene], cfg: &RunConfig) -> Result<Option<BankFit>> {
    let mut candidates = Vec::new();
    for scene in train {
        if let Some(raster) = &scene.raster {
            for s in scene.samples(cfg)? {
                candidates.push((s, raster));
            }
        }
    }
    if candidates.is_empty() || cfg.bank_size == 0 {
        return Ok(None);
    }
    let chosen = spread(candidates.len(), cfg.bank_size);
    let pairs: Vec<(ScenePatch, ScalarField)> = chosen
        .par_iter()
        .map(|&i| bank_pair(&candidates[i].0, candidates[i].1, cfg))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    if pairs.is_empty() {
        return Ok(None);
    }

    let held = pairs.len() / 10;
    let validation_loss = if held > 0 {
        let mut bank = KernelBank::new(cfg.env_k);
        bank.pairs = pairs[..pairs.len() - held].to_vec();
        let losses = pairs[pairs.len() - held..]
            .par_iter()
            .map(|(scene, truth)| {
                let pred = baseline_env_field(scene, &bank)?;
                let truth = with_lambda(truth.clone(), cfg.lambda);
                Ok(masked_field_loss(&pred, &[truth], cfg.loss_norm)?)
            })
            .collect::<Result<Vec<f64>>>()?;
        Some(losses.iter().sum::<f64>() / losses.len() as f64)
    } else {
        None
    };
    let mut bank = KernelBank::new(cfg.env_k);
    bank.pairs = pairs;
    Ok(Some(BankFit {
        bank,
        validation_loss,
    }))
}

/// The configured bundle: a bundle file as is, or the analytic estimators
/// plus an environment bank fitted on `train`.
pub fn build_bundle(cfg: &RunConfig, train: &[&Scene]) -> Result<EstimatorBundle> {
    match &cfg.bundle {
        BundleSource::File(path) => read_bundle(path),
        BundleSource::Analytic => {
            let mut bundle = cfg.analytic_bundle();
            if let Some(fit) = fit_bank(train, cfg)? {
                bundle.environment = EnvModel::KernelBank(fit.bank);
            }
            Ok(bundle)
        }
    }
}

/// Everything needed to predict the samples of one scene.
pub struct SceneContext<'a> {
    pub candidates: Vec<TrajectorySample>,
    pub raster: Option<&'a ScenePatch>,
}

impl<'a> SceneContext<'a> {
    pub fn new(
        trajectories: &[Trajectory],
        scene_id: &str,
        raster: Option<&'a ScenePatch>,
        cfg: &RunConfig,
    ) -> Result<Self> {
        Ok(SceneContext {
            candidates: neighbor_candidates(trajectories, scene_id, cfg.obs_len)?,
            raster,
        })
    }

    /// Pipeline prediction with the per-sample seed derived from `cfg.seed`.
    pub fn predict(
        &self,
        sample: &TrajectorySample,
        bundle: &EstimatorBundle,
        cfg: &RunConfig,
    ) -> Result<Prediction> {
        let neighbors = find_neighbors(sample, &self.candidates, cfg.neighbor_radius).neighbors;
        let seed = sample_seed(cfg.seed, &sample.id());
        predict(
            sample,
            &neighbors,
            self.raster,
            bundle,
            &cfg.predict_config(seed),
        )
        .map_err(|e| Error::Sample {
            id: sample.id(),
            source: Box::new(e.into()),
        })
    }
}

/// Errors of the scored predictions of one sample.
pub struct SampleScore {
    pub single: StepErrors,
    /// Minimum-ADE mode (pipeline only).
    pub best: Option<StepErrors>,
}

pub fn score_sample(
    sample: &TrajectorySample,
    ctx: &SceneContext<'_>,
    bundle: &EstimatorBundle,
    cfg: &RunConfig,
) -> Result<SampleScore> {
    let start = sample.current();
    let gt = &sample.future;
    match cfg.model {
        Model::Oracle => Ok(SampleScore {
            single: StepErrors::new(gt, gt, start)?,
            best: None,
        }),
        Model::Linear => Ok(SampleScore {
            single: StepErrors::new(&linear_baseline(&sample.past, cfg.pred_len)?, gt, start)?,
            best: None,
        }),
        Model::Pipeline => {
            let pred = ctx.predict(sample, bundle, cfg)?;
            let single = StepErrors::new(&pred.world.single.positions, gt, start)?;
            let mut best: Option<StepErrors> = None;
            for mode in &pred.world.samples {
                let e = StepErrors::new(&mode.positions, gt, start)?;
                if best.as_ref().is_none_or(|b| e.ade() < b.ade()) {
                    best = Some(e);
                }
            }
            Ok(SampleScore { single, best })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldReport {
    pub name: String,
    pub single: MetricReport,
    pub best: Option<MetricReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolReport {
    pub model: Model,
    pub protocol: Protocol,
    pub k: usize,
    pub scale: f64,
    pub folds: Vec<FoldReport>,
}

/// Fits on each fold's training scenes and scores its test samples.
pub fn run_protocol(cfg: &RunConfig, scenes: &[Scene]) -> Result<ProtocolReport> {
    let mut reports = Vec::new();
    for fold in folds(cfg, scenes)? {
        let train: Vec<&Scene> = fold.train.iter().map(|&i| &scenes[i]).collect();
        let bundle = match cfg.model {
            Model::Pipeline => build_bundle(cfg, &train)?,
            _ => cfg.analytic_bundle(),
        };
        let mut single = MetricAccumulator::new();
        let mut best = MetricAccumulator::new();
        for &i in &fold.test {
            let scene = &scenes[i];
            let ctx =
                SceneContext::new(&scene.trajectories, &scene.name, scene.raster.as_ref(), cfg)?;
            let scores = scene
                .samples(cfg)?
                .par_iter()
                .map(|s| score_sample(s, &ctx, &bundle, cfg))
                .collect::<Result<Vec<_>>>()?;
            for s in &scores {
                single.add(&s.single)?;
                if let Some(b) = &s.best {
                    best.add(b)?;
                }
            }
        }
        let scale = cfg.metric_scale();
        reports.push(FoldReport {
            name: fold.name,
            single: single.finish(cfg.dt, 1, scale),
            best: (cfg.model == Model::Pipeline).then(|| best.finish(cfg.dt, cfg.k, scale)),
        });
    }
    Ok(ProtocolReport {
        model: cfg.model,
        protocol: cfg.protocol,
        k: cfg.k,
        scale: cfg.metric_scale(),
        folds: reports,
    })
}

impl ProtocolReport {
    /// Unweighted mean over folds with at least one sample.
    pub fn average(&self, best: bool) -> Option<(f64, f64)> {
        let rows: Vec<&MetricReport> = self
            .folds
            .iter()
            .filter_map(|f| {
                if best {
                    f.best.as_ref()
                } else {
                    Some(&f.single)
                }
            })
            .filter(|r| r.sample_count > 0)
            .collect();
        if rows.is_empty() {
            return None;
        }
        let n = rows.len() as f64;
        Some((
            rows.iter().map(|r| r.ade).sum::<f64>() / n,
            rows.iter().map(|r| r.fde).sum::<f64>() / n,
        ))
    }

    fn rows(&self) -> Vec<(&str, &'static str, &MetricReport)> {
        let mut rows = Vec::new();
        for f in &self.folds {
            rows.push((f.name.as_str(), "single", &f.single));
            if let Some(b) = &f.best {
                rows.push((f.name.as_str(), "best", b));
            }
        }
        rows
    }

    /// Aligned table followed by `key=value` lines.
    pub fn to_text(&self) -> String {
        let model = match self.model {
            Model::Pipeline => "pipeline",
            Model::Linear => "linear",
            Model::Oracle => "oracle",
        };
        let protocol = match self.protocol {
            Protocol::LeaveOneOut => "loo",
            Protocol::Split => "split",
        };
        let mut s = String::new();
        let w = &mut s;
        writeln!(
            w,
            "# model={model} protocol={protocol} K={} scale=1/{}",
            self.k, self.scale
        )
        .unwrap();
        writeln!(w, "# best-of-K FDE is the FDE of the minimum-ADE sample; truncated rollouts hold their last position").unwrap();
        let name_w = self
            .folds
            .iter()
            .map(|f| f.name.len())
            .max()
            .unwrap_or(0)
            .max(7);
        writeln!(
            w,
            "{:<name_w$}  {:<6}  {:>3}  {:>7}  {:>5}  {:>8}  {:>8}",
            "scene", "mode", "K", "samples", "held", "ADE", "FDE"
        )
        .unwrap();
        for (name, mode, r) in self.rows() {
            writeln!(
                w,
                "{:<name_w$}  {:<6}  {:>3}  {:>7}  {:>5}  {:>8.4}  {:>8.4}",
                name, mode, r.k_used, r.sample_count, r.held_count, r.ade, r.fde
            )
            .unwrap();
        }
        let averages: Vec<(&str, (f64, f64))> = [
            ("single", self.average(false)),
            ("best", self.average(true)),
        ]
        .into_iter()
        .filter_map(|(m, a)| a.map(|a| (m, a)))
        .collect();
        if self.folds.len() > 1 {
            for (mode, (ade, fde)) in &averages {
                writeln!(
                    w,
                    "{:<name_w$}  {:<6}  {:>3}  {:>7}  {:>5}  {:>8.4}  {:>8.4}",
                    "average", mode, "", "", "", ade, fde
                )
                .unwrap();
            }
        }
        writeln!(w).unwrap();
        for (name, mode, r) in self.rows() {
            let p = format!("{name}.{mode}");
            writeln!(w, "{p}.ade={}", r.ade).unwrap();
            writeln!(w, "{p}.fde={}", r.fde).unwrap();
            writeln!(w, "{p}.k={}", r.k_used).unwrap();
            writeln!(w, "{p}.samples={}", r.sample_count).unwrap();
            writeln!(w, "{p}.held={}", r.held_count).unwrap();
            for h in &r.per_horizon {
                writeln!(w, "{p}.ade@{:.1}s={}", h.seconds, h.ade).unwrap();
                writeln!(w, "{p}.fde@{:.1}s={}", h.seconds, h.fde).unwrap();
            }
        }
        for (mode, (ade, fde)) in &averages {
            writeln!(w, "average.{mode}.ade={ade}").unwrap();
            writeln!(w, "average.{mode}.fde={fde}").unwrap();
        }
        s
    }
}
