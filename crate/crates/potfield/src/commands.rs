//! Subcommands. Each returns the text printed on stdout.

use std::fmt::Write as _;
use std::path::Path;

use potfield_core::estimators::{EnvModel, EstimatorBundle};
use potfield_core::geometry::canonicalize;
use potfield_core::labeling::{label_potentials, rasterize_band};
use potfield_core::metrics::linear_baseline;
use potfield_core::predictor::FieldStack;
use potfield_core::trajectory::{find_neighbors, TrajectorySample};
use potfield_core::{ScalarField, Vec2};
use rayon::prelude::*;

use crate::config::{BundleSource, Model, Protocol, RunConfig};
use crate::error::{Error, Result};
use crate::format::{write_bundle, FieldFile};
use crate::ingest::{neighbor_candidates, parse_trajectory_file, segment_all};
use crate::io;
use crate::protocol::{
    build_bundle, fit_bank, load_dataset, make_split, run_protocol, with_lambda, Scene,
    SceneContext,
};
use crate::render::{encode_png, render};
use crate::scene::load_scene;

pub const REQUIRED_INGEST: &[&str] = &[];
pub const REQUIRED_LABEL: &[&str] = &["input", "output"];
pub const REQUIRED_FIT: &[&str] = &["output"];
pub const REQUIRED_PREDICT: &[&str] = &["input", "output"];
pub const REQUIRED_EVAL: &[&str] = &["dataset"];
pub const REQUIRED_RENDER: &[&str] = &["input", "output"];

fn scene_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scene".into())
}

/// Sample id made safe for file names.
fn file_stem(sample: &TrajectorySample) -> String {
    sample
        .id()
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn single_scene(cfg: &RunConfig) -> Result<Scene> {
    let input = cfg.path("input")?;
    let raster = match &cfg.scene {
        Some(p) => Some(load_scene(
            p,
            Vec2::new(cfg.scene_origin.0, cfg.scene_origin.1),
            cfg.scene_resolution,
        )?),
        None => None,
    };
    Ok(Scene {
        name: scene_id(input),
        trajectories: parse_trajectory_file(input, cfg.dt)?,
        raster,
    })
}

fn scene_summary(out: &mut String, scene: &Scene, cfg: &RunConfig) -> Result<()> {
    let samples = scene.samples(cfg)?;
    let candidates = neighbor_candidates(&scene.trajectories, &scene.name, cfg.obs_len)?;
    let neighbors: usize = samples
        .par_iter()
        .map(|s| {
            find_neighbors(s, &candidates, cfg.neighbor_radius)
                .neighbors
                .len()
        })
        .sum();
    let points: usize = scene.trajectories.iter().map(|t| t.len()).sum();
    writeln!(
        out,
        "{}: agents={} points={} samples={} mean_neighbors={:.3} raster={}",
        scene.name,
        scene.trajectories.len(),
        points,
        samples.len(),
        neighbors as f64 / samples.len().max(1) as f64,
        if scene.raster.is_some() { "yes" } else { "no" }
    )
    .expect("write to string");
    Ok(())
}

/// Parses and summarizes trajectories. With `input`, `output` receives the
/// normalized trajectory file; with `dataset` and `protocol = split`, a
/// missing `split_file` is created from `seed` and `split_ratio`.
pub fn cmd_ingest(cfg: &RunConfig) -> Result<String> {
    let mut out = String::new();
    if cfg.input.is_none() && cfg.dataset.is_none() {
        return Err(Error::Config(vec![
            "ingest needs \"input\" or \"dataset\"".into()
        ]));
    }
    if cfg.input.is_some() {
        let scene = single_scene(cfg)?;
        scene_summary(&mut out, &scene, cfg)?;
        if let Some(path) = &cfg.output {
            io::write_atomic(
                path,
                crate::ingest::format_trajectories(&scene.trajectories).as_bytes(),
            )?;
            writeln!(out, "wrote {}", path.display()).expect("write to string");
        }
    }
    if let Some(dir) = &cfg.dataset {
        let scenes = load_dataset(dir, cfg)?;
        for scene in &scenes {
            scene_summary(&mut out, scene, cfg)?;
        }
        if cfg.protocol == Protocol::Split {
            let path = cfg.path("split_file")?;
            if !path.exists() {
                let names: Vec<String> = scenes.iter().map(|s| s.name.clone()).collect();
                let test = make_split(&names, cfg.split_ratio, cfg.seed);
                crate::protocol::write_split(path, &test)?;
                writeln!(
                    out,
                    "wrote split {} ({} test of {})",
                    path.display(),
                    test.len(),
                    names.len()
                )
                .expect("write to string");
            }
        }
    }
    Ok(out)
}

/// One `PFLD` potential field per labeled sample plus `manifest.txt`.
pub fn cmd_label(cfg: &RunConfig) -> Result<String> {
    let input = cfg.path("input")?;
    let dir = cfg.path("output")?;
    let trajectories = parse_trajectory_file(input, cfg.dt).map_err(|e| e.at("ingest"))?;
    let samples = segment_all(
        &trajectories,
        &scene_id(input),
        cfg.obs_len,
        cfg.pred_len,
        cfg.stride,
    )?;
    let grid = cfg.grid();

    let rows = samples
        .par_iter()
        .map(|sample| -> Result<String> {
            let (canon, transform) = canonicalize(sample, &grid);
            let id = sample.id();
            let degenerate = || format!("{id}\tdegenerate\t-\t-\t-\t-\t-\n");
            if transform.is_degenerate {
                return Ok(degenerate());
            }
            let points = canon.full();
            let label = match label_potentials(&points) {
                Ok(l) => l,
                Err(potfield_core::Error::DegenerateLabel) => return Ok(degenerate()),
                Err(e) => return Err(Error::from(e).at("label")),
            };
            let outside = points.iter().filter(|p| !grid.contains(**p)).count();
            let field = rasterize_band(
                &points,
                &label,
                &grid,
                &vec![cfg.width_world(); points.len()],
            )
            .map_err(|e| Error::from(e).at("rasterize"))?;
            let name = format!("{}.pfld", file_stem(sample));
            FieldFile::from_scalar(&with_lambda(field, cfg.lambda)).write(&dir.join(&name))?;
            let (first, last) = (label.values[0], label.values[label.len() - 1]);
            let ok = first == 1.0 && last == -1.0;
            Ok(format!(
                "{id}\t{}\t{name}\t{first:?}\t{last:?}\t{}\t{outside}\n",
                if outside > 0 { "clipped" } else { "ok" },
                if ok { "pass" } else { "FAIL" }
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut manifest =
        String::from("# sample_id\tstatus\tfile\tp_first\tp_last\tendpoints\tpoints_outside\n");
    rows.iter().for_each(|r| manifest.push_str(r));
    io::write_atomic(&dir.join("manifest.txt"), manifest.as_bytes())?;
    let degenerate = rows.iter().filter(|r| r.contains("\tdegenerate\t")).count();
    let failed = rows.iter().filter(|r| r.contains("\tFAIL\t")).count();
    if failed > 0 {
        return Err(Error::Internal(format!(
            "{failed} labels failed the endpoint check"
        )));
    }
    Ok(format!(
        "labeled {} samples ({} degenerate) into {}\n",
        rows.len() - degenerate,
        degenerate,
        dir.display()
    ))
}

/// Writes an estimator bundle: the analytic estimators plus an environment
/// bank from every scene raster available.
pub fn cmd_fit(cfg: &RunConfig) -> Result<String> {
    let output = cfg.path("output")?;
    let scenes = match &cfg.dataset {
        Some(dir) => load_dataset(dir, cfg)?,
        None if cfg.input.is_some() => vec![single_scene(cfg)?],
        None => {
            return Err(Error::Config(vec![
                "fit needs \"dataset\" or \"input\"".into()
            ]))
        }
    };
    let train: Vec<&Scene> = scenes.iter().collect();
    let mut bundle = cfg.analytic_bundle();
    let mut out = String::new();
    match fit_bank(&train, cfg).map_err(|e| e.at("fit"))? {
        Some(fit) => {
            writeln!(
                out,
                "environment bank: {} pairs, k={}",
                fit.bank.pairs.len(),
                fit.bank.k
            )
            .expect("write to string");
            if let Some(loss) = fit.validation_loss {
                writeln!(out, "environment validation loss: {loss}").expect("write to string");
            }
            bundle.environment = EnvModel::KernelBank(fit.bank);
        }
        None => {
            writeln!(out, "environment bank: none (no scene rasters)").expect("write to string")
        }
    }
    write_bundle(&bundle, output)?;
    writeln!(out, "wrote {}", output.display()).expect("write to string");
    Ok(out)
}

fn dump_fields(dir: &Path, stem: &str, f: &FieldStack) -> Result<()> {
    let mut files: Vec<(&str, FieldFile)> = vec![
        ("inertial", FieldFile::from_scalar(&f.inertial)),
        (
            "inertial_direction",
            FieldFile::from_direction(&f.inertial_direction),
        ),
        (
            "inertial_sigma",
            FieldFile::from_direction_sigma(&f.inertial_direction),
        ),
        ("env_direction", FieldFile::from_direction(&f.env_direction)),
        (
            "env_sigma",
            FieldFile::from_direction_sigma(&f.env_direction),
        ),
        ("direction", FieldFile::from_direction(&f.direction)),
        (
            "direction_sigma",
            FieldFile::from_direction_sigma(&f.direction),
        ),
        (
            "weight",
            FieldFile::from_scalar(&ScalarField {
                grid: f.inertial.grid,
                data: f.weight.clone(),
                mask: vec![1.0; f.inertial.grid.len()],
            }),
        ),
        ("neighbors", FieldFile::from_scalar(&f.neighbor_field)),
        ("force", FieldFile::from_vector(&f.force)),
    ];
    if let Some(env) = &f.environment {
        files.push(("environment", FieldFile::from_scalar(env)));
    }
    for (name, file) in files {
        file.write(&dir.join(format!("{stem}.{name}.pfld")))?;
    }
    Ok(())
}

fn bundle_for_predict(cfg: &RunConfig) -> Result<EstimatorBundle> {
    match &cfg.bundle {
        BundleSource::File(_) => build_bundle(cfg, &[]),
        BundleSource::Analytic => Ok(cfg.analytic_bundle()),
    }
}

/// Prediction rows `sample_id mode step x y truncated`; `mode` is `mean` or
/// the mode number (mode 0 is the mean rollout).
pub fn cmd_predict(cfg: &RunConfig) -> Result<String> {
    let output = cfg.path("output")?;
    let scene = single_scene(cfg).map_err(|e| e.at("ingest"))?;
    let samples = scene.samples(cfg)?;
    let bundle = bundle_for_predict(cfg).map_err(|e| e.at("bundle"))?;
    let ctx = SceneContext::new(&scene.trajectories, &scene.name, scene.raster.as_ref(), cfg)?;

    let blocks = samples
        .par_iter()
        .map(|sample| -> Result<String> {
            let id = sample.id();
            let mut rows = String::new();
            let mut emit = |mode: &str, positions: &[Vec2], truncated: bool| {
                for (step, p) in positions.iter().enumerate() {
                    writeln!(
                        rows,
                        "{id}\t{mode}\t{}\t{:.6}\t{:.6}\t{}",
                        step + 1,
                        p.x,
                        p.y,
                        truncated as u8
                    )
                    .expect("write to string");
                }
            };
            match cfg.model {
                Model::Pipeline => {
                    let pred = ctx.predict(sample, &bundle, cfg)?;
                    emit(
                        "mean",
                        &pred.world.single.positions,
                        pred.world.single.truncated,
                    );
                    for (j, r) in pred.world.samples.iter().enumerate() {
                        emit(&j.to_string(), &r.positions, r.truncated);
                    }
                    if let Some(dir) = &cfg.dump_dir {
                        dump_fields(dir, &file_stem(sample), &pred.fields)?;
                    }
                }
                Model::Linear => emit("mean", &linear_baseline(&sample.past, cfg.pred_len)?, false),
                Model::Oracle => emit("mean", &sample.future, false),
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut text = String::from("# sample_id\tmode\tstep\tx\ty\ttruncated\n");
    blocks.iter().for_each(|b| text.push_str(b));
    io::write_atomic(output, text.as_bytes())?;
    Ok(format!(
        "predicted {} samples into {}\n",
        samples.len(),
        output.display()
    ))
}

/// Runs the evaluation protocol; the report is printed and, with `output`,
/// written to a file.
pub fn cmd_eval(cfg: &RunConfig) -> Result<String> {
    let dir = cfg.path("dataset")?;
    let scenes = load_dataset(dir, cfg).map_err(|e| e.at("ingest"))?;
    if scenes.is_empty() {
        return Err(Error::Config(vec![format!(
            "dataset {} has no .txt scenes",
            dir.display()
        )]));
    }
    let report = run_protocol(cfg, &scenes)?.to_text();
    if let Some(path) = &cfg.output {
        io::write_atomic(path, report.as_bytes())?;
    }
    Ok(report)
}

pub fn cmd_render(cfg: &RunConfig) -> Result<String> {
    let input = cfg.path("input")?;
    let output = cfg.path("output")?;
    let field = FieldFile::read(input)?;
    let img = render(&field, cfg.render_scale)?;
    io::write_atomic(output, &encode_png(&img)?)?;
    Ok(format!(
        "rendered {} to {}\n",
        input.display(),
        output.display()
    ))
}
