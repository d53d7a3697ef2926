//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use potfield_core::estimators::{
    DirectionModel, EnvModel, EstimatorBundle, FuseModel, InertialModel, SocialModel, SpeedModel,
};
use potfield_core::labeling::LossNorm;
use potfield_core::predictor::{PredictConfig, SocialParams};
use potfield_core::GridSpec;

use crate::error::{Error, Result};
use crate::io;

/// Every accepted key with its default (`None`: no default).
pub const KEYS: &[(&str, Option<&str>)] = &[
    ("dt", Some("0.4")),
    ("obs_len", Some("8")),
    ("pred_len", Some("12")),
    ("stride", Some("1")),
    ("units", Some("meters")),
    ("pixel_scale", Some("5")),
    ("grid_size", Some("64")),
    ("resolution", Some("0.25")),
    ("trajectory_width", Some("3")),
    ("lambda", Some("0.01")),
    ("neighbor_radius", Some("4.0")),
    ("K", Some("20")),
    ("seed", Some("0")),
    ("protocol", Some("loo")),
    ("model", Some("pipeline")),
    ("bundle", Some("analytic")),
    ("loss_norm", Some("l1")),
    ("direction_sigma", Some("0.3")),
    ("inertial_spread", Some("3")),
    ("speed_sigma_floor", Some("0.05")),
    ("social", Some("on")),
    ("social_range", Some("1.0")),
    ("social_strength", Some("0.3")),
    ("env_k", Some("8")),
    ("bank_size", Some("256")),
    ("split_ratio", Some("0.8")),
    ("render_scale", Some("8")),
    ("scene_resolution", None),
    ("scene_origin_x", Some("0")),
    ("scene_origin_y", Some("0")),
    ("input", None),
    ("output", None),
    ("dataset", None),
    ("split_file", None),
    ("scene", None),
    ("test_scene", None),
    ("dump_dir", None),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    Meters,
    /// Image pixels; metrics are divided by `pixel_scale`.
    Pixels,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    LeaveOneOut,
    Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Pipeline,
    Linear,
    /// Predicts the ground truth; checks the harness.
    Oracle,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BundleSource {
    Analytic,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dt: f64,
    pub obs_len: usize,
    pub pred_len: usize,
    pub stride: usize,
    pub units: Units,
    pub pixel_scale: f64,
    pub grid_size: usize,
    /// World units per canonical grid pixel.
    pub resolution: f64,
    /// Band width in canonical grid pixels.
    pub trajectory_width: f64,
    /// Mask value written off the band.
    pub lambda: f32,
    pub neighbor_radius: f64,
    pub k: usize,
    pub seed: u64,
    pub protocol: Protocol,
    pub model: Model,
    pub bundle: BundleSource,
    pub loss_norm: LossNorm,
    pub direction_sigma: f64,
    pub inertial_spread: f64,
    pub speed_sigma_floor: f64,
    pub social: bool,
    pub social_range: f64,
    pub social_strength: f64,
    pub env_k: usize,
    pub bank_size: usize,
    pub split_ratio: f64,
    /// Image pixels per field pixel in renderings.
    pub render_scale: u32,
    /// World units per scene raster pixel (defaults to `resolution`).
    pub scene_resolution: f64,
    /// World position of the bottom-left scene raster pixel center.
    pub scene_origin: (f64, f64),
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub split_file: Option<PathBuf>,
    pub scene: Option<PathBuf>,
    pub test_scene: Option<String>,
    pub dump_dir: Option<PathBuf>,
}

/// `key = value` lines; `#` starts a comment line.
pub fn parse_pairs(text: &str, name: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut bad = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => {
                out.push((k.trim().to_string(), v.trim().to_string()))
            }
            _ => bad.push(format!(
                "{name}:{}: expected key = value, found {line:?}",
                n + 1
            )),
        }
    }
    if bad.is_empty() {
        Ok(out)
    } else {
        Err(Error::Config(bad))
    }
}

pub fn parse_override(s: &str) -> Result<(String, String)> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(Error::Config(vec![format!(
            "--set expects key=value, found {s:?}"
        )])),
    }
}

struct Values<'a> {
    map: BTreeMap<&'a str, &'a str>,
    errors: Vec<String>,
}

impl<'a> Values<'a> {
    fn raw(&self, key: &str) -> Option<&'a str> {
        self.map.get(key).copied()
    }

    fn parse<T: FromStr>(
        &mut self,
        key: &str,
        check: impl Fn(&T) -> bool,
        want: &str,
    ) -> Option<T> {
        let raw = self.raw(key)?;
        match raw.parse::<T>() {
            Ok(v) if check(&v) => Some(v),
            _ => {
                self.errors
                    .push(format!("{key} = {raw:?}: expected {want}"));
                None
            }
        }
    }

    fn choice<T: Copy>(&mut self, key: &str, options: &[(&str, T)]) -> Option<T> {
        let raw = self.raw(key)?;
        match options.iter().find(|(n, _)| *n == raw) {
            Some((_, v)) => Some(*v),
            None => {
                let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                self.errors.push(format!(
                    "{key} = {raw:?}: expected one of {}",
                    names.join(", ")
                ));
                None
            }
        }
    }
}

fn positive(v: &f64) -> bool {
    *v > 0.0 && v.is_finite()
}

fn non_negative(v: &f64) -> bool {
    *v >= 0.0 && v.is_finite()
}

impl RunConfig {
    /// Defaults overridden by `pairs` in order (later pairs win). Unknown
    /// keys, invalid values and missing `required` keys are all reported in
    /// one error.
    pub fn resolve(pairs: &[(String, String)], required: &[&str]) -> Result<RunConfig> {
        let mut errors = Vec::new();
        let mut map: BTreeMap<&str, &str> = KEYS
            .iter()
            .filter_map(|(k, d)| d.map(|d| (*k, d)))
            .collect();
        for (k, v) in pairs {
            match KEYS.iter().find(|(name, _)| name == k) {
                Some((name, _)) => {
                    map.insert(name, v.as_str());
                }
                None => errors.push(format!("unknown key {k:?}")),
            }
        }
        for key in required {
            if !map.contains_key(key) {
                errors.push(format!("missing required key {key:?}"));
            }
        }
        let mut v = Values { map, errors };

        let dt = v.parse("dt", positive, "a positive number");
        let obs_len = v.parse("obs_len", |n: &usize| *n >= 2, "an integer >= 2");
        let pred_len = v.parse("pred_len", |n: &usize| *n >= 1, "an integer >= 1");
        let stride = v.parse("stride", |n: &usize| *n >= 1, "an integer >= 1");
        let units = v.choice(
            "units",
            &[("meters", Units::Meters), ("pixels", Units::Pixels)],
        );
        let pixel_scale = v.parse("pixel_scale", positive, "a positive number");
        let grid_size = v.parse(
            "grid_size",
            |n: &usize| (4..=4096).contains(n),
            "an integer in 4..=4096",
        );
        let resolution = v.parse("resolution", positive, "a positive number");
        let trajectory_width = v.parse("trajectory_width", positive, "a positive number of pixels");
        let lambda = v.parse(
            "lambda",
            |l: &f32| *l > 0.0 && *l < 1.0,
            "a number in (0, 1)",
        );
        let neighbor_radius = v.parse("neighbor_radius", non_negative, "a number >= 0");
        let k = v.parse("K", |n: &usize| *n >= 1, "an integer >= 1");
        let seed = v.parse("seed", |_: &u64| true, "an unsigned integer");
        let protocol = v.choice(
            "protocol",
            &[("loo", Protocol::LeaveOneOut), ("split", Protocol::Split)],
        );
        let model = v.choice(
            "model",
            &[
                ("pipeline", Model::Pipeline),
                ("linear", Model::Linear),
                ("oracle", Model::Oracle),
            ],
        );
        let bundle = v.raw("bundle").map(|b| match b {
            "analytic" => BundleSource::Analytic,
            path => BundleSource::File(PathBuf::from(path)),
        });
        let loss_norm = v.choice(
            "loss_norm",
            &[("l1", LossNorm::L1), ("l2", LossNorm::SquaredL2)],
        );
        let direction_sigma = v.parse("direction_sigma", positive, "a positive number");
        let inertial_spread = v.parse(
            "inertial_spread",
            |s: &f64| *s >= 1.0 && s.is_finite(),
            "a number >= 1",
        );
        let speed_sigma_floor = v.parse("speed_sigma_floor", non_negative, "a number >= 0");
        let social = v.choice("social", &[("on", true), ("off", false)]);
        let social_range = v.parse("social_range", positive, "a positive number");
        let social_strength = v.parse("social_strength", non_negative, "a number >= 0");
        let env_k = v.parse("env_k", |n: &usize| *n >= 1, "an integer >= 1");
        let bank_size = v.parse("bank_size", |_: &usize| true, "an integer >= 0");
        let split_ratio = v.parse(
            "split_ratio",
            |r: &f64| *r > 0.0 && *r < 1.0,
            "a number in (0, 1)",
        );
        let render_scale = v.parse(
            "render_scale",
            |n: &u32| (1..=64).contains(n),
            "an integer in 1..=64",
        );
        let scene_resolution = match v.raw("scene_resolution") {
            Some(_) => v.parse("scene_resolution", positive, "a positive number"),
            None => resolution,
        };
        let scene_origin_x = v.parse("scene_origin_x", |x: &f64| x.is_finite(), "a finite number");
        let scene_origin_y = v.parse("scene_origin_y", |x: &f64| x.is_finite(), "a finite number");
        let path = |key: &str, v: &Values| v.raw(key).map(PathBuf::from);
        let input = path("input", &v);
        let output = path("output", &v);
        let dataset = path("dataset", &v);
        let split_file = path("split_file", &v);
        let scene = path("scene", &v);
        let dump_dir = path("dump_dir", &v);
        let test_scene = v.raw("test_scene").map(String::from);

        if !v.errors.is_empty() {
            return Err(Error::Config(v.errors));
        }
        let all = "all keys validated";
        Ok(RunConfig {
            dt: dt.expect(all),
            obs_len: obs_len.expect(all),
            pred_len: pred_len.expect(all),
            stride: stride.expect(all),
            units: units.expect(all),
            pixel_scale: pixel_scale.expect(all),
            grid_size: grid_size.expect(all),
            resolution: resolution.expect(all),
            trajectory_width: trajectory_width.expect(all),
            lambda: lambda.expect(all),
            neighbor_radius: neighbor_radius.expect(all),
            k: k.expect(all),
            seed: seed.expect(all),
            protocol: protocol.expect(all),
            model: model.expect(all),
            bundle: bundle.expect(all),
            loss_norm: loss_norm.expect(all),
            direction_sigma: direction_sigma.expect(all),
            inertial_spread: inertial_spread.expect(all),
            speed_sigma_floor: speed_sigma_floor.expect(all),
            social: social.expect(all),
            social_range: social_range.expect(all),
            social_strength: social_strength.expect(all),
            env_k: env_k.expect(all),
            bank_size: bank_size.expect(all),
            split_ratio: split_ratio.expect(all),
            render_scale: render_scale.expect(all),
            scene_resolution: scene_resolution.expect(all),
            scene_origin: (scene_origin_x.expect(all), scene_origin_y.expect(all)),
            input,
            output,
            dataset,
            split_file,
            scene,
            test_scene,
            dump_dir,
        })
    }

    /// Config file (optional) then `--set` overrides.
    pub fn load(file: Option<&Path>, overrides: &[String], required: &[&str]) -> Result<RunConfig> {
        let mut pairs = match file {
            Some(p) => parse_pairs(&io::read_to_string(p)?, &p.display().to_string())?,
            None => Vec::new(),
        };
        let mut bad = Vec::new();
        for s in overrides {
            match parse_override(s) {
                Ok(kv) => pairs.push(kv),
                Err(Error::Config(e)) => bad.extend(e),
                Err(e) => return Err(e),
            }
        }
        match (bad.is_empty(), Self::resolve(&pairs, required)) {
            (true, r) => r,
            (false, Err(Error::Config(e))) => {
                Err(Error::Config(bad.into_iter().chain(e).collect()))
            }
            (false, _) => Err(Error::Config(bad)),
        }
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec::centered(self.grid_size, self.resolution)
    }

    /// Band width in world units.
    pub fn width_world(&self) -> f64 {
        self.trajectory_width * self.resolution
    }

    /// Divisor applied to reported errors.
    pub fn metric_scale(&self) -> f64 {
        match self.units {
            Units::Meters => 1.0,
            Units::Pixels => self.pixel_scale,
        }
    }

    pub fn predict_config(&self, seed: u64) -> PredictConfig {
        PredictConfig {
            grid: self.grid(),
            pred_len: self.pred_len,
            trajectory_width: self.width_world(),
            k: self.k,
            seed,
        }
    }

    /// Analytic estimators from the configured parameters; the environment
    /// slot is disabled.
    pub fn analytic_bundle(&self) -> EstimatorBundle {
        let direction = DirectionModel::Gradient {
            sigma: self.direction_sigma,
            epsilon: 1e-6,
        };
        EstimatorBundle {
            environment: EnvModel::Disabled,
            inertial: InertialModel::ConstantVelocity {
                width: self.width_world(),
                spread: self.inertial_spread,
            },
            env_direction: direction,
            inertial_direction: direction,
            speed: SpeedModel::ConstantSpeed {
                sigma_floor: self.speed_sigma_floor,
            },
            social: if self.social {
                SocialModel::Repulsion(SocialParams {
                    range: self.social_range,
                    strength: self.social_strength,
                })
            } else {
                SocialModel::Disabled
            },
            fuse: FuseModel::InverseVariance,
        }
    }

    pub fn path(&self, key: &'static str) -> Result<&Path> {
        let p = match key {
            "input" => &self.input,
            "output" => &self.output,
            "dataset" => &self.dataset,
            "split_file" => &self.split_file,
            "scene" => &self.scene,
            "dump_dir" => &self.dump_dir,
            _ => &None,
        };
        p.as_deref()
            .ok_or_else(|| Error::Config(vec![format!("missing required key {key:?}")]))
    }
}
