//! `PFEB` estimator bundles.
//!
//! Little-endian: magic `PFEB`, u32 version, u32 section count, then per
//! section: name, kind, u32 parameter count, (name, f64) parameters,
//! u32 blob count, blobs. Strings are u32-length-prefixed UTF-8; blobs are
//! u64-length-prefixed. Kinds are `analytic:<name>` or `bank`; a bank
//! section embeds alternating scene / field `PFLD` blobs.

use std::path::Path;

use potfield_core::estimators::{
    DirectionModel, EnvModel, EstimatorBundle, FuseModel, InertialModel, KernelBank, SocialModel,
    SpeedModel,
};
use potfield_core::predictor::SocialParams;

use super::{FieldFile, Reader, Writer};
use crate::error::{Error, Result};
use crate::io;

pub const MAGIC: &[u8; 4] = b"PFEB";
pub const VERSION: u32 = 1;

const SECTIONS: [&str; 7] = [
    "environment",
    "inertial",
    "env_direction",
    "inertial_direction",
    "speed",
    "social",
    "fuse",
];

struct Section {
    name: String,
    kind: String,
    params: Vec<(String, f64)>,
    blobs: Vec<Vec<u8>>,
}

impl Section {
    fn analytic(name: &str, model: &str, params: &[(&str, f64)]) -> Self {
        Section {
            name: name.into(),
            kind: format!("analytic:{model}"),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            blobs: Vec::new(),
        }
    }

    /// Parameters in exactly the listed order.
    fn expect(&self, file: &str, kind: &str, names: &[&str]) -> Result<Vec<f64>> {
        let found: Vec<&str> = self.params.iter().map(|(k, _)| k.as_str()).collect();
        if found != names {
            return Err(Error::format(
                file,
                format!(
                    "section {} ({kind}): expected parameters {names:?}, found {found:?}",
                    self.name
                ),
            ));
        }
        if !self.blobs.is_empty() && kind != "bank" {
            return Err(Error::format(
                file,
                format!("section {}: unexpected blobs", self.name),
            ));
        }
        Ok(self.params.iter().map(|(_, v)| *v).collect())
    }
}

fn direction_section(name: &str, m: DirectionModel) -> Section {
    let DirectionModel::Gradient { sigma, epsilon } = m;
    Section::analytic(name, "gradient", &[("sigma", sigma), ("epsilon", epsilon)])
}

fn sections(bundle: &EstimatorBundle) -> Vec<Section> {
    let environment = match &bundle.environment {
        EnvModel::Disabled => Section::analytic("environment", "none", &[]),
        EnvModel::KernelBank(bank) => Section {
            name: "environment".into(),
            kind: "bank".into(),
            params: vec![("k".into(), bank.k as f64)],
            blobs: bank
                .pairs
                .iter()
                .flat_map(|(scene, field)| {
                    [
                        FieldFile::from_patch(scene).encode(),
                        FieldFile::from_scalar(field).encode(),
                    ]
                })
                .collect(),
        },
    };
    let InertialModel::ConstantVelocity { width, spread } = bundle.inertial;
    let SpeedModel::ConstantSpeed { sigma_floor } = bundle.speed;
    let social = match bundle.social {
        SocialModel::Disabled => Section::analytic("social", "none", &[]),
        SocialModel::Repulsion(p) => Section::analytic(
            "social",
            "repulsion",
            &[("range", p.range), ("strength", p.strength)],
        ),
    };
    let FuseModel::InverseVariance = bundle.fuse;
    vec![
        environment,
        Section::analytic(
            "inertial",
            "constant_velocity",
            &[("width", width), ("spread", spread)],
        ),
        direction_section("env_direction", bundle.env_direction),
        direction_section("inertial_direction", bundle.inertial_direction),
        Section::analytic("speed", "constant_speed", &[("sigma_floor", sigma_floor)]),
        social,
        Section::analytic("fuse", "inverse_variance", &[]),
    ]
}

pub fn encode_bundle(bundle: &EstimatorBundle) -> Vec<u8> {
    let sections = sections(bundle);
    let mut w = Writer::with_capacity(1024);
    w.bytes(MAGIC);
    w.u32(VERSION);
    w.u32(sections.len() as u32);
    for s in &sections {
        w.str(&s.name);
        w.str(&s.kind);
        w.u32(s.params.len() as u32);
        for (k, v) in &s.params {
            w.str(k);
            w.f64(*v);
        }
        w.u32(s.blobs.len() as u32);
        for b in &s.blobs {
            w.blob(b);
        }
    }
    w.finish()
}

fn read_sections(bytes: &[u8], file: &str) -> Result<Vec<Section>> {
    let mut r = Reader::new(bytes, file);
    if r.take(4)? != MAGIC {
        return Err(Error::format(file, "not a PFEB file (bad magic)"));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::format(
            file,
            format!("unsupported PFEB version {version}"),
        ));
    }
    let count = r.u32()?;
    let mut out = Vec::new();
    for _ in 0..count {
        let name = r.str()?.to_string();
        let kind = r.str()?.to_string();
        let np = r.u32()?;
        let mut params = Vec::new();
        for _ in 0..np {
            params.push((r.str()?.to_string(), r.f64()?));
        }
        let nb = r.u32()?;
        let mut blobs = Vec::new();
        for _ in 0..nb {
            blobs.push(r.blob()?.to_vec());
        }
        out.push(Section {
            name,
            kind,
            params,
            blobs,
        });
    }
    if r.remaining() != 0 {
        return Err(Error::format(
            file,
            format!("{} trailing bytes", r.remaining()),
        ));
    }
    Ok(out)
}

fn as_count(file: &str, v: f64) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(Error::format(
            file,
            format!("bank k must be a positive integer, got {v}"),
        ))
    }
}

fn direction_model(s: &Section, file: &str) -> Result<DirectionModel> {
    match s.kind.as_str() {
        "analytic:gradient" => {
            let p = s.expect(file, &s.kind, &["sigma", "epsilon"])?;
            Ok(DirectionModel::Gradient {
                sigma: p[0],
                epsilon: p[1],
            })
        }
        k => Err(unknown_kind(file, &s.name, k)),
    }
}

fn unknown_kind(file: &str, section: &str, kind: &str) -> Error {
    Error::format(file, format!("section {section}: unknown kind {kind:?}"))
}

/// `file` labels error messages.
pub fn decode_bundle(bytes: &[u8], file: &str) -> Result<EstimatorBundle> {
    let sections = read_sections(bytes, file)?;
    let names: Vec<&str> = sections.iter().map(|s| s.name.as_str()).collect();
    if names != SECTIONS {
        return Err(Error::format(
            file,
            format!("expected sections {SECTIONS:?}, found {names:?}"),
        ));
    }
    let [env, inertial, env_dir, inertial_dir, speed, social, fuse] =
        <[Section; 7]>::try_from(sections)
            .ok()
            .expect("seven sections checked");

    let environment = match env.kind.as_str() {
        "analytic:none" => {
            env.expect(file, &env.kind, &[])?;
            EnvModel::Disabled
        }
        "bank" => {
            let k = as_count(file, env.expect(file, "bank", &["k"])?[0])?;
            if env.blobs.len() % 2 != 0 {
                return Err(Error::format(file, "environment bank has an unpaired blob"));
            }
            let mut bank = KernelBank::new(k);
            for (i, pair) in env.blobs.chunks_exact(2).enumerate() {
                let label = format!("{file} (bank entry {i})");
                let scene = FieldFile::decode(&pair[0], &label)?.into_patch()?;
                let field = FieldFile::decode(&pair[1], &label)?.into_scalar()?;
                scene.grid.ensure_same(&field.grid)?;
                bank.pairs.push((scene, field));
            }
            EnvModel::KernelBank(bank)
        }
        k => return Err(unknown_kind(file, "environment", k)),
    };
    let inertial = match inertial.kind.as_str() {
        "analytic:constant_velocity" => {
            let p = inertial.expect(file, &inertial.kind, &["width", "spread"])?;
            InertialModel::ConstantVelocity {
                width: p[0],
                spread: p[1],
            }
        }
        k => return Err(unknown_kind(file, "inertial", k)),
    };
    let speed = match speed.kind.as_str() {
        "analytic:constant_speed" => SpeedModel::ConstantSpeed {
            sigma_floor: speed.expect(file, &speed.kind, &["sigma_floor"])?[0],
        },
        k => return Err(unknown_kind(file, "speed", k)),
    };
    let social = match social.kind.as_str() {
        "analytic:none" => {
            social.expect(file, &social.kind, &[])?;
            SocialModel::Disabled
        }
        "analytic:repulsion" => {
            let p = social.expect(file, &social.kind, &["range", "strength"])?;
            SocialModel::Repulsion(SocialParams {
                range: p[0],
                strength: p[1],
            })
        }
        k => return Err(unknown_kind(file, "social", k)),
    };
    let fuse = match fuse.kind.as_str() {
        "analytic:inverse_variance" => {
            fuse.expect(file, &fuse.kind, &[])?;
            FuseModel::InverseVariance
        }
        k => return Err(unknown_kind(file, "fuse", k)),
    };
    Ok(EstimatorBundle {
        environment,
        inertial,
        env_direction: direction_model(&env_dir, file)?,
        inertial_direction: direction_model(&inertial_dir, file)?,
        speed,
        social,
        fuse,
    })
}

pub fn read_bundle(path: &Path) -> Result<EstimatorBundle> {
    decode_bundle(&io::read(path)?, &path.display().to_string())
}

pub fn write_bundle(bundle: &EstimatorBundle, path: &Path) -> Result<()> {
    io::write_atomic(path, &encode_bundle(bundle))
}
