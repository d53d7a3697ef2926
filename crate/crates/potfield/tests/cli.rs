use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_potfield"))
}

fn synthetic_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/synthetic")
}

fn run(sub: &str, sets: &[(&str, &str)]) -> Output {
    let mut c = bin();
    c.arg(sub).arg("--jobs").arg("1");
    for (k, v) in sets {
        c.arg("--set").arg(format!("{k}={v}"));
    }
    c.output().unwrap()
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn report_value(report: &str, key: &str) -> f64 {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("{key} missing from report"))
        .parse()
        .unwrap()
}

fn dir_listing(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

#[test]
fn label_writes_one_field_per_sample_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("walk.txt");
    // agent 1: 22 moving points, 3 samples
    let mut rows = String::new();
    for k in 0..22 {
        rows.push_str(&format!("{} 1 {} 0.5\n", k * 10, k as f64 * 0.4));
    }
    // agent 2 never moves
    for k in 0..20 {
        rows.push_str(&format!("{} 2 3.0 3.0\n", k * 10));
    }
    std::fs::write(&input, rows).unwrap();
    let out_dir = tmp.path().join("labels");
    let sets = [("input", s(&input)), ("output", s(&out_dir))];
    ok(&run("label", &sets));

    let manifest = std::fs::read_to_string(out_dir.join("manifest.txt")).unwrap();
    let rows: Vec<&str> = manifest.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 4);
    let fields = std::fs::read_dir(&out_dir)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().unwrap() == "pfld")
        .count();
    assert_eq!(fields, 3);
    let stationary = rows.iter().find(|r| r.starts_with("walk:2:")).unwrap();
    assert!(stationary.contains("\tdegenerate\t"));
    for r in rows.iter().filter(|r| r.starts_with("walk:1:")) {
        let cols: Vec<&str> = r.split('\t').collect();
        assert_eq!(&cols[3..6], &["1.0", "-1.0", "pass"]);
    }

    let first = dir_listing(&out_dir);
    ok(&run("label", &sets));
    assert_eq!(dir_listing(&out_dir), first);
}

#[test]
fn predict_is_deterministic_and_seeded() {
    let tmp = tempfile::tempdir().unwrap();
    let input = synthetic_dir().join("scene01.txt");
    let a = tmp.path().join("a.txt");
    let b = tmp.path().join("b.txt");
    let c = tmp.path().join("c.txt");
    ok(&run(
        "predict",
        &[
            ("input", s(&input)),
            ("output", s(&a)),
            ("seed", "7"),
            ("K", "4"),
        ],
    ));
    ok(&run(
        "predict",
        &[
            ("input", s(&input)),
            ("output", s(&b)),
            ("seed", "7"),
            ("K", "4"),
        ],
    ));
    ok(&run(
        "predict",
        &[
            ("input", s(&input)),
            ("output", s(&c)),
            ("seed", "8"),
            ("K", "4"),
        ],
    ));
    let (a, b, c) = (
        std::fs::read(a).unwrap(),
        std::fs::read(b).unwrap(),
        std::fs::read(c).unwrap(),
    );
    assert_eq!(a, b);
    assert_ne!(a, c);
    let text = String::from_utf8(a).unwrap();
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split('\t').collect())
        .collect();
    assert!(rows.iter().all(|r| r.len() == 6));
    assert!(rows.iter().any(|r| r[1] == "mean"));
    assert!(rows.iter().any(|r| r[1] == "3"));
    // mode 0 is the mean rollout
    let pick = |mode: &str| -> Vec<String> {
        rows.iter()
            .filter(|r| r[1] == mode)
            .map(|r| r[2..].join(" "))
            .collect()
    };
    assert_eq!(pick("mean"), pick("0"));
}

#[test]
fn predict_dumps_intermediate_fields() {
    let tmp = tempfile::tempdir().unwrap();
    let input = synthetic_dir().join("scene02.txt");
    let dump = tmp.path().join("dump");
    let pred = tmp.path().join("p.txt");
    let sets = [
        ("input", s(&input)),
        ("output", s(&pred)),
        ("K", "2"),
        ("dump_dir", s(&dump)),
    ];
    ok(&run("predict", &sets));
    let names: Vec<String> = dir_listing(&dump).into_iter().map(|(n, _)| n).collect();
    for kind in ["inertial", "direction", "force", "neighbors", "weight"] {
        assert!(
            names.iter().any(|n| n.ends_with(&format!(".{kind}.pfld"))),
            "no {kind} dump"
        );
    }
    let field = names
        .iter()
        .find(|n| n.ends_with(".direction.pfld"))
        .unwrap();
    let png = tmp.path().join("d.png");
    ok(&run(
        "render",
        &[("input", s(&dump.join(field))), ("output", s(&png))],
    ));
    assert_eq!(&std::fs::read(&png).unwrap()[1..4], b"PNG");
}

#[test]
fn eval_oracle_and_linear_on_synthetic() {
    let d = synthetic_dir();
    let oracle = ok(&run("eval", &[("dataset", s(&d)), ("model", "oracle")]));
    assert_eq!(report_value(&oracle, "average.single.ade"), 0.0);
    assert_eq!(report_value(&oracle, "average.single.fde"), 0.0);
    let linear = ok(&run("eval", &[("dataset", s(&d)), ("model", "linear")]));
    assert!(report_value(&linear, "average.single.ade") < 1e-12);
    assert!(report_value(&linear, "average.single.fde") < 1e-12);
    assert!(linear.contains("FDE of the minimum-ADE sample"));
    assert!(report_value(&linear, "scene00.single.samples") > 0.0);
}

#[test]
fn eval_is_deterministic_and_reports_best_of_k() {
    let tmp = tempfile::tempdir().unwrap();
    let d = synthetic_dir();
    let out = tmp.path().join("report.txt");
    let sets = [
        ("dataset", s(&d)),
        ("K", "3"),
        ("test_scene", "scene02"),
        ("output", s(&out)),
    ];
    let a = ok(&run("eval", &sets));
    let b = ok(&run("eval", &sets));
    assert_eq!(a, b);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), a);
    assert!(report_value(&a, "scene02.best.ade") <= report_value(&a, "scene02.single.ade"));
    assert_eq!(report_value(&a, "scene02.best.k"), 3.0);
}

#[test]
fn split_protocol_with_generated_split_file() {
    let tmp = tempfile::tempdir().unwrap();
    let d = synthetic_dir();
    let split = tmp.path().join("split.txt");
    let sets = [
        ("dataset", s(&d)),
        ("protocol", "split"),
        ("split_file", s(&split)),
        ("seed", "2"),
    ];
    ok(&run("ingest", &sets));
    let ids = std::fs::read_to_string(&split).unwrap();
    assert_eq!(ids.lines().count(), 1);
    let report = ok(&run(
        "eval",
        &[
            sets[0],
            sets[1],
            sets[2],
            ("model", "linear"),
            ("units", "pixels"),
        ],
    ));
    assert!(report.contains("scale=1/5"));
    assert!(report_value(&report, "test.single.samples") > 0.0);
}

#[test]
fn configuration_errors_exit_2_and_list_every_key() {
    let out = run("eval", &[("dt", "0"), ("frobnicate", "1"), ("K", "many")]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    for key in ["dt", "frobnicate", "K", "dataset"] {
        assert!(err.contains(key), "{key} not reported in {err}");
    }
    let missing = run(
        "eval",
        &[("dataset", s(&synthetic_dir())), ("test_scene", "nowhere")],
    );
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn data_errors_exit_3_with_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.txt");
    std::fs::write(&bad, "0 1 0 0\n10 1 zero 0\n").unwrap();
    let out = run(
        "label",
        &[("input", s(&bad)), ("output", s(&tmp.path().join("o")))],
    );
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("ingest") && err.contains(":2:"), "{err}");
}

#[test]
fn render_rejects_three_channel_fields() {
    use potfield::format::FieldFile;
    use potfield_core::{GridSpec, Vec2};
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path().join("rgb.pfld");
    let grid = GridSpec::new(4, 4, Vec2::ZERO, 1.0).unwrap();
    FieldFile::new(grid, 3, vec![0.5; 48], vec![1.0; 16])
        .unwrap()
        .write(&p)
        .unwrap();
    let out = run(
        "render",
        &[("input", s(&p)), ("output", s(&tmp.path().join("x.png")))],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unsupported"));
    assert!(!tmp.path().join("x.png").exists());
}

#[test]
fn fit_then_predict_with_bundle_file() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let spec = potfield::synthetic::SyntheticSpec {
        scenes: 2,
        agents: 4,
        length: 22,
        ..Default::default()
    };
    potfield::synthetic::write_dataset(&data, &spec, true).unwrap();
    let bundle = tmp.path().join("b.pfeb");
    let fit = ok(&run(
        "fit",
        &[
            ("dataset", s(&data)),
            ("output", s(&bundle)),
            ("bank_size", "20"),
        ],
    ));
    assert!(fit.contains("environment bank: 20 pairs"), "{fit}");
    let decoded = potfield::format::read_bundle(&bundle).unwrap();
    assert!(matches!(
        decoded.environment,
        potfield_core::estimators::EnvModel::KernelBank(_)
    ));

    let pred = tmp.path().join("p.txt");
    let (input, scene) = (data.join("scene00.txt"), data.join("scene00.pfld"));
    let sets = [
        ("input", s(&input)),
        ("scene", s(&scene)),
        ("bundle", s(&bundle)),
        ("output", s(&pred)),
        ("K", "2"),
    ];
    ok(&run("predict", &sets));
    assert!(std::fs::read_to_string(&pred).unwrap().lines().count() > 1);
}

#[test]
fn ingest_normalizes_trajectory_file() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("norm.txt");
    let stdout = ok(&run(
        "ingest",
        &[
            ("input", s(&synthetic_dir().join("scene00.txt"))),
            ("output", s(&out)),
        ],
    ));
    assert!(stdout.contains("agents=10"));
    let a =
        potfield::ingest::parse_trajectory_file(&synthetic_dir().join("scene00.txt"), 0.4).unwrap();
    let b = potfield::ingest::parse_trajectory_file(&out, 0.4).unwrap();
    assert_eq!(a, b);
}
