use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use kdvlab::field::{FieldGrid, Provenance, RegionKind};
use kdvlab::scattering::ScatteringData;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn kdvlab(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_kdvlab"))
        .args(args)
        .output()
        .expect("spawn kdvlab");
    let text = format!(
        "{}{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    (out.status.code().unwrap_or(-1), text)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

const ONE_WELL_STEP: &str = r#"
[potential]
family = "tanh-step-plus-wells"
c = 1.0
wells = [{ depth = 3.84, center = 4.0, width = 0.5 }]

[asymptote]
x_min = 0.0
x_max = 120.0
dx = 0.05
times = [5.0, 10.0, 20.0]
"#;

const ONE_SOLITON: &str = r#"
[potential]
family = "tanh-step-plus-wells"
c = 0.0
wells = [{ depth = 2.0, center = 0.0, width = 1.0 }]

[asymptote]
x_min = 0.0
x_max = 100.0
dx = 0.01
times = [5.0, 10.0, 20.0]
"#;

#[test]
fn tanh_step_has_no_solitons_and_a_zero_profile() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("tanh_step.toml");
    let (code, text) = kdvlab(&["scatter", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(code, 0, "{text}");
    assert!(text.contains("N             0"), "{text}");
    let data = ScatteringData::read_json(&dir.path().join("scatter.json")).unwrap();
    assert!(data.kappas.is_empty());

    let scatter = dir.path().join("scatter.json");
    let (code, text) = kdvlab(&[
        "asymptote", "--scatter", s(&scatter), "--config", s(&cfg), "--out", s(dir.path()), "--times", "5,10",
    ]);
    assert_eq!(code, 0, "{text}");
    let f = FieldGrid::read_csv(&dir.path().join("asymptote.csv")).unwrap();
    assert_eq!(f.t, vec![5.0, 10.0]);
    assert!(f.q.iter().flatten().all(|&v| v == 0.0));
}

#[test]
fn well_augmented_config_sorts_kappas() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("two_soliton.toml");
    let (code, text) = kdvlab(&["scatter", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(code, 0, "{text}");
    let data = ScatteringData::read_json(&dir.path().join("scatter.json")).unwrap();
    assert_eq!(data.kappas.len(), 2);
    assert!(data.kappas[0] < data.kappas[1]);
    assert!((data.kappas[0] - 1.0).abs() < 1e-8 && (data.kappas[1] - 2.0).abs() < 1e-8);
}

#[test]
fn one_soliton_minimum_sits_on_the_predicted_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "one.toml", ONE_SOLITON);
    let (code, text) = kdvlab(&["scatter", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(code, 0, "{text}");
    let scatter = dir.path().join("scatter.json");
    let (code, text) = kdvlab(&["asymptote", "--scatter", s(&scatter), "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(code, 0, "{text}");
    assert!(text.contains("soliton 1: x = 4.000000·t"), "{text}");

    let f = FieldGrid::read_csv(&dir.path().join("asymptote.csv")).unwrap();
    let q = f.snapshot(10.0).unwrap();
    let (i, &qmin) = q
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    // -2 sech^2(x) has gamma^2 = 2, so the line passes through the origin
    assert!((qmin + 2.0).abs() < 1e-6, "{qmin}");
    assert!((f.x[i] - 40.0).abs() <= 0.01 + 1e-9, "{}", f.x[i]);
}

fn asymptote_run(dir: &Path, cfg: &Path, beta: &str) -> FieldGrid {
    let scatter = dir.join("scatter.json");
    let out = dir.join(format!("beta{beta}"));
    let (code, text) = kdvlab(&[
        "asymptote", "--scatter", s(&scatter), "--config", s(cfg), "--out", s(&out), "--beta", beta,
    ]);
    assert_eq!(code, 0, "{text}");
    FieldGrid::read_csv(&out.join("asymptote.csv")).unwrap()
}

#[test]
fn beta_changes_only_the_tags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "step.toml", ONE_WELL_STEP);
    let (code, text) = kdvlab(&["scatter", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(code, 0, "{text}");
    let a = asymptote_run(dir.path(), &cfg, "0");
    let b = asymptote_run(dir.path(), &cfg, "2");
    assert_eq!(a.q, b.q);
    let (ta, tb) = (a.tags.unwrap(), b.tags.unwrap());
    assert_ne!(ta, tb);
    for (it, &t) in a.t.iter().enumerate() {
        for (ix, &x) in a.x.iter().enumerate() {
            if ta[it][ix] != tb[it][ix] {
                // only the strip between 4t and 4t + 2 log t is re-tagged
                assert!(x >= 4.0 * t && x < 4.0 * t + 2.0 * t.ln(), "x {x} t {t}");
                assert_eq!(tb[it][ix].kind, RegionKind::Outside);
            }
        }
    }
}

#[test]
fn repeated_runs_are_identical_and_manifests_cover_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "one.toml", ONE_SOLITON);
    let scatter = dir.path().join("scatter.json");
    let mut previous: Option<Vec<u8>> = None;
    for _ in 0..2 {
        assert_eq!(kdvlab(&["scatter", "--config", s(&cfg), "--out", s(dir.path())]).0, 0);
        assert_eq!(
            kdvlab(&["asymptote", "--scatter", s(&scatter), "--config", s(&cfg), "--out", s(dir.path())]).0,
            0
        );
        let bytes = std::fs::read(dir.path().join("asymptote.csv")).unwrap();
        if let Some(p) = &previous {
            assert_eq!(p, &bytes);
        }
        previous = Some(bytes);
    }
    let manifest = std::fs::read_to_string(dir.path().join("manifest.jsonl")).unwrap();
    let lines: Vec<serde_json::Value> = manifest.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0]["command"], "scatter");
    assert_eq!(lines[1]["command"], "asymptote");
    // within one run, each artifact is listed by exactly one manifest entry
    let mut seen: HashMap<String, usize> = HashMap::new();
    for l in &lines[..2] {
        for o in l["outputs"].as_array().unwrap() {
            *seen.entry(o.as_str().unwrap().to_string()).or_default() += 1;
        }
    }
    assert_eq!(seen.len(), 4);
    assert!(seen.values().all(|&n| n == 1));
}

fn as_oracle(f: &FieldGrid) -> FieldGrid {
    FieldGrid {
        provenance: Provenance::Oracle,
        tags: None,
        ..f.clone()
    }
}

fn soliton_field(dir: &Path) -> (PathBuf, PathBuf) {
    let cfg = write_config(dir, "one.toml", ONE_SOLITON);
    assert_eq!(kdvlab(&["scatter", "--config", s(&cfg), "--out", s(dir)]).0, 0);
    let scatter = dir.join("scatter.json");
    assert_eq!(
        kdvlab(&["asymptote", "--scatter", s(&scatter), "--config", s(&cfg), "--out", s(dir)]).0,
        0
    );
    let asym = dir.join("asymptote.csv");
    let oracle = dir.join("oracle.csv");
    as_oracle(&FieldGrid::read_csv(&asym).unwrap()).write_csv(&oracle).unwrap();
    (oracle, asym)
}

#[test]
fn identical_fields_validate_trivially() {
    let dir = tempfile::tempdir().unwrap();
    let (oracle, asym) = soliton_field(dir.path());
    let (code, text) = kdvlab(&[
        "validate", "--oracle", s(&oracle), "--asymptotic", s(&asym), "--c", "0", "--out", s(dir.path()),
    ]);
    assert_eq!(code, 0, "{text}");
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("validate.json")).unwrap()).unwrap();
    assert_eq!(rep["pass"], true);
    assert!(rep["sup_error"].as_array().unwrap().iter().all(|e| e.as_f64() == Some(0.0)));
    assert_eq!(rep["peaks"].as_array().unwrap().len(), 1);
}

#[test]
fn a_wrong_field_fails_with_exit_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let (oracle, asym) = soliton_field(dir.path());
    let mut f = FieldGrid::read_csv(&oracle).unwrap();
    // constant offset: errors do not decay
    for row in &mut f.q {
        for v in row.iter_mut() {
            *v += 1e-3;
        }
    }
    f.write_csv(&oracle).unwrap();
    let (code, text) = kdvlab(&[
        "validate", "--oracle", s(&oracle), "--asymptotic", s(&asym), "--c", "0", "--out", s(dir.path()),
    ]);
    assert_eq!(code, 2, "{text}");
    assert!(dir.path().join("validate.json").exists());
}

#[test]
fn schema_and_grid_mismatches_are_operational_errors() {
    let dir = tempfile::tempdir().unwrap();
    let (oracle, asym) = soliton_field(dir.path());
    let (code, text) = kdvlab(&["validate", "--oracle", s(&oracle), "--asymptotic", s(&asym), "--c", "0", "--schema-check"]);
    assert_eq!(code, 0, "{text}");

    let text = std::fs::read_to_string(&oracle).unwrap();
    let bumped = dir.path().join("bumped.csv");
    std::fs::write(&bumped, text.replacen("schema_version=1", "schema_version=2", 1)).unwrap();
    let (code, out) = kdvlab(&["validate", "--oracle", s(&bumped), "--asymptotic", s(&asym), "--c", "0", "--schema-check"]);
    assert_eq!(code, 1, "{out}");

    let mut f = FieldGrid::read_csv(&oracle).unwrap();
    f.x.iter_mut().for_each(|x| *x += 0.005);
    let shifted = dir.path().join("shifted.csv");
    f.write_csv(&shifted).unwrap();
    let (code, out) = kdvlab(&[
        "validate", "--oracle", s(&shifted), "--asymptotic", s(&asym), "--c", "0", "--out", s(dir.path()),
    ]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("grid"), "{out}");
}

#[test]
fn missing_config_is_an_error() {
    let (code, _) = kdvlab(&["scatter", "--config", "/nonexistent/x.toml", "--out", "/tmp"]);
    assert_eq!(code, 1);
}
