use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn spectrex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spectrex"))
        .args(args)
        .env_remove("SPECTREX_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn classify_reports_flags() {
    let pencil = fixture("spin_disk.json");
    let point = fixture("point_g2.json");
    let out = spectrex(&["classify", "--pencil", pencil.to_str().unwrap(), "--point", point.to_str().unwrap()]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["k"], 0);
    assert_eq!(v["arveson"], "no");
}

#[test]
fn verify_example_certificates() {
    for name in ["g3_certificate.json", "g4_certificate.json"] {
        let cert = fixture(name);
        let out = spectrex(&["verify", "--cert", cert.to_str().unwrap()]);
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stdout));
    }
}

#[test]
fn tampered_certificate_fails_with_exit_one() {
    let text = std::fs::read_to_string(fixture("g3_certificate.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["claims"]["kernel_dim"] = 3.into();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cert.json");
    std::fs::write(&path, v.to_string()).unwrap();
    let out = spectrex(&["verify", "--cert", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn experiment_is_reproducible() {
    let spec = fixture("classify_spec.json");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let csv: Vec<String> = dirs
        .iter()
        .map(|d| {
            let out = spectrex(&["experiment", "--spec", spec.to_str().unwrap(), "--out-dir", d.path().to_str().unwrap()]);
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
            assert!(d.path().join("table.md").exists());
            std::fs::read_to_string(d.path().join("rows.csv")).unwrap()
        })
        .collect();
    assert_eq!(csv[0], csv[1]);
}

#[test]
fn tolerance_config_file_is_accepted() {
    let pencil = fixture("spin_disk.json");
    let point = fixture("point_g2.json");
    let cfg = fixture("tolerances.toml");
    let out = spectrex(&[
        "--config",
        cfg.to_str().unwrap(),
        "--ee-mag",
        "1e-12",
        "classify",
        "--pencil",
        pencil.to_str().unwrap(),
        "--point",
        point.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bad_tolerance_is_rejected() {
    let pencil = fixture("spin_disk.json");
    let point = fixture("point_g2.json");
    let out = spectrex(&[
        "--lmi-mag",
        "-1",
        "classify",
        "--pencil",
        pencil.to_str().unwrap(),
        "--point",
        point.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn canonical_form_maps_to_spin_disk() {
    let pencil = fixture("pair_g2d2.json");
    let out = spectrex(&["canonical-g2d2", "--pencil", pencil.to_str().unwrap()]);
    assert!(out.status.success());
    let v = json(&out);
    let b = &v["image"]["mats"];
    let entry = |i: usize, r: usize, c: usize| b[i][r][c].as_f64().unwrap();
    assert!((entry(0, 0, 0) - 1.0).abs() < 1e-10 && (entry(0, 1, 1) + 1.0).abs() < 1e-10);
    assert!((entry(1, 0, 1) - 1.0).abs() < 1e-10 && entry(1, 0, 0).abs() < 1e-10);
}
