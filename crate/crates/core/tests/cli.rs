use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sherd_core::contour::ContourSet;
use sherd_core::io::write_contour_set;
use sherd_core::synthetic::{generate, SyntheticConfig};

fn sherd(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sherd"));
    cmd.args(args).env_remove("SHERD_OUT_DIR");
    cmd
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("spawn sherd")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn small_raw(dir: &Path, instances: usize) -> std::path::PathBuf {
    let data = generate(&SyntheticConfig {
        instances,
        ..Default::default()
    })
    .unwrap();
    write_contour_set(dir, &data.set).unwrap()
}

#[test]
fn preprocess_components_cluster_cut() {
    let tmp = tempfile::tempdir().unwrap();
    let raw = small_raw(&tmp.path().join("raw"), 1);
    let out = tmp.path().join("out");
    let out_s = out.to_str().unwrap();

    let o = run(sherd(&["preprocess", raw.to_str().unwrap(), "-d", out_s]).arg("--eps-rel").arg("1e-3"));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("manifest.json").is_file());
    assert!(out.join("reports.json").is_file());

    let o = run(&mut sherd(&["components", "-d", out_s]));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("computed"));
    let o = run(&mut sherd(&["components", "-d", out_s]));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("reused"));

    let o = run(&mut sherd(&["cluster", "-d", out_s, "--preset", "WNDCNSM(3/4,1/4)"]));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("ccf"));

    let o = run(&mut sherd(&["cut", "-d", out_s, "--clusters", "3"]));
    assert!(o.status.success(), "{}", stderr(&o));
    let labels = fs::read_to_string(out.join("labels.csv")).unwrap();
    assert_eq!(labels.lines().count(), 1 + 6);
}

#[test]
fn unreadable_manifest_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope.json");
    let o = run(&mut sherd(&["preprocess", missing.to_str().unwrap(), "-d", tmp.path().to_str().unwrap()]));
    assert!(!o.status.success());
    assert!(stderr(&o).starts_with("sherd: "), "{}", stderr(&o));

    let garbage = tmp.path().join("garbage.json");
    fs::write(&garbage, "{ not json").unwrap();
    let o = run(&mut sherd(&["preprocess", garbage.to_str().unwrap(), "-d", tmp.path().to_str().unwrap()]));
    assert!(!o.status.success());
    assert!(stderr(&o).contains("malformed"), "{}", stderr(&o));
}

#[test]
fn single_contour_cannot_be_compared() {
    let tmp = tempfile::tempdir().unwrap();
    let data = generate(&SyntheticConfig {
        instances: 1,
        ..Default::default()
    })
    .unwrap();
    let two = ContourSet::new("two", data.set.contours[..2].to_vec()).unwrap();
    let raw = write_contour_set(&tmp.path().join("raw"), &two).unwrap();
    let mut manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(&raw).unwrap()).unwrap();
    manifest["contours"].as_array_mut().unwrap().truncate(1);
    fs::write(&raw, manifest.to_string()).unwrap();
    let out = tmp.path().join("out");
    let o = run(&mut sherd(&["preprocess", raw.to_str().unwrap(), "-d", out.to_str().unwrap()]));
    assert!(!o.status.success());
    assert!(stderr(&o).contains("need n >= 2"), "{}", stderr(&o));
    assert!(!out.join("manifest.json").exists());
}

#[test]
fn cluster_before_components_names_the_fix() {
    let tmp = tempfile::tempdir().unwrap();
    let raw = small_raw(&tmp.path().join("raw"), 1);
    let out = tmp.path().join("out");
    run(&mut sherd(&["preprocess", raw.to_str().unwrap(), "-d", out.to_str().unwrap()]));
    let o = run(&mut sherd(&["cluster", "-d", out.to_str().unwrap()]));
    assert!(!o.status.success());
    assert!(stderr(&o).contains("sherd components"), "{}", stderr(&o));
}

#[test]
fn unknown_preset_rejected() {
    let o = run(&mut sherd(&["cluster", "--preset", "XYZ"]));
    assert!(!o.status.success());
    assert!(stderr(&o).contains("XYZ"), "{}", stderr(&o));
}

#[test]
fn out_dir_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let raw = small_raw(&tmp.path().join("raw"), 1);
    let out = tmp.path().join("from-env");
    let o = run(sherd(&["preprocess", raw.to_str().unwrap()]).env("SHERD_OUT_DIR", &out));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("manifest.json").is_file());
}

#[test]
fn augment_counts_and_magnitude_limit() {
    let tmp = tempfile::tempdir().unwrap();
    let raw = small_raw(&tmp.path().join("raw"), 1);
    let out = tmp.path().join("aug");
    let o = run(&mut sherd(&["augment", raw.to_str().unwrap(), "-d", out.to_str().unwrap()]));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("42 contours"));

    let o = run(&mut sherd(&[
        "augment",
        raw.to_str().unwrap(),
        "-d",
        tmp.path().join("big").to_str().unwrap(),
        "--magnitude",
        "0.5",
    ]));
    assert!(!o.status.success());
    assert!(stderr(&o).contains("exceeds maximum"), "{}", stderr(&o));
}

#[test]
fn synth_then_agreement() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_str().unwrap();
    let o = run(&mut sherd(&["synth", "-d", dir, "--instances", "1"]));
    assert!(o.status.success(), "{}", stderr(&o));
    let typology = tmp.path().join("typology.csv");
    let o = run(&mut sherd(&["agreement", typology.to_str().unwrap(), typology.to_str().unwrap()]));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("100.00%"));
}
