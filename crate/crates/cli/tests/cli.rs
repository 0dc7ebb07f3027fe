use std::fs;
use std::path::Path;

use assert_cmd::Command;
use ndelab_cli::output::{sha256_hex, RunManifest};
use serde_json::Value;

fn ndelab(dir: &Path) -> Command {
    let mut cmd = Command::cargo_bin("ndelab").unwrap();
    cmd.arg("--out-dir").arg(dir);
    cmd.env_remove(ndelab_cli::OUT_DIR_ENV);
    cmd
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn shoot_d0_reports_the_shooting_constant() {
    let dir = tempfile::tempdir().unwrap();
    ndelab(dir.path()).args(["shoot-d0", "--model", "nde50", "--zmax", "50", "--tol", "1e-4"]).assert().success();
    let v = json(&dir.path().join("shoot-d0.json"));
    let d = v["converged_param"].as_f64().unwrap();
    assert!((d - 0.0692).abs() < 1e-2);
    // thin adapter: identical to the library call
    let lib = ndelab::shooting::shoot_d0(50.0, 1e-4).unwrap();
    assert_eq!(d, lib.converged_param);
    assert_eq!(header(&dir.path().join("shoot-d0.csv")), "z,g,g1,g2,g3,g4");
}

#[test]
fn quintic_compacton_centre_row() {
    let dir = tempfile::tempdir().unwrap();
    ndelab(dir.path()).args(["compacton", "--explicit", "q55", "--grid", "1001"]).assert().success();
    let text = fs::read_to_string(dir.path().join("compacton.csv")).unwrap();
    let row = text.lines().find(|l| l.starts_with("0.0,")).unwrap();
    let f: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((f - 1.0 / 105.0).abs() < 1e-15);
}

#[test]
fn char_roots_writes_a_root_set() {
    let dir = tempfile::tempdir().unwrap();
    ndelab(dir.path()).args(["char-roots", "--alpha", "1/9"]).assert().success();
    let v = json(&dir.path().join("char-roots.json"));
    assert_eq!(v["root_set"]["roots"].as_array().unwrap().len(), 5);
    let m = json(&dir.path().join("char-roots.manifest.json"));
    assert_eq!(m["parameters"]["alpha"].as_f64().unwrap(), 1.0 / 9.0);
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    ndelab(dir.path()).arg("no-such-command").assert().code(1);
    ndelab(dir.path()).args(["shoot-d0", "--bogus", "1"]).assert().code(1);
    // α outside (0, 1/4)
    ndelab(dir.path()).args(["char-roots", "--alpha", "0.3"]).assert().code(1);
    ndelab(dir.path()).args(["blowup-profile", "--alpha", "1/4"]).assert().code(1);
    ndelab(dir.path()).args(["solve-shock", "--model", "uniform_nondiv", "--nu", "1e-3"]).assert().code(1);
    ndelab(dir.path()).args(["--jobs", "0", "char-roots"]).assert().code(1);
}

#[test]
fn solver_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    ndelab(dir.path()).args(["rh", "--minus", "1,0,0,0,3", "--plus", "0,0,0,0,?"]).assert().code(2);
    // a bracket whose ends share a fate
    ndelab(dir.path()).args(["robustness-probe", "--third-order", "1", "--bracket", "5,5.1"]).assert().code(2);
}

#[test]
fn help_exits_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    ndelab(dir.path()).arg("--help").assert().code(0);
}

#[test]
fn frozen_headers() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ndelab(d).args(["solve-shock", "--domain", "30"]).assert().success();
    assert_eq!(header(&d.join("solve-shock.csv")), "z,g,g1,g2,g3,g4");
    ndelab(d).args(["robustness-probe", "--y0-min", "3", "--y0-max", "3.3", "--y0-step", "0.1"]).assert().success();
    assert_eq!(header(&d.join("robustness-probe.csv")), "y0,mismatch");
    ndelab(d)
        .args(["entropy-test", "--model", "uniform_nondiv", "--domain", "30", "--shock", "plus"])
        .assert()
        .success();
    assert_eq!(header(&d.join("entropy-test.csv")), "delta,distance");
    assert_eq!(json(&d.join("entropy-test.json"))["verdict"], "ENTROPY");
}

#[test]
fn manifest_digests_match_outputs_and_reruns_are_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [a.path(), b.path()] {
        ndelab(d).args(["t5-shock", "--a", "1", "--b", "0.5"]).assert().success();
    }
    let read = |d: &Path| -> RunManifest {
        serde_json::from_str(&fs::read_to_string(d.join("t5-shock.manifest.json")).unwrap()).unwrap()
    };
    let (ma, mb) = (read(a.path()), read(b.path()));
    assert_eq!(ma.subcommand, "t5-shock");
    assert_eq!(ma.outputs.len(), 2);
    for f in &ma.outputs {
        assert_eq!(sha256_hex(&fs::read(a.path().join(&f.path)).unwrap()), f.sha256);
    }
    assert_eq!(ma.outputs, mb.outputs);
    assert_eq!(ma.parameters, mb.parameters);
    assert!(ma.wall_time_s > 0.0);
    // only the artifacts and the manifest remain; no temporary files
    assert_eq!(fs::read_dir(a.path()).unwrap().count(), 3);
}

#[test]
fn config_file_sits_between_flags_and_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# overrides\nalpha = 3/17\nc0 = 2\n").unwrap();
    ndelab(dir.path()).arg("--config").arg(&cfg).arg("bundle-dims").assert().success();
    let m = json(&dir.path().join("bundle-dims.manifest.json"));
    assert_eq!(m["parameters"]["alpha"].as_f64().unwrap(), 3.0 / 17.0);
    assert_eq!(m["parameters"]["c0"].as_f64().unwrap(), 2.0);
    assert_eq!(m["inputs"][0]["sha256"].as_str().unwrap(), sha256_hex(&fs::read(&cfg).unwrap()));
    ndelab(dir.path()).arg("--config").arg(&cfg).args(["bundle-dims", "--alpha", "1/19"]).assert().success();
    let m = json(&dir.path().join("bundle-dims.manifest.json"));
    assert_eq!(m["parameters"]["alpha"].as_f64().unwrap(), 1.0 / 19.0);
    let dims: Vec<u64> = json(&dir.path().join("bundle-dims.json"))["bundles"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["dimension"].as_u64().unwrap())
        .collect();
    assert_eq!(dims, vec![4, 5, 4, 3, 1, 2]);
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let mut cmd = Command::cargo_bin("ndelab").unwrap();
    cmd.env(ndelab_cli::OUT_DIR_ENV, dir.path()).args(["subspace-check", "--coeffs", "1,77,1876,14400", "--order", "7"]);
    cmd.assert().success();
    let e = json(&dir.path().join("subspace-check.json"))["out_of_subspace_energy"].as_f64().unwrap();
    assert!(e < 1e-10);
}

#[test]
fn job_count_does_not_change_results() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["global-extension-scan", "--f4-min", "-2", "--f4-max", "2", "--f4-step", "0.5"];
    ndelab(a.path()).arg("--jobs").arg("1").args(args).assert().success();
    ndelab(b.path()).arg("--jobs").arg("3").args(args).assert().success();
    let read = |d: &Path| fs::read(d.join("global-extension-scan.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    let v = json(&a.path().join("global-extension-scan.json"));
    assert_eq!(v["bounded_candidates"], 0);
}

#[test]
fn rh_with_negative_and_fractional_entries() {
    let dir = tempfile::tempdir().unwrap();
    ndelab(dir.path()).args(["rh", "--minus", "-1,2,-1/2,3,-4", "--plus", "1,2,1/2,3,4"]).assert().success();
    let v = json(&dir.path().join("rh.json"));
    assert_eq!(v["tuples"][0]["residual"].as_f64().unwrap(), 0.0);
}
