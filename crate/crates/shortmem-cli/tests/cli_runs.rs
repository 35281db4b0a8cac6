//! End-to-end runs of every CLI command on small configurations.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("shortmem_cli_{}_{}", std::process::id(), tag));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(command: &str, cfg_text: &str, dir: &Path) -> Output {
    let cfg_path = dir.join("run.cfg");
    fs::write(&cfg_path, format!("{cfg_text}out_dir = {}\n", dir.join("out").display()))
        .unwrap();
    Command::new(env!("CARGO_BIN_EXE_shortmem"))
        .arg(command)
        .arg(&cfg_path)
        .output()
        .unwrap()
}

fn assert_files(dir: &Path, names: &[&str]) {
    for name in names {
        let path = dir.join("out").join(name);
        assert!(path.is_file(), "missing artifact {}", path.display());
        let text = fs::read_to_string(&path).unwrap();
        assert!(!text.is_empty());
        if name.ends_with(".csv") {
            let header = text.lines().next().unwrap();
            assert!(header.contains(','), "csv header missing in {name}");
            assert!(!text.contains('\r'), "expected LF line endings in {name}");
        }
    }
}

#[test]
fn simulate_writes_ensemble() {
    let dir = scratch("simulate");
    let out = run(
        "simulate",
        "coeffs.kind = identity\nmodel.kind = gaussian\nmodel.param = 1.0\ngrid = 16,32\nreplicates = 4\nseed = 5\n",
        &dir,
    );
    assert!(out.status.success());
    assert_files(&dir, &["ensemble.csv", "run_meta.json"]);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn couple_writes_report_and_requires_bm() {
    let dir = scratch("couple");
    let out = run(
        "couple",
        "coeffs.kind = geometric\ncoeffs.param = 0.5\ncoeffs.window = 48\nmodel.kind = bm\ngrid = 16,32,64\nreplicates = 6\nseed = 5\n",
        &dir,
    );
    assert!(out.status.success());
    assert_files(&dir, &["coupling.json", "coupling.csv"]);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("out/coupling.json")).unwrap())
            .unwrap();
    assert_eq!(json["total_sum"], serde_json::json!(3.0));

    // identity coefficients give all-zero coupling columns
    let dir2 = scratch("couple_id");
    let out2 = run(
        "couple",
        "coeffs.kind = identity\nmodel.kind = bm\ngrid = 16,32,64\nreplicates = 5\nseed = 2\n",
        &dir2,
    );
    assert!(out2.status.success());
    let csv = fs::read_to_string(dir2.join("out/coupling.csv")).unwrap();
    for line in csv.lines().skip(1).filter(|l| l.contains(",coupling,")) {
        let mut cols = line.split(',');
        let (n, name) = (cols.next().unwrap(), cols.next().unwrap());
        assert_eq!(name, "coupling");
        for v in cols {
            assert_eq!(v.parse::<f64>().unwrap(), 0.0, "n = {n}");
        }
    }

    // wrong model kind is a config error with machine-readable output
    let dir3 = scratch("couple_bad");
    let out3 = run(
        "couple",
        "coeffs.kind = identity\nmodel.kind = gaussian\nmodel.param = 1.0\ngrid = 16\nreplicates = 2\nseed = 5\n",
        &dir3,
    );
    assert!(!out3.status.success());
    let err: serde_json::Value =
        serde_json::from_slice(&out3.stderr).expect("stderr is json");
    assert_eq!(err["kind"], "config");
    for d in [dir, dir2, dir3] {
        let _ = fs::remove_dir_all(&d);
    }
}

#[test]
fn counterexample_writes_three_tables() {
    let dir = scratch("counterexample");
    let out = run(
        "counterexample",
        "coeffs.kind = staircase\ncoeffs.param = 4\nmodel.kind = gaussian\nmodel.param = 1.0\ngrid = 16\nreplicates = 1\nseed = 5\n",
        &dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_files(&dir, &["variance_table.csv", "projection_table.csv", "slope_table.csv"]);
    let var = fs::read_to_string(dir.join("out/variance_table.csv")).unwrap();
    // levels 1..=3 for levels = 4
    assert_eq!(var.lines().count(), 4);
    for line in var.lines().skip(1) {
        assert!(line.ends_with(",true,true"), "bound columns: {line}");
    }
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn variance_profile_command() {
    let dir = scratch("variance");
    let out = run(
        "variance",
        "coeffs.kind = geometric\ncoeffs.param = 0.5\ncoeffs.window = 48\nmodel.kind = gaussian\nmodel.param = 1.0\ngrid = 4,16,64\nreplicates = 1\nseed = 5\n",
        &dir,
    );
    assert!(out.status.success());
    assert_files(&dir, &["profile.csv"]);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn weighted_command_reports_pass() {
    let dir = scratch("weighted");
    let out = run(
        "weighted",
        "coeffs.kind = geometric\ncoeffs.param = 0.5\ncoeffs.window = 48\nmodel.kind = gaussian\nmodel.param = 1.0\ngrid = 256\nreplicates = 400\nseed = 5\nweight = linear\n",
        &dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.join("out/weighted.csv")).unwrap();
    let row = csv.lines().nth(1).unwrap();
    assert!(row.ends_with("true"), "row: {row}");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn coboundary_command_residuals() {
    let dir = scratch("coboundary");
    let out = run(
        "coboundary",
        "coeffs.kind = causal-geometric\ncoeffs.param = 0.5\ncoeffs.window = 30\nmodel.kind = gaussian\nmodel.param = 1.0\ngrid = 512\nreplicates = 1\nseed = 5\nm = 3\n",
        &dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_files(&dir, &["coboundary.csv", "coboundary_summary.json"]);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("out/coboundary_summary.json")).unwrap())
            .unwrap();
    let residual = json["identity_residual"].as_f64().unwrap();
    let scale = json["partial_sum_scale"].as_f64().unwrap();
    assert!(residual < 1e-10 * (1.0 + scale));
    assert!(json["max_increment_gap"].as_f64().unwrap() < 1e-12);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn diagnose_command_checks_identities() {
    let dir = scratch("diagnose");
    let out = run(
        "diagnose",
        "coeffs.kind = geometric\ncoeffs.param = 0.5\ncoeffs.window = 20\nmodel.kind = exponential\nmodel.param = 1.0\ngrid = 128\nreplicates = 40\nseed = 5\nm = 6\ntol.eps_tail = 1\n",
        &dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("out/diagnostics.json")).unwrap())
            .unwrap();
    assert!(json["identity_max_residual"].as_f64().unwrap() < 1e-8);
    assert_eq!(json["truncation"]["pass"], serde_json::json!(true));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn usage_errors_are_machine_readable() {
    let out = Command::new(env!("CARGO_BIN_EXE_shortmem")).arg("nonsense").output().unwrap();
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["kind"], "usage");

    let dir = scratch("badcfg");
    let cfg = dir.join("bad.cfg");
    fs::write(&cfg, "coeffs.kind = identity\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_shortmem"))
        .arg("simulate")
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["kind"], "config");
    let _ = fs::remove_dir_all(&dir);
}
