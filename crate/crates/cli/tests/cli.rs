use std::path::Path;
use std::process::{Command, Output};

fn axifree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_axifree")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn profile_writes_header_and_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("profile.csv");
    let res = axifree(&["profile", "--eps", "0.05", "--xmax", "2", "--samples", "41", "--out", path(&out)]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    let header: serde_json::Value = serde_json::from_str(lines.next().unwrap().trim_start_matches("# ")).unwrap();
    for key in ["eps", "t_eps", "e_eps", "delta_eps"] {
        assert!(header[key].is_number(), "{key}");
    }
    assert!(header["e_eps"].as_f64().unwrap() < 4.0);
    assert_eq!(lines.next(), Some("x,H,Hp"));
    assert_eq!(lines.count(), 41);
}

#[test]
fn catenoid_samples_are_minimal() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cat.csv");
    let res = axifree(&["catenoid", "--dim", "3", "--scale", "1", "--rmax", "10", "--samples", "2000", "--out", path(&out)]);
    assert!(res.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<Vec<f64>> =
        text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 2000);
    let last = rows.last().unwrap();
    assert!((last[1] - 10f64.acosh()).abs() < 1e-12);
    assert!(rows[10..rows.len() - 1].iter().all(|r| r[2].abs() < 1e-3));
    let bad = axifree(&["catenoid", "--dim", "4", "--convention", "asymptotic", "--scale", "1", "--rmax", "0.1", "--out", path(&out)]);
    assert_eq!(bad.status.code(), Some(3));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"eps": 0.1, "nx": 4, "colour": "red"}"#).unwrap();
    let res = axifree(&["pipeline", "--config", path(&cfg)]);
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("nx") && err.contains("colour"), "{err}");
    std::fs::write(&cfg, r#"{"eps": -1}"#).unwrap();
    assert_eq!(axifree(&["relax", "--config", path(&cfg), "--out", path(dir.path())]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(axifree(&["mpass", "--config", path(&missing), "--out", path(dir.path())]).status.code(), Some(2));
    assert_eq!(axifree(&["relax", "--init", "file", "--out", path(dir.path())]).status.code(), Some(2));
    assert_eq!(axifree(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn stages_run_from_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"a": 6, "nr": 48, "nz": 40}"#).unwrap();
    let relaxed = dir.path().join("relax");
    let res = axifree(&["relax", "--config", path(&cfg), "--init", "omega", "--snapshot-every", "2000", "--out", path(&relaxed)]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(relaxed.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["steady"], true);
    let energies = report["energies"].as_array().unwrap();
    assert!(energies.windows(2).all(|w| w[1].as_f64().unwrap() <= w[0].as_f64().unwrap() * (1.0 + 1e-10)));
    assert!(std::fs::read_dir(&relaxed).unwrap().filter_map(|e| e.ok()).any(|e| {
        e.file_name().to_string_lossy().starts_with("snapshot_")
    }));

    let u1 = relaxed.join("final.bin");
    let again = dir.path().join("again");
    let res = axifree(&["relax", "--config", path(&cfg), "--init", "file", "--field", path(&u1), "--out", path(&again)]);
    assert!(res.status.success());

    let fit = dir.path().join("fit.json");
    let res = axifree(&["fbfit", "--in", path(&u1), "--side", "minus", "--model", "log", "--out", path(&fit)]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let fit: serde_json::Value = serde_json::from_slice(&std::fs::read(&fit).unwrap()).unwrap();
    // the stable state has a nearly horizontal interface
    assert!(fit["params"]["k"].as_f64().unwrap().abs() < 0.1);

    let res = axifree(&["fbfit", "--in", path(&u1), "--model", "power", "--out", path(&dir.path().join("p.json"))]);
    assert_eq!(res.status.code(), Some(3));
    let res = axifree(&["blowup", "--in", path(&dir.path().join("none.bin")), "--out", path(dir.path())]);
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("verify.json");
    let res = axifree(&["verify", "--out", path(&out)]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stdout));
    let checks: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert!(checks.as_array().unwrap().len() >= 10);
}
