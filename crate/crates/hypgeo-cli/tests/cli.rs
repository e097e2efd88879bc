use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hypgeo(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypgeo"))
        .args(args)
        .arg("--output-dir")
        .arg(dir)
        .env_remove("HYPGEO_THREADS")
        .output()
        .unwrap()
}

fn report(dir: &Path) -> Value {
    serde_json::from_slice(&fs::read(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn pentagon_residuals_are_tiny() {
    let d = tempfile::tempdir().unwrap();
    let out = hypgeo(d.path(), &["polygon", "pentagon", "--a", "1.2", "--b", "1.3"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(stdout["max_residual"].as_f64().unwrap() < 1e-10);
    let r = report(d.path());
    assert_eq!(r["result"], stdout);
    assert_eq!(r["run"]["command"], "polygon pentagon");
    assert_eq!(r["run"]["seed"], 42);
    assert_eq!(r["run"]["parameters"]["a"], 1.2);
}

#[test]
fn regular_hexagon_sides() {
    let d = tempfile::tempdir().unwrap();
    let out = hypgeo(d.path(), &["polygon", "hexagon", "--regular"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let want = 2.0_f64.acosh();
    for s in v["sides"].as_array().unwrap() {
        assert!((s.as_f64().unwrap() - want).abs() < 1e-12);
    }
}

#[test]
fn usage_errors_exit_64() {
    let d = tempfile::tempdir().unwrap();
    for args in [
        &["polygon", "pentagon", "--a", "1.2"][..],
        &["polygon", "hexagon", "--regular", "--a", "1"],
        &["verify-all", "--suite", "nonsense"],
        &["polygon", "pentagon", "--a", "1", "--b", "1", "--format", "pdf"],
        &[],
    ] {
        assert_eq!(hypgeo(d.path(), args).status.code(), Some(64), "{args:?}");
    }
}

#[test]
fn thread_cap_is_validated() {
    let d = tempfile::tempdir().unwrap();
    let bad = Command::new(env!("CARGO_BIN_EXE_hypgeo"))
        .args(["polygon", "hexagon", "--regular"])
        .env("HYPGEO_THREADS", "lots")
        .current_dir(d.path())
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(64));
    let ok = Command::new(env!("CARGO_BIN_EXE_hypgeo"))
        .args(["polygon", "hexagon", "--regular"])
        .env("HYPGEO_THREADS", "2")
        .current_dir(d.path())
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn domain_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    let out = hypgeo(d.path(), &["polygon", "pentagon", "--a", "0.1", "--b", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("infeasible"));
    let out = hypgeo(d.path(), &["covers", "fixfree", "--word", "xyz"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_files() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.json");
    let out_dir = d.path().join("out");
    fs::write(
        &cfg,
        serde_json::json!({
            "command": "polygon pentagon",
            "parameters": {"a": 1.2, "b": 1.3},
            "seed": 11,
            "output_dir": out_dir,
            "formats": ["json", "csv"],
        })
        .to_string(),
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_hypgeo")).arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report(&out_dir)["run"]["seed"], 11);
    let csv = fs::read_to_string(out_dir.join("tables/residuals.csv")).unwrap();
    assert!(csv.starts_with("# run: {") && csv.contains("\"seed\":11"));

    fs::write(&cfg, r#"{"command": "polygon pentagon", "colour": "red"}"#).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_hypgeo")).arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn fixfree_estimate_and_histogram() {
    let d = tempfile::tempdir().unwrap();
    let out = hypgeo(
        d.path(),
        &["covers", "fixfree", "--word", "a", "--n", "500", "--trials", "10000", "--seed", "7", "--format", "json,svg"],
    );
    assert_eq!(out.status.code(), Some(0));
    let r = report(d.path());
    let res = &r["result"];
    let (est, se, lim) =
        (res["estimate"].as_f64().unwrap(), res["stderr"].as_f64().unwrap(), res["limit"].as_f64().unwrap());
    assert!((lim - (-1.0_f64).exp()).abs() < 1e-15);
    assert!((est - lim).abs() <= 3.0 * se);
    assert_eq!(r["run"]["seed"], 7);
    let svg = fs::read_to_string(d.path().join("plots/fixed_points.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("&quot;seed&quot;:7"));
    assert!(!svg.contains("<metadata>"));
}

#[test]
fn timestamp_only_on_request() {
    let d = tempfile::tempdir().unwrap();
    let out = hypgeo(d.path(), &["surface", "bounds", "--format", "svg", "--timestamp"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(fs::read_to_string(d.path().join("plots/bounds.svg")).unwrap().contains("<metadata>generated"));
}

#[test]
fn systole_reports_per_word_diagnostics() {
    let d = tempfile::tempdir().unwrap();
    // below the base systole nothing is constrained
    let out = hypgeo(d.path(), &["covers", "systole", "--eps", "3.5", "--n", "300", "--trials", "2000"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(d.path());
    assert_eq!(r["result"]["per_word"].as_array().unwrap().len(), 0);
    assert_eq!(r["result"]["systole"]["estimate"], 1.0);

    let out = hypgeo(d.path(), &["covers", "systole", "--eps", "4", "--n", "300", "--trials", "2000"]);
    assert_eq!(out.status.code(), Some(0));
    let words = report(d.path())["result"]["per_word"].as_array().unwrap().clone();
    assert_eq!(words.len(), 3);
    for w in words {
        assert_eq!(w["forbidden_below"], 2);
        assert!(w["violation"]["estimate"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn verify_all_single_suite() {
    let d = tempfile::tempdir().unwrap();
    let out = hypgeo(d.path(), &["verify-all", "--suite", "pants-maps", "--delta", "1e-6", "--trials", "20"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = report(d.path());
    let suites = r["result"]["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 1);
    assert_eq!(suites[0]["suite"], "pants-maps");
    assert_eq!(suites[0]["trials"], 20);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("pants-maps   PASS"));
}

#[test]
fn verify_all_failure_exits_1_and_names_suite() {
    let d = tempfile::tempdir().unwrap();
    // one trial cannot land within three (zero) standard errors of the limit
    let out = hypgeo(d.path(), &["verify-all", "--suite", "covers", "--suite", "cheng", "--trials", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("failing suites: covers"), "{stdout}");
    assert!(!stdout.contains("failing suites: covers, cheng"));
    assert_eq!(report(d.path())["result"]["passed"], false);
}

#[test]
fn experiment_commands_write_artifacts() {
    let d = tempfile::tempdir().unwrap();
    let all = "json,csv,svg";
    for (args, plot, table) in [
        (&["metrics", "profile", "--points", "300"][..], "curvature", "profile"),
        (&["maps", "distortion", "--grid", "40", "--heatmap", "20"], "distortion", "distortion"),
        (&["oracle", "spectrum", "--ell", "4", "--w", "2", "--intervals", "512"], "eigenfunctions", "eigenvalues"),
        (&["surface", "bounds", "--max-piece-genus", "4"], "bounds", "bounds"),
        (&["covers", "histogram", "--word", "ab", "--n", "50", "--trials", "200"], "cycle_lengths", "cycle_lengths"),
    ] {
        let mut a = args.to_vec();
        a.extend(["--format", all]);
        let out = hypgeo(d.path(), &a);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(d.path().join(format!("plots/{plot}.svg")).exists(), "{args:?}");
        assert!(d.path().join(format!("tables/{table}.csv")).exists(), "{args:?}");
    }
    for args in [
        &["maps", "bounds", "--delta", "0.01", "--grid", "30"][..],
        &["collar", "mass", "--lambda", "0.2", "--j", "2", "--ell", "3", "--w1", "0.5", "--w2", "2"],
        &["surface", "glue", "--g", "10", "--k", "4"],
        &["polygon", "trirectangle", "--a", "0.5", "--b", "0.6"],
    ] {
        assert_eq!(hypgeo(d.path(), args).status.code(), Some(0), "{args:?}");
    }
}
