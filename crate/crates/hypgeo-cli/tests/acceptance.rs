//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the lines always reach the test log.

use std::fs;
use std::process::{Command, ExitCode};
use std::time::Instant;

use hypgeo::verify::{run_suite, Suite, VerifyConfig};

struct Outcome {
    criterion: usize,
    name: String,
    passed: bool,
    secs: f64,
    budget: f64,
    detail: String,
}

fn suite_criterion(k: usize, s: Suite) -> Outcome {
    let cfg = VerifyConfig::default();
    let start = Instant::now();
    let rep = run_suite(s, &cfg);
    let secs = start.elapsed().as_secs_f64();
    let failing: Vec<&str> = rep.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    let detail = if failing.is_empty() {
        format!("{} checks", rep.checks.len())
    } else {
        format!("failing: {}", failing.join("; "))
    };
    Outcome {
        criterion: k,
        name: s.name().to_string(),
        passed: rep.passed && secs < s.budget_secs(),
        secs,
        budget: s.budget_secs(),
        detail,
    }
}

fn determinism() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().expect("temporary directory");
    let out = dir.path().join("run");
    let run = || -> Result<Vec<u8>, String> {
        let status = Command::new(env!("CARGO_BIN_EXE_hypgeo"))
            .args(["verify-all", "--seed", "42", "--output-dir"])
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("verify-all exited with {}", status.status));
        }
        let bytes = fs::read(out.join("report.json")).map_err(|e| e.to_string())?;
        fs::remove_dir_all(&out).map_err(|e| e.to_string())?;
        Ok(bytes)
    };
    let (passed, detail) = match (run(), run()) {
        (Ok(a), Ok(b)) if a == b => (true, format!("{} identical bytes", a.len())),
        (Ok(a), Ok(b)) => (false, format!("reports differ ({} vs {} bytes)", a.len(), b.len())),
        (Err(e), _) | (_, Err(e)) => (false, e),
    };
    Outcome {
        criterion: 9,
        name: "verify-all determinism".into(),
        passed,
        secs: start.elapsed().as_secs_f64(),
        budget: f64::INFINITY,
        detail,
    }
}

fn main() -> ExitCode {
    let mut outcomes: Vec<Outcome> = Suite::ALL.iter().enumerate().map(|(i, &s)| suite_criterion(i + 1, s)).collect();
    outcomes.push(determinism());
    println!();
    for o in &outcomes {
        let budget = if o.budget.is_finite() { format!(" / {:.0} s", o.budget) } else { String::new() };
        println!(
            "criterion {} {:<24} {}  {:.2} s{}  {}",
            o.criterion,
            o.name,
            if o.passed { "PASS" } else { "FAIL" },
            o.secs,
            budget,
            o.detail
        );
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("acceptance: {} passed, {} failed", outcomes.len() - failed, failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
