//! Acceptance run: one line per criterion at full sample sizes.
//!
//! Two criteria are expected to fail for reasons documented in the README
//! ("Known deviations"). They are still evaluated at their stated
//! thresholds and reported as FAIL; only an unexpected failure, or an error,
//! makes this target exit non-zero. Set `ODDEEC_ACCEPTANCE_STRICT=1` to fail
//! on any red criterion.

use std::process::{Command, ExitCode};
use std::time::Instant;

use oddeec::validate::{self, Check, Scale};

const KNOWN_DEVIATIONS: [&str; 2] = ["variance prediction vs simulation", "resolution ordering"];

fn oddeec(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_oddeec"))
        .args(args)
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

/// The same `bench` and `table build` invocations, run twice through the CLI.
fn cli_replay() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let run_bench = || {
        oddeec(&[
            "bench", "--config", "oddeec-c", "--length", "12000", "--theta-count", "14", "--theta-min", "0.001",
            "--theta-max", "0.05", "--trials", "100", "--seed", "21",
        ])
    };
    let build = |name: &str| {
        let path = dir.path().join(name);
        oddeec(&["table", "build", "--config", "oddeec-c", "--seed", "21", "--out", path.to_str().unwrap()]);
        std::fs::read(path).unwrap()
    };
    let csv_same = run_bench() == run_bench();
    let table_same = build("a.oet") == build("b.oet");
    let inner = validate::replay(200).expect("replay runs");
    Check {
        name: inner.name,
        passed: csv_same && table_same && inner.passed,
        detail: format!("cli csv identical {csv_same}, cli table identical {table_same}; in-process: {}", inner.detail),
    }
}

fn main() -> ExitCode {
    let strict = std::env::var("ODDEEC_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let s = Scale::full();
    let criteria: Vec<Box<dyn Fn() -> Check>> = vec![
        Box::new(move || validate::saturation_probability(s.saturation_seeds).unwrap()),
        Box::new(move || validate::xor_identity(s.xor_cases).unwrap()),
        Box::new(|| validate::likelihood_normalization().unwrap()),
        Box::new(move || validate::transition_oracle(s.transition_pairs).unwrap()),
        Box::new(move || validate::mom_prediction(s.mom_trials).unwrap()),
        Box::new(|| validate::tuner().unwrap()),
        Box::new(move || validate::resolution_ordering(s.bench_trials).unwrap()),
        Box::new(|| validate::table_geometry().unwrap()),
        Box::new(move || validate::decode_latency(s.lookups, s.decodes).unwrap()),
        Box::new(cli_replay),
    ];

    let mut unexpected = 0;
    let total = criteria.len();
    for (i, run) in criteria.into_iter().enumerate() {
        let t = Instant::now();
        let check = run();
        let secs = t.elapsed().as_secs_f64();
        let known = KNOWN_DEVIATIONS.contains(&check.name);
        let verdict = match (check.passed, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known deviation)",
            (false, false) => "FAIL",
        };
        if !check.passed && (strict || !known) {
            unexpected += 1;
        }
        println!("[{:>2}/{total}] {verdict:<22} {} ({secs:.1}s): {}", i + 1, check.name, check.detail);
    }
    if unexpected > 0 {
        println!("{unexpected} criteria failed");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
