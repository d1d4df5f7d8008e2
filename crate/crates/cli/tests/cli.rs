use std::path::Path;
use std::process::{Command, Output};

use oddeec::{generate_packet, preset, Codec};

fn oddeec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oddeec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key)?.strip_prefix(" = "))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

fn build_table(dir: &Path, config: &str, seed: &str) -> String {
    let path = dir.join(format!("{config}.oet")).display().to_string();
    stdout(&oddeec(&["table", "build", "--config", config, "--seed", seed, "--out", &path]));
    path
}

#[test]
fn tune_reports_a_safe_length() {
    let out = stdout(&oddeec(&["tune", "--length", "12000", "--theta-min", "0.001", "--theta-max", "0.01"]));
    let r: usize = field(&out, "r").parse().unwrap();
    assert!(r.abs_diff(6000) <= 500);
    assert_eq!(field(&out, "safe"), "true");
}

#[test]
fn encode_matches_the_library() {
    let packet = generate_packet(12_000, 9).unwrap();
    let hex = packet.bits().to_hex();
    let out = stdout(&oddeec(&["encode", "--config", "oddeec-s", "--seed", "4", "--packet", &hex]));
    let codec = Codec::new(&preset("oddeec-s", 4).unwrap(), 12_000).unwrap();
    assert_eq!(out.trim(), codec.encode(&packet).unwrap().bits().to_hex());
}

#[test]
fn decode_round_trip_and_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let table = build_table(dir.path(), "oddeec-c", "1");
    let packet = generate_packet(12_000, 2).unwrap();
    let hex = packet.bits().to_hex();
    let cw = stdout(&oddeec(&["encode", "--packet", &hex]));
    let cw = cw.trim();

    let clean = stdout(&oddeec(&["decode", "--packet", &hex, "--codeword", cw, "--table", &table]));
    assert_eq!(field(&clean, "phi"), "0,0");
    assert_eq!(field(&clean, "theta_hat").parse::<f64>().unwrap() as f32, 1e-4f32);

    // Flip the top bit of every 50th byte: 30 errors, BER 0.0025.
    let mut bytes: Vec<char> = hex.chars().collect();
    for i in (0..bytes.len()).step_by(100) {
        let v = bytes[i].to_digit(16).unwrap() ^ 0x8;
        bytes[i] = char::from_digit(v, 16).unwrap();
    }
    let noisy: String = bytes.into_iter().collect();
    let est = stdout(&oddeec(&["decode", "--packet", &noisy, "--codeword", cw, "--table", &table]));
    let theta: f64 = field(&est, "theta_hat").parse().unwrap();
    assert!(theta > 1e-4 && theta <= 0.06, "{theta}");
}

#[test]
fn table_inspect_reports_geometry() {
    let dir = tempfile::tempdir().unwrap();
    let table = build_table(dir.path(), "oddeec-c80", "1");
    let out = stdout(&oddeec(&["table", "inspect", "--table", &table]));
    assert_eq!(field(&out, "resolutions"), "2");
    assert_eq!(field(&out, "entries"), "1681");
    assert_eq!(field(&out, "compat_dims"), "[20, 20]");
    assert_eq!(field(&out, "compat_payload_bytes"), "1600");
}

#[test]
fn bench_csv_shape_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let table = build_table(dir.path(), "oddeec-c", "3");
    let run = |name: &str| {
        let out = dir.path().join(name);
        let out_s = out.display().to_string();
        stdout(&oddeec(&[
            "bench", "--config", "oddeec-c", "--length", "12000", "--theta-min", "0.001", "--theta-max", "0.05",
            "--theta-count", "5", "--trials", "50", "--seed", "3", "--table", &table, "--out", &out_s,
        ]));
        std::fs::read(out).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    let text = String::from_utf8(a).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "theta,rmse,logmse,mean_estimate,saturation_rate,trials");
    assert_eq!(lines.len(), 6);
    assert!(lines[1..].iter().all(|l| l.ends_with(",50")));
}

#[test]
fn bench_to_stdout_with_theta_list() {
    let out = stdout(&oddeec(&[
        "bench", "--config", "oddeec-c80", "--theta-list", "0.002,0.02", "--trials", "20",
    ]));
    assert_eq!(out.lines().count(), 3);
    assert!(out.lines().nth(1).unwrap().starts_with("2.00000000e-3,"));
}

#[test]
fn config_file_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.cfg");
    std::fs::write(&path, preset("oddeec-s", 8).unwrap().to_text()).unwrap();
    let packet = generate_packet(12_000, 1).unwrap().bits().to_hex();
    let spec = format!("file:{}", path.display());
    let from_file = stdout(&oddeec(&["encode", "--config", &spec, "--packet", &packet]));
    let from_preset = stdout(&oddeec(&["encode", "--config", "oddeec-s", "--seed", "8", "--packet", &packet]));
    assert_eq!(from_file, from_preset);
}

#[test]
fn errors_exit_nonzero_with_a_diagnostic() {
    let cases: &[&[&str]] = &[
        &["bench", "--config", "oddeec-x", "--trials", "1"],
        &["bench", "--config", "file:/nonexistent/cfg", "--trials", "1"],
        &["bench", "--trials", "0", "--theta-list", "0.01"],
        &["bench", "--theta-list", "0.7", "--trials", "1"],
        &["encode", "--packet", "zz"],
        &["decode", "--packet", "00", "--codeword", "00"],
        &["table", "inspect", "--table", "/nonexistent/table.oet"],
        &["tune", "--theta-min", "0.02", "--theta-max", "0.01"],
        &["bench", "--theta-list", "0.01", "--theta-min", "0.001"],
    ];
    for args in cases {
        let out = oddeec(args);
        assert!(!out.status.success(), "{args:?} succeeded");
        assert!(!out.stderr.is_empty(), "{args:?} printed no diagnostic");
    }
}

#[test]
fn mismatched_table_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let table = build_table(dir.path(), "oddeec-c80", "1");
    let packet = generate_packet(12_000, 1).unwrap().bits().to_hex();
    let cw = stdout(&oddeec(&["encode", "--packet", &packet]));
    let out = oddeec(&["decode", "--packet", &packet, "--codeword", cw.trim(), "--table", &table]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("table"));
}

#[test]
fn validate_runs_selected_checks() {
    let out = stdout(&oddeec(&["validate", "--quick", "--check", "tuner", "--check", "transition"]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines.iter().all(|l| l.starts_with("PASS ")), "{out}");
}
