use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qss_cli::{parse_config, CliError};

fn qss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qss"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn config_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs"))
}

#[test]
fn simulate_header_and_row() {
    let out = qss(&[
        "simulate",
        "--players",
        "4",
        "--rounds",
        "1000",
        "--seed",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "N,channel,param,eps_mean,rounds,n_valid,n_errors,empirical_rate,ci_half_width,analytic_rate,within_3sigma"
    );
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("4,noiseless,0,0,1000,"));
    assert!(lines[1].ends_with(",0,0,0,0,true"), "{}", lines[1]);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(
        &cfg,
        r#"{"mode": "simulate", "players": 3, "channel": "bit-flip", "p": 0.2, "rounds": 500}"#,
    )
    .unwrap();
    let out = qss(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--p",
        "0.3",
        "--players",
        "2",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let row = stdout(&out).lines().nth(1).unwrap().to_string();
    assert!(row.starts_with("2,bit-flip,0.3,0,500,"), "{row}");
}

#[test]
fn out_file_and_tsv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.tsv");
    let out = qss(&[
        "table1",
        "--p",
        "0.25",
        "--format",
        "tsv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    // The pretty table goes to stderr.
    assert!(String::from_utf8_lossy(&out.stderr).contains("P_error"));
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "phi1\tphi2\ta\tp_plus\tp_minus\tp_error"
    );
    assert!(text.contains("π/2\tπ/2\t-0.5\t0.25\t0.75\t0.25"), "{text}");
}

#[test]
fn exit_codes() {
    assert_eq!(
        qss(&[
            "simulate",
            "--players",
            "3",
            "--channel",
            "dephasing",
            "--p",
            "1.5"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        qss(&["simulate", "--players", "3", "--bogus"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        qss(&["simulate", "--config", "/nonexistent/qss.json"])
            .status
            .code(),
        Some(4)
    );
    let out = qss(&[
        "simulate",
        "--players",
        "3",
        "--rounds",
        "10",
        "--out",
        "/nonexistent/dir/x.csv",
    ]);
    assert_eq!(out.status.code(), Some(4));
    let out = qss(&[
        "oracle-check",
        "--max-players",
        "3",
        "--inject-fault",
        "completeness",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("completeness"));
    assert!(stdout(&out).contains("completeness,0.001"));
    assert_eq!(
        qss(&["oracle-check", "--max-players", "3"]).status.code(),
        Some(0)
    );
}

#[test]
fn out_of_range_message_names_bound() {
    let out = qss(&[
        "simulate",
        "--players",
        "3",
        "--channel",
        "dephasing",
        "--p",
        "1.5",
    ]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("p ∈ [0,1]"));
}

#[test]
fn sweep_budget_refusal() {
    let out = qss(&[
        "sweep",
        "--players",
        "2,3",
        "--channel",
        "dephasing",
        "--p",
        "0.1",
        "--empirical",
        "--rounds",
        "1000",
        "--budget",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = [
        "simulate",
        "--players",
        "5",
        "--channel",
        "dephasing",
        "--p",
        "0.05",
        "--rounds",
        "20000",
        "--seed",
        "7",
    ];
    let a = qss(&[&args[..], &["--threads", "1"]].concat());
    let b = qss(&[&args[..], &["--threads", "4"]].concat());
    let c = qss(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn shipped_configs_parse() {
    let mut seen = 0;
    for entry in fs::read_dir(config_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let text = fs::read_to_string(&path).unwrap();
            let spec =
                parse_config(&text).unwrap_or_else(|e: CliError| panic!("{}: {e}", path.display()));
            assert!(spec.cell_count() >= 1);
            seen += 1;
        }
    }
    assert!(seen >= 5);
}

#[test]
fn heterogeneous_config_reports_digest() {
    let path = config_dir().join("heterogeneous.json");
    let out = qss(&[
        "simulate",
        "--config",
        path.to_str().unwrap(),
        "--rounds",
        "2000",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let row = stdout(&out).lines().nth(1).unwrap().to_string();
    assert!(
        row.starts_with("4,mixed,dephasing(0.02);dephasing(1);depolarizing(0.1);noiseless,0,2000,"),
        "{row}"
    );
    // One fully dephasing link: the closed form is ½.
    assert!(row.contains(",0.5,"), "{row}");
}

#[test]
fn analytic_reports_oracle() {
    let path = config_dir().join("gate_jitter.json");
    let out = qss(&["analytic", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let oracle: f64 = row[6].parse().unwrap();
    let want = qss_core::gate_error_prob_jittered(6, 0.05, 0.02);
    assert!((oracle - want).abs() < 1e-11, "{oracle} vs {want}");
}
