// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::process::{Command, Output};

fn hybist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hybist"))
        .args(args)
        .env_remove("BENCH_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn inspect_reports_s27_profile() {
    let o = hybist(&["inspect", "s27"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("scan_length  7"), "{text}");
    assert!(text.contains("30 collapsed"), "{text}");
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(hybist(&["bogus"]).status.code(), Some(1));
    assert_eq!(
        hybist(&["campaign", "--bench", "s27", "--th1", "3"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        hybist(&["campaign", "--bench", "s27", "--th2", "0"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn missing_inputs_exit_2() {
    assert_eq!(
        hybist(&["campaign", "--bench", "no_such_circuit"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        hybist(&["inspect", "/nonexistent/x.bench"]).status.code(),
        Some(2)
    );
}

#[test]
fn bad_bench_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("cyc.bench");
    fs::write(&p, "INPUT(a)\nOUTPUT(y)\nx = AND(a, y)\ny = NOT(x)\n").unwrap();
    let o = hybist(&["inspect", p.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn verify_table1_passes() {
    let o = hybist(&["verify-table1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.matches(" ok\n").count(), 6, "{text}");
    assert!(text.contains("(134,782)"));
}

#[test]
fn campaign_is_deterministic_and_self_consistent() {
    let a = hybist(&[
        "campaign", "--bench", "s27", "--seed", "3", "--format", "json",
    ]);
    let b = hybist(&[
        "campaign", "--bench", "s27", "--seed", "3", "--format", "json",
    ]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.contains("\"pmtc\""), "{text}");
}

#[test]
fn campaign_writes_event_log() {
    let dir = tempfile::tempdir().unwrap();
    let events = dir.path().join("ev.csv");
    let o = hybist(&[
        "campaign",
        "--bench",
        "c17",
        "--seed",
        "2",
        "--events",
        events.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let log = fs::read_to_string(events).unwrap();
    assert!(log.starts_with("cycle,event,phase,new_detections,coverage\n"));
    assert!(log.lines().count() > 1);
}

#[test]
fn vector_file_drives_the_campaign() {
    let dir = tempfile::tempdir().unwrap();
    let vecs = dir.path().join("s27.vec");
    let o = hybist(&[
        "atpg",
        "s27",
        "--seed",
        "4",
        "--output",
        vecs.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let o = hybist(&[
        "campaign",
        "--bench",
        "s27",
        "--vector-file",
        vecs.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("final_coverage = 1.000000"));

    fs::write(&vecs, "01x1\n").unwrap();
    let o = hybist(&[
        "campaign",
        "--bench",
        "s27",
        "--vector-file",
        vecs.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_runs_each_grid_point() {
    let o = hybist(&[
        "sweep",
        "--bench",
        "s27",
        "--th1-grid",
        "0.7,0.9",
        "--ratio-grid",
        "0.25,0.5",
        "--pwtc",
        "100",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(
        text.lines().filter(|l| l.starts_with("s27:")).count(),
        4,
        "{text}"
    );
}

#[test]
fn signature_mode_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let sig = dir.path().join("sig.txt");
    let o = hybist(&[
        "campaign",
        "--bench",
        "s27",
        "--detection-mode",
        "signature",
        "--unload-interval",
        "2",
        "--signatures",
        sig.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let trace = fs::read_to_string(sig).unwrap();
    assert!(trace.lines().count() > 0);
    assert!(trace
        .lines()
        .all(|l| l.len() == 2 && u8::from_str_radix(l, 16).is_ok()));
}
