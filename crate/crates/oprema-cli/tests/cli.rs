//! End-to-end runs of the `oprema` binary over the demo corpus.

use std::path::PathBuf;
use std::process::{Command, Output};

fn demo(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../demos")
        .join(name)
}

fn oprema(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oprema"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn assemble_and_run_the_polynomial_demo() {
    let dir = tempfile::tempdir().unwrap();
    let image = dir.path().join("poly.opimg");
    let out = oprema(&[
        "asm",
        demo("polynomial.oprema").to_str().unwrap(),
        "-o",
        image.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("17/300 instructions"));
    assert!(stdout(&out).contains("9/28 constants"));

    let trace = dir.path().join("poly.trace");
    let out = oprema(&[
        "run",
        image.to_str().unwrap(),
        "--timing",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let lines: Vec<String> = stdout(&out).lines().map(str::to_string).collect();
    assert_eq!(lines.len(), 151);
    assert_eq!(lines[0], "-0.10000000e+01");
    assert!(stderr(&out).contains("pulses"));
    let trace_text = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(trace_text.lines().count(), 2267);
    assert!(trace_text.lines().next().unwrap().contains("MOV"));
}

#[test]
fn stop_only_program_runs_clean() {
    let dir = tempfile::tempdir().unwrap();
    let image = dir.path().join("stop.opimg");
    let out = oprema(&[
        "asm",
        demo("stop.oprema").to_str().unwrap(),
        "-o",
        image.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = oprema(&["run", image.to_str().unwrap(), "--timing"]);
    assert!(out.status.success());
    assert!(stdout(&out).is_empty());
    assert!(stderr(&out).contains("1 steps"));
}

#[test]
fn run_pulse_and_step_limits_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let image = dir.path().join("poly.opimg");
    oprema(&[
        "asm",
        demo("polynomial.oprema").to_str().unwrap(),
        "-o",
        image.to_str().unwrap(),
    ]);
    let out = oprema(&["run", image.to_str().unwrap(), "--max-steps", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = oprema(&["run", image.to_str().unwrap(), "--max-steps", "10"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("step limit"));
}

#[test]
fn assembler_diagnostics_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("bad.oprema");
    std::fs::write(&src, ".prog\nADD +C0 !C1 -> R2\n").unwrap();
    let image = dir.path().join("bad.opimg");
    let out = oprema(&["asm", src.to_str().unwrap(), "-o", image.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 2"));

    // over capacity
    let mut big = String::from(".prog\n");
    for _ in 0..301 {
        big.push_str("STOP\n");
    }
    std::fs::write(&src, big).unwrap();
    let out = oprema(&["asm", src.to_str().unwrap(), "-o", image.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("capacity exceeded"));
}

#[test]
fn empty_source_assembles_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("empty.oprema");
    std::fs::write(&src, "").unwrap();
    let image = dir.path().join("empty.opimg");
    let out = oprema(&["asm", src.to_str().unwrap(), "-o", image.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stderr(&out).contains("warning"));
    assert!(image.exists());
}

#[test]
fn disassemble_round_trips_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let image = dir.path().join("ray.opimg");
    oprema(&[
        "asm",
        demo("raytrace.oprema").to_str().unwrap(),
        "-o",
        image.to_str().unwrap(),
    ]);
    let listing = dir.path().join("ray.lst");
    let out = oprema(&[
        "dis",
        image.to_str().unwrap(),
        "-o",
        listing.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let image2 = dir.path().join("ray2.opimg");
    let out = oprema(&[
        "asm",
        listing.to_str().unwrap(),
        "-o",
        image2.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(
        std::fs::read(&image).unwrap(),
        std::fs::read(&image2).unwrap()
    );
}

#[test]
fn executing_an_unused_opcode_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("raw.oprema");
    // opcode 25 sits in rows via .raw and fails to decode when executed
    std::fs::write(&src, ".prog\n.raw 0x00c8000\nSTOP\n").unwrap();
    let image = dir.path().join("raw.opimg");
    let out = oprema(&["asm", src.to_str().unwrap(), "-o", image.to_str().unwrap()]);
    assert!(out.status.success());
    let out = oprema(&["run", image.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("25"));
}

#[test]
fn corrupt_image_file_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("junk.opimg");
    std::fs::write(&path, b"not an image at all").unwrap();
    let out = oprema(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("bad magic"));
}

#[test]
fn twin_fault_injection_policies() {
    let dir = tempfile::tempdir().unwrap();
    let image = dir.path().join("poly.opimg");
    oprema(&[
        "asm",
        demo("polynomial.oprema").to_str().unwrap(),
        "-o",
        image.to_str().unwrap(),
    ]);

    // no faults: clean lockstep
    let out = oprema(&["twin", image.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stderr(&out).is_empty());
    assert_eq!(stdout(&out).lines().count(), 151);

    // transient fault, repeat policy: resolved, exit 0
    let out = oprema(&[
        "twin",
        image.to_str().unwrap(),
        "--inject",
        "B:2:R1.5:transient",
        "--policy",
        "repeat",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stderr(&out).lines().count(), 1);
    assert!(stderr(&out).contains("-> repeat"));

    // stuck fault, halt policy: exit 3
    let out = oprema(&[
        "twin",
        image.to_str().unwrap(),
        "--inject",
        "B:2:P3.25:stuck",
        "--policy",
        "halt",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("mismatch"));

    // malformed fault spec
    let out = oprema(&[
        "twin",
        image.to_str().unwrap(),
        "--inject",
        "C:1:R1.5:transient",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn start_flag_validation() {
    let dir = tempfile::tempdir().unwrap();
    let image = dir.path().join("ray.opimg");
    oprema(&[
        "asm",
        demo("raytrace.oprema").to_str().unwrap(),
        "-o",
        image.to_str().unwrap(),
    ]);
    let out = oprema(&[
        "run",
        image.to_str().unwrap(),
        "--start-positions",
        "0,0,0,9",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let out = oprema(&["run", image.to_str().unwrap(), "--start-pc", "300"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_prints_the_rounding_table_and_passes() {
    let out = oprema(&["verify", "--trials", "2000", "--seed", "7"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("mean |error| 4.5"));
    assert!(text.contains("mean |error| 2.5"));
    assert!(text.contains("ratio of mean absolute errors: 1.8"));
    assert_eq!(text.matches("PASS").count(), 6);
    assert!(!text.contains("FAIL"));
}

#[test]
fn verify_sequential_agrees() {
    let out = oprema(&["verify", "--trials", "500", "--sequential"]);
    assert!(out.status.success());
}

#[test]
fn interactive_debugger_smoke() {
    use std::io::Write;
    use std::process::Stdio;

    let dir = tempfile::tempdir().unwrap();
    let image = dir.path().join("ray.opimg");
    oprema(&[
        "asm",
        demo("raytrace.oprema").to_str().unwrap(),
        "-o",
        image.to_str().unwrap(),
    ]);
    let mut child = Command::new(env!("CARGO_BIN_EXE_oprema"))
        .args(["run", image.to_str().unwrap(), "--interactive"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(b"step\nstep 3\nregs\nprint R0\nprint Y1\nrun\nquit\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("MOV"));
    assert!(text.contains("R0 = +0.10000000e+01"));
    assert!(text.contains("Y1 = +0.50000000e+01"));
    assert!(text.contains("machine idle"));
}
