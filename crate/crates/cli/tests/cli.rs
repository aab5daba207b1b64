//! Black-box tests of the `sann` binary: exit codes, usage behaviour and
//! the documented end-to-end workflow.

use std::path::Path;
use std::process::{Command, Output};

fn sann(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sann"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn no_arguments_prints_usage_and_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = sann(&[], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let text = format!("{}{}", stdout(&out), stderr(&out));
    assert!(text.contains("Usage"), "no usage text in: {text}");
}

#[test]
fn unknown_subcommand_and_flags_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(sann(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(
        sann(&["gen-data", "--bogus-flag"], dir.path())
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn version_and_help_exit_0() {
    let dir = tempfile::tempdir().unwrap();
    let version = sann(&["--version"], dir.path());
    assert_eq!(version.status.code(), Some(0));
    assert!(stdout(&version).contains("sann"));
    let help = sann(&["--help"], dir.path());
    assert_eq!(help.status.code(), Some(0));
    for subcommand in [
        "gen-data",
        "train-encoder",
        "train",
        "tag",
        "infer",
        "respond",
        "experiment",
        "viz",
    ] {
        assert!(
            stdout(&help).contains(subcommand),
            "--help does not mention {subcommand}"
        );
    }
}

#[test]
fn gen_data_writes_the_canonical_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let out = sann(
        &["gen-data", "--seed", "7", "--out-dir", "data"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let pgms = std::fs::read_dir(dir.path().join("data"))
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .path()
                .extension()
                .is_some_and(|x| x == "pgm")
        })
        .count();
    assert_eq!(pgms, 12);
    assert!(dir.path().join("data/manifest.csv").exists());
}

#[test]
fn missing_snapshot_is_an_io_error_and_garbage_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    sann(
        &["gen-data", "--seed", "7", "--out-dir", "data"],
        dir.path(),
    );
    let image = "data/cat-0.pgm";

    let missing = sann(
        &[
            "infer",
            "--snapshot",
            "missing.snn",
            "--encoder",
            "missing-too.snn",
            "--image",
            image,
        ],
        dir.path(),
    );
    assert_eq!(missing.status.code(), Some(3), "{}", stderr(&missing));

    std::fs::write(dir.path().join("garbage.snn"), b"not a snapshot").unwrap();
    let garbage = sann(
        &[
            "infer",
            "--snapshot",
            "garbage.snn",
            "--encoder",
            "garbage.snn",
            "--image",
            image,
        ],
        dir.path(),
    );
    assert_eq!(garbage.status.code(), Some(1), "{}", stderr(&garbage));
}

#[test]
fn end_to_end_workflow() {
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        let out = sann(args, dir.path());
        assert_eq!(
            out.status.code(),
            Some(0),
            "`sann {}` failed: {}",
            args.join(" "),
            stderr(&out)
        );
        out
    };

    run(&["gen-data", "--seed", "7", "--out-dir", "data"]);
    run(&[
        "train-encoder",
        "--seed",
        "7",
        "--data",
        "data/manifest.csv",
        "--out-dir",
        "run",
    ]);
    assert!(dir.path().join("run/encoder.snn").exists());
    assert!(dir.path().join("run/codes.csv").exists());

    run(&[
        "train",
        "--seed",
        "7",
        "--epochs",
        "200",
        "--baseline-epochs",
        "160",
        "--encoder",
        "run/encoder.snn",
        "--data",
        "data/manifest.csv",
        "--out-dir",
        "run",
    ]);
    assert!(dir.path().join("run/baseline.snn").exists());
    assert!(dir.path().join("run/endline.snn").exists());

    // Untagged network: the salience response is exactly zero.
    let infer = run(&[
        "infer",
        "--snapshot",
        "run/baseline.snn",
        "--encoder",
        "run/encoder.snn",
        "--image",
        "data/cat-0.pgm",
    ]);
    let text = stdout(&infer);
    assert!(text.contains("class cat"), "unexpected inference: {text}");
    assert!(text.contains("R = 0,"), "expected zero response: {text}");

    run(&[
        "tag",
        "--snapshot",
        "run/baseline.snn",
        "--encoder",
        "run/encoder.snn",
        "--image",
        "data/cat-0.pgm",
        "--level",
        "1.0",
        "--theta",
        "0.1",
        "--out",
        "run/tagged.snn",
        "--report",
        "run/tag_report.csv",
    ]);
    assert!(dir.path().join("run/tagged.snn").exists());
    let report = std::fs::read_to_string(dir.path().join("run/tag_report.csv")).unwrap();
    assert!(report.starts_with("node,layer,activation"));

    let tagged_infer = run(&[
        "infer",
        "--snapshot",
        "run/tagged.snn",
        "--encoder",
        "run/encoder.snn",
        "--image",
        "data/cat-0.pgm",
    ]);
    let text = stdout(&tagged_infer);
    assert!(
        text.contains("class cat"),
        "tagging broke the class: {text}"
    );
    assert!(
        !text.contains("R = 0,"),
        "expected nonzero response: {text}"
    );

    let respond = run(&[
        "respond",
        "--snapshot",
        "run/tagged.snn",
        "--encoder",
        "run/encoder.snn",
        "--image",
        "data/cat-0.pgm",
        "--gamma",
        "2.0",
    ]);
    assert!(stdout(&respond).contains("D = "));

    run(&[
        "viz",
        "--snapshot",
        "run/tagged.snn",
        "--out",
        "run/network.svg",
    ]);
    let svg = std::fs::read_to_string(dir.path().join("run/network.svg")).unwrap();
    assert!(svg.starts_with("<svg"));

    // Too few epochs to converge: the documented experiment-failure code.
    let hopeless = sann(
        &[
            "train",
            "--seed",
            "7",
            "--epochs",
            "3",
            "--baseline-epochs",
            "2",
            "--encoder",
            "run/encoder.snn",
            "--data",
            "data/manifest.csv",
            "--out-dir",
            "run2",
        ],
        dir.path(),
    );
    assert_eq!(hopeless.status.code(), Some(2), "{}", stderr(&hopeless));
}
