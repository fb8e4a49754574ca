//! End-to-end tests of the command-line interface: subcommand plumbing,
//! file formats, exit codes, and the SPIN_CORES override.

use std::path::Path;
use std::process::{Command, Output};

use spin_core::block::BlockMatrix;
use spin_core::io::write_binary;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spin-bench"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn spin-bench")
}

fn path_str(p: &Path) -> String {
    p.to_str().unwrap().to_string()
}

#[test]
fn gen_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.spinmat");
    let b = dir.path().join("b.spinmat");
    let c = dir.path().join("c.spinmat");
    for (path, seed) in [(&a, "1"), (&b, "1"), (&c, "2")] {
        let out = run(&[
            "gen",
            "--n",
            "64",
            "--block-size",
            "16",
            "--seed",
            seed,
            "--kind",
            "spd",
            "--out",
            &path_str(path),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn invert_identity_reports_zero_residual() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("id.spinmat");
    let output = dir.path().join("inv.spinmat");
    let report = dir.path().join("report.csv");
    write_binary(&BlockMatrix::identity(64, 16).unwrap(), &input).unwrap();

    let out = run(&[
        "invert",
        "--in",
        &path_str(&input),
        "--algorithm",
        "spin",
        "--block-size",
        "16",
        "--cores",
        "2",
        "--out",
        &path_str(&output),
        "--report",
        &path_str(&report),
    ]);
    assert!(out.status.success());
    // The inverse of the identity is the identity (the scalar negation
    // leaves -0.0 in some entries, so compare values, not bytes).
    let inverse = spin_core::io::read_binary(&output).unwrap();
    assert_eq!(inverse, BlockMatrix::identity(64, 16).unwrap());
    let report = std::fs::read_to_string(&report).unwrap();
    let row = report.lines().nth(1).unwrap();
    assert!(row.ends_with(",0.0"), "row: {row}");
}

#[test]
fn invert_exit_code_2_on_singular_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("zeros.spinmat");
    write_binary(&BlockMatrix::zeros(16, 4).unwrap(), &input).unwrap();
    let out = run(&[
        "invert",
        "--in",
        &path_str(&input),
        "--algorithm",
        "lu",
        "--block-size",
        "4",
        "--cores",
        "1",
        "--out",
        &path_str(&dir.path().join("never.spinmat")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invert_exit_code_3_on_missing_or_corrupt_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "invert",
        "--in",
        &path_str(&dir.path().join("nope.spinmat")),
        "--algorithm",
        "spin",
        "--block-size",
        "4",
        "--out",
        &path_str(&dir.path().join("x.spinmat")),
    ]);
    assert_eq!(out.status.code(), Some(3));

    let bad = dir.path().join("bad.spinmat");
    std::fs::write(&bad, b"NOTAMATRIXFILE").unwrap();
    let out = run(&[
        "invert",
        "--in",
        &path_str(&bad),
        "--algorithm",
        "spin",
        "--block-size",
        "4",
        "--out",
        &path_str(&dir.path().join("x.spinmat")),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn exit_code_4_on_bad_arguments() {
    // Unknown algorithm value.
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("id.spinmat");
    write_binary(&BlockMatrix::identity(16, 4).unwrap(), &input).unwrap();
    let out = run(&[
        "invert",
        "--in",
        &path_str(&input),
        "--algorithm",
        "qr",
        "--block-size",
        "4",
        "--out",
        &path_str(&dir.path().join("x.spinmat")),
    ]);
    assert_eq!(out.status.code(), Some(4));

    // Missing required flag entirely.
    let out = run(&["gen", "--n", "64"]);
    assert_eq!(out.status.code(), Some(4));

    // Power-of-two violation caught by validation.
    let out = run(&[
        "gen",
        "--n",
        "48",
        "--block-size",
        "8",
        "--seed",
        "1",
        "--out",
        &path_str(&dir.path().join("x.spinmat")),
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn spin_cores_env_overrides_flag() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("id.spinmat");
    let report = dir.path().join("report.csv");
    write_binary(&BlockMatrix::identity(32, 8).unwrap(), &input).unwrap();
    let out = bin()
        .args([
            "invert",
            "--in",
            &path_str(&input),
            "--algorithm",
            "spin",
            "--block-size",
            "8",
            "--cores",
            "1",
            "--out",
            &path_str(&dir.path().join("inv.spinmat")),
            "--report",
            &path_str(&report),
        ])
        .env("SPIN_CORES", "3")
        .output()
        .unwrap();
    assert!(out.status.success());
    let report = std::fs::read_to_string(&report).unwrap();
    let cores_column: usize = report
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(4)
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(cores_column, 3);
}

#[test]
fn model_prints_breakdown_csv() {
    let out = run(&[
        "model",
        "--algorithm",
        "spin",
        "--n",
        "1024",
        "--b",
        "8",
        "--cores",
        "30",
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "method,term,value");
    assert_eq!(lines.len(), 14); // header + 12 terms + total
    assert!(lines[1].starts_with("spin,leafNode,"));
    assert!(lines[13].starts_with("spin,total,"));

    // The LU leaf term is 9x the Strassen one.
    let leaf = |text: &str| -> f64 {
        text.lines()
            .find(|l| l.contains(",leafNode,"))
            .unwrap()
            .rsplit(',')
            .next()
            .unwrap()
            .parse()
            .unwrap()
    };
    let lu = run(&[
        "model",
        "--algorithm",
        "lu",
        "--n",
        "1024",
        "--b",
        "8",
        "--cores",
        "30",
    ]);
    let lu_stdout = String::from_utf8(lu.stdout).unwrap();
    assert_eq!(leaf(&lu_stdout), 9.0 * leaf(&stdout));
}

#[test]
fn sweep_compare_scale_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let sweep_csv = dir.path().join("sweep.csv");
    let out = run(&[
        "sweep",
        "--n",
        "64",
        "--algorithms",
        "spin,lu",
        "--b",
        "2,4,8",
        "--cores",
        "2",
        "--repeats",
        "2",
        "--out",
        &path_str(&sweep_csv),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let content = std::fs::read_to_string(&sweep_csv).unwrap();
    assert!(content.starts_with(spin_bench::SWEEP_HEADER));
    // 2 algorithms x 3 cells x (2 runs + median).
    assert_eq!(content.lines().count(), 1 + 18);

    let compare_csv = dir.path().join("compare.csv");
    let out = run(&[
        "compare",
        "--sweep",
        &path_str(&sweep_csv),
        "--n",
        "64",
        "--cores",
        "2",
        "--out",
        &path_str(&compare_csv),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let content = std::fs::read_to_string(&compare_csv).unwrap();
    assert!(content.starts_with(spin_bench::COMPARE_HEADER));
    assert_eq!(content.lines().count(), 1 + 3);

    // Compare on a sweep with too few partition sizes is a data error.
    let thin_csv = dir.path().join("thin.csv");
    let thin: String = std::fs::read_to_string(&sweep_csv)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with("spin,64,16,4") && !l.starts_with("spin,64,8,8"))
        .collect::<Vec<_>>()
        .join("\n");
    std::fs::write(&thin_csv, thin).unwrap();
    let out = run(&[
        "compare",
        "--sweep",
        &path_str(&thin_csv),
        "--n",
        "64",
        "--cores",
        "2",
        "--out",
        &path_str(&dir.path().join("nope.csv")),
    ]);
    assert_eq!(out.status.code(), Some(4));

    // Scalability on a generated matrix.
    let matrix = dir.path().join("m.spinmat");
    let out = run(&[
        "gen",
        "--n",
        "64",
        "--block-size",
        "8",
        "--seed",
        "9",
        "--out",
        &path_str(&matrix),
    ]);
    assert!(out.status.success());
    let scale_csv = dir.path().join("scale.csv");
    let out = run(&[
        "scale",
        "--in",
        &path_str(&matrix),
        "--algorithm",
        "spin",
        "--cores",
        "1,2",
        "--out",
        &path_str(&scale_csv),
    ]);
    assert!(out.status.success());
    let content = std::fs::read_to_string(&scale_csv).unwrap();
    assert!(content.starts_with(spin_bench::SCALE_HEADER));
    let first = content.lines().nth(1).unwrap();
    assert!(first.starts_with("1,"));
    assert!(first.ends_with(",1.0000"));
}

#[test]
fn csv_matrix_files_work_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("m.csv");
    let output = dir.path().join("inv.csv");
    let out = run(&[
        "gen",
        "--n",
        "32",
        "--block-size",
        "8",
        "--seed",
        "4",
        "--kind",
        "dd",
        "--out",
        &path_str(&input),
    ]);
    assert!(out.status.success());
    let out = run(&[
        "invert",
        "--in",
        &path_str(&input),
        "--algorithm",
        "lu",
        "--block-size",
        "8",
        "--cores",
        "2",
        "--out",
        &path_str(&output),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let inv = spin_core::io::read_csv_dense(&output).unwrap();
    assert_eq!(inv.dim(), 32);
}
