//! End-to-end checks of the binary: exit codes, file outputs, determinism.

use std::path::Path;
use std::process::{Command, Output};

fn lbubfl(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lbubfl"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_t1(dir: &Path) -> std::path::PathBuf {
    let inst = lbubfl::fixtures::t1::<f64>();
    let json = lbubfl::json::instance_to_json(&inst);
    let path = dir.join("t1.json");
    std::fs::write(&path, serde_json::to_string_pretty(&json).unwrap()).unwrap();
    path
}

#[test]
fn gen_is_deterministic_per_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "gen",
        "--facilities",
        "4",
        "--clients",
        "9",
        "--lower",
        "2",
        "--upper",
        "3",
        "--seed",
        "1",
    ];
    let out_a = lbubfl(&[&args[..], &["--out", "a"]].concat(), tmp.path());
    let out_b = lbubfl(&[&args[..], &["--out", "b"]].concat(), tmp.path());
    assert!(out_a.status.success() && out_b.status.success());
    let name = "inst-4x9-L2U3-s1.json";
    let a = std::fs::read(tmp.path().join("a").join(name)).unwrap();
    let b = std::fs::read(tmp.path().join("b").join(name)).unwrap();
    assert_eq!(a, b, "same seed must produce byte-identical files");
}

#[test]
fn gen_rejects_bad_parameters() {
    let tmp = tempfile::tempdir().unwrap();
    let flipped = lbubfl(
        &["gen", "--facilities", "3", "--clients", "6", "--lower", "4", "--upper", "2"],
        tmp.path(),
    );
    assert_eq!(flipped.status.code(), Some(4));

    // |C| = 7 with L=4, U=5: the counting condition has no solution.
    let no_k = lbubfl(
        &["gen", "--facilities", "3", "--clients", "7", "--lower", "4", "--upper", "5"],
        tmp.path(),
    );
    assert_eq!(no_k.status.code(), Some(4));
    let msg = String::from_utf8_lossy(&no_k.stderr);
    assert!(msg.contains("no k"), "error should name the counting condition: {msg}");
}

#[test]
fn solve_t1_succeeds_and_meets_lower_bounds() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_t1(tmp.path());
    let out = lbubfl(&["solve", path.to_str().unwrap(), "--oracle"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let solution_text =
        std::fs::read_to_string(tmp.path().join("t1.solution.json")).unwrap();
    let solution: serde_json::Value = serde_json::from_str(&solution_text).unwrap();
    assert!(solution["min_load"].as_u64().unwrap() >= 2);

    let report: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("report on stdout");
    assert!(report["stages"]["final"]["alpha"].as_f64().unwrap() >= 1.0);
    assert!(report["oracle_opt"].as_f64().unwrap() > 0.0);
}

#[test]
fn solve_rejects_out_of_range_ell() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_t1(tmp.path());
    let out = lbubfl(&["solve", path.to_str().unwrap(), "--ell", "2.0"], tmp.path());
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn solve_flags_broken_metric() {
    let tmp = tempfile::tempdir().unwrap();
    let text = r#"{
        "version": 1, "L": 1, "U": 1,
        "facilities": [{"id": "a", "cost": 0.0}, {"id": "b", "cost": 0.0}],
        "clients": [{"id": "c"}],
        "matrix": [0.0, 1.0, 5.0, 1.0, 0.0, 1.0, 5.0, 1.0, 0.0]
    }"#;
    let path = tmp.path().join("broken.json");
    std::fs::write(&path, text).unwrap();
    let out = lbubfl(&["solve", path.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn solve_flags_infeasible_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let gen = lbubfl(
        &["gen", "--facilities", "2", "--clients", "8", "--lower", "3", "--upper", "5",
          "--seed", "3", "--out", "."],
        tmp.path(),
    );
    assert!(gen.status.success());
    // Rewrite the bounds so no k works: 8 clients with L=5, U=6 and 2 facilities.
    let path = tmp.path().join("inst-2x8-L3U5-s3.json");
    let text = std::fs::read_to_string(&path).unwrap();
    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    value["L"] = 5.into();
    value["U"] = 6.into();
    std::fs::write(&path, serde_json::to_string(&value).unwrap()).unwrap();
    let out = lbubfl(&["solve", path.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_writes_lp_export_and_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_t1(tmp.path());
    let out = lbubfl(
        &[
            "solve",
            path.to_str().unwrap(),
            "--export-lp",
            "t1.lp",
            "--trace",
            "trace",
            "--report",
            "report.json",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let lp = std::fs::read_to_string(tmp.path().join("t1.lp")).unwrap();
    assert!(lp.contains("Minimize") && lp.contains("Subject To"));
    for name in ["tri.json", "i1.json", "i2.json", "icap.json", "ascap.json", "treefix.json"] {
        assert!(tmp.path().join("trace").join(name).exists(), "missing trace file {name}");
    }
    assert!(tmp.path().join("report.json").exists());
}

#[test]
fn check_invariants_does_not_change_the_solution() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_t1(tmp.path());
    let plain = lbubfl(
        &["solve", path.to_str().unwrap(), "--out", "plain.json", "--report", "r1.json"],
        tmp.path(),
    );
    let checked = lbubfl(
        &[
            "solve",
            path.to_str().unwrap(),
            "--check-invariants",
            "--out",
            "checked.json",
            "--report",
            "r2.json",
        ],
        tmp.path(),
    );
    assert!(plain.status.success() && checked.status.success());
    let a = std::fs::read(tmp.path().join("plain.json")).unwrap();
    let b = std::fs::read(tmp.path().join("checked.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn bench_empty_directory_gives_header_only() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::create_dir(tmp.path().join("empty")).unwrap();
    let out = lbubfl(&["bench", "empty"], tmp.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text.trim(),
        "id,|F|,|C|,L,U,lp_opt,opt,cost,ratio,alpha,beta_final,runtime_ms,error"
    );
}

#[test]
fn bench_rows_are_deterministic_modulo_runtime() {
    let tmp = tempfile::tempdir().unwrap();
    let gen = lbubfl(
        &["gen", "--count", "3", "--facilities", "4", "--clients", "10", "--lower", "2",
          "--upper", "4", "--seed", "5", "--out", "suite"],
        tmp.path(),
    );
    assert!(gen.status.success());
    let strip_runtime = |text: &str| -> Vec<String> {
        text.lines()
            .map(|line| {
                let cols: Vec<&str> = line.split(',').collect();
                cols.iter()
                    .enumerate()
                    .filter(|&(i, _)| i != 11)
                    .map(|(_, c)| *c)
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect()
    };
    let a = lbubfl(&["bench", "suite", "--jobs", "1"], tmp.path());
    let b = lbubfl(&["bench", "suite", "--jobs", "1"], tmp.path());
    assert!(a.status.success() && b.status.success());
    let a = strip_runtime(&String::from_utf8(a.stdout).unwrap());
    let b = strip_runtime(&String::from_utf8(b.stdout).unwrap());
    assert_eq!(a, b);
    assert_eq!(a.len(), 1 + 3, "header plus one row per instance");
    // The oracle runs at this size, so ratios are populated.
    for row in &a[1..] {
        let cols: Vec<&str> = row.split(',').collect();
        assert!(!cols[8].is_empty(), "ratio missing in {row}");
    }
}
