use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use restoration::tooling::{emit_plan, parse_plan, Report, FEEDER33_SEVERE_SEED};

fn dsr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dsr"))
        .args(args)
        .output()
        .expect("dsr runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn gen(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let out = dir.join(name);
    let mut args = vec!["gen", "feeder33"];
    args.extend_from_slice(extra);
    args.extend_from_slice(&["-o", path_str(&out)]);
    let o = dsr(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn severe_case(dir: &Path) -> PathBuf {
    let seed = FEEDER33_SEVERE_SEED.to_string();
    gen(dir, "severe.toml", &["--seed", &seed, "--damage", "severe"])
}

#[test]
fn intact_feeder_gives_equal_pickups() {
    let dir = tempfile::tempdir().unwrap();
    let case = gen(dir.path(), "intact.toml", &[]);
    let (txt, json) = (dir.path().join("r.txt"), dir.path().join("r.json"));
    let o = dsr(&[
        "compare",
        path_str(&case),
        "-o",
        path_str(&txt),
        "--json",
        path_str(&json),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = Report::from_json(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let totals: Vec<f64> = report
        .rows
        .iter()
        .filter(|r| r.stage.is_none())
        .map(|r| r.cumulative_pickup_kw)
        .collect();
    assert_eq!(totals.len(), 3);
    assert!(
        totals.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-6),
        "{totals:?}"
    );
    assert_eq!(std::fs::read_to_string(&txt).unwrap(), report.to_text());
}

#[test]
fn solved_plan_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let case = severe_case(dir.path());
    for algo in ["olr", "sclr", "iclr"] {
        let plan = dir.path().join(format!("{algo}.toml"));
        let o = dsr(&[
            "solve",
            path_str(&case),
            "--algo",
            algo,
            "-o",
            path_str(&plan),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let o = dsr(&["verify", path_str(&case), path_str(&plan)]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn blind_line_closing_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let case = severe_case(dir.path());
    let plan_path = dir.path().join("plan.toml");
    let o = dsr(&[
        "solve",
        path_str(&case),
        "--algo",
        "iclr",
        "-o",
        path_str(&plan_path),
    ]);
    assert!(o.status.success());
    let mut plan = parse_plan(&std::fs::read_to_string(&plan_path).unwrap()).unwrap();
    let stage = &mut plan.stages[0];
    assert!(stage.line_ops.iter().any(|op| op.close));
    for s in stage.comm_states.values_mut() {
        *s = false;
    }
    std::fs::write(&plan_path, emit_plan(&plan)).unwrap();
    let o = dsr(&["verify", path_str(&case), path_str(&plan_path)]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("stage 1: [eq35]"), "{err}");
}

#[test]
fn bad_input_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "format_version = 1\n[[power.bus]]\nid = 3\n").unwrap();
    let out = dir.path().join("plan.toml");
    let o = dsr(&[
        "solve",
        path_str(&bad),
        "--algo",
        "olr",
        "-o",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
    assert!(!out.exists());
    let o = dsr(&["verify", "/nonexistent/case.toml", path_str(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exported_model_is_lp_text() {
    let dir = tempfile::tempdir().unwrap();
    let case = severe_case(dir.path());
    let lp = dir.path().join("m.lp");
    let o = dsr(&["export-milp", path_str(&case), "-o", path_str(&lp)]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&lp).unwrap();
    assert!(text.contains("\nMaximize\n obj: "));
    assert!(text.contains("\nSubject To\n"));
    assert!(text.contains("\nBinary\n"));
}

#[test]
fn generation_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), "a.toml", &["--seed", "7", "--damage", "light"]);
    let b = gen(dir.path(), "b.toml", &["--seed", "7", "--damage", "light"]);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}
