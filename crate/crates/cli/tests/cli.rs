use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use curenet_core::design::{read_designs_csv, write_designs_csv};
use curenet_core::eval::compare_fields;
use curenet_core::solver::{read_solution_csv, SOLUTION_CSV_HEADER};

fn tiny() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../config/tiny.toml")
}

fn curenet(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curenet"))
        .arg("--config")
        .arg(tiny())
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn ok(o: Output) -> Output {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    o
}

#[test]
fn sampling_is_reproducible_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(curenet(&a, &["sample"]));
    ok(curenet(&b, &["sample"]));
    for f in ["train_designs.csv", "test_designs.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
    }
    let (train, seed, _) = read_designs_csv(a.join("train_designs.csv")).unwrap();
    assert_eq!((train.len(), seed), (4, 7));
}

#[test]
fn simulate_writes_solution_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    ok(curenet(dir.path(), &["simulate", "--midpoint"]));
    let csv = std::fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), SOLUTION_CSV_HEADER.join(","));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["property_hash"].as_str().unwrap().len(), 64);
    assert!(manifest["design"].is_object());
}

#[test]
fn bad_input_is_reported_with_kind_and_nonzero_status() {
    let dir = tempfile::tempdir().unwrap();
    let o = curenet(dir.path(), &["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "seed = 1\nnot_a_key = 3\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_curenet"))
        .args(["--config", bad.to_str().unwrap(), "sample"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error kind=parse"));

    let o = curenet(dir.path(), &["evaluate", "--checkpoint", "/nonexistent.ckpt"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error kind=io"));
}

#[test]
fn prediction_and_evaluation_agree_on_one_design() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    ok(curenet(out, &["train"]));
    ok(curenet(out, &["sample"]));
    let (test, seed, label) = read_designs_csv(out.join("test_designs.csv")).unwrap();
    let one = out.join("one.csv");
    write_designs_csv(&one, &test[1..2], seed, &label).unwrap();
    let one = one.to_str().unwrap();

    ok(curenet(out, &["predict", "--designs", one]));
    ok(curenet(out, &["simulate", "--designs", one]));
    ok(curenet(out, &["evaluate", "--designs", one]));

    let pred = read_solution_csv(out.join("prediction.csv")).unwrap();
    let reference = read_solution_csv(out.join("solution.csv")).unwrap();
    let m = compare_fields(&pred, &reference, 0.1).unwrap();
    let stored: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    let s = &stored["metrics"];
    for (got, key) in [
        (m.part.rel_l2, &s["part"]["rel_l2"]),
        (m.tool.mae, &s["tool"]["mae"]),
        (m.alpha.max_abs_err, &s["alpha"]["max_abs_err"]),
        (m.mid_trace_rel_l2, &s["mid_trace_rel_l2"]),
    ] {
        let want = key.as_f64().unwrap();
        assert!((got - want).abs() <= 1e-12 * want.abs().max(1e-300), "{got} vs {want}");
    }
}
