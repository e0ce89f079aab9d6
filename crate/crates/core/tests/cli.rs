use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn spec(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("specs").join(name)
}

fn run(args: &[&str], file: &str) -> (i32, Value) {
    let o = Command::new(env!("CARGO_BIN_EXE_qsheaf"))
        .args(args)
        .arg(spec(file))
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    (o.status.code().unwrap(), v)
}

#[test]
fn p2_sum_value() {
    let (code, v) = run(&["correlator", "--method", "sum"], "p2_tangent.json");
    assert_eq!(code, 0);
    let val = &v["result"]["value"];
    assert!((val[0].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(val[1].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn bad_fan_is_rejected() {
    let (code, v) = run(&["validate"], "bad_fan.json");
    assert_eq!(code, 2);
    assert_eq!(v["error"]["code"], "NonSmoothCone");
}

#[test]
fn bkk_p1xp1() {
    let (code, v) = run(&["bkk"], "p1xp1.json");
    assert_eq!(code, 0);
    let r = &v["result"];
    assert_eq!((r["mv_toric"].as_i64(), r["mv_general"].as_i64(), r["euler"].as_i64()), (Some(4), Some(4), Some(4)));
    assert_eq!(r["certified"], true);
}

#[test]
fn precondition_failures_exit_one() {
    let (code, v) = run(&["correlator", "--method", "trmc"], "p1xp1_deformed.json");
    assert_eq!(code, 1);
    assert_eq!(v["error"]["code"], "NotTangentBundle");
    let (code, v) = run(&["correlator", "--method", "contour"], "f2.json");
    assert_eq!(code, 1);
    assert_eq!(v["error"]["code"], "PreconditionViolated");
}

#[test]
fn flags_override_spec() {
    let (_, v) = run(&["correlator", "--method", "contour", "--eps-max", "0.05", "--nodes", "64"], "p1.json");
    assert_eq!(v["options"]["eps_max"], 0.05);
    // without auto-scaling a small cycle does not enclose the quantum poles
    assert_eq!(v["error"]["code"], "PreconditionViolated");
    let (code, a) = run(&["cycles", "--xi", "0.3,0.2"], "p1xp1.json");
    assert_eq!(code, 0);
    assert_eq!(a["result"]["xi"][1], 0.2);
    let (_, b) = run(&["cycles", "--xi", "0.2,0.3"], "p1xp1.json");
    assert_eq!(a["result"]["flags"].as_array().unwrap().len(), 1);
    assert_ne!(a["result"]["flags"][0]["members"], b["result"]["flags"][0]["members"]);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let o = Command::new(env!("CARGO_BIN_EXE_qsheaf"))
        .args(["solve", "--out"])
        .arg(&path)
        .arg(spec("p1xp1.json"))
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["result"]["solutions"]["points"].as_array().unwrap().len(), 4);
}

#[test]
fn unreadable_and_malformed_input() {
    let (code, v) = run(&["classes"], "missing.json");
    assert_eq!(code, 2);
    assert_eq!(v["error"]["code"], "IoError");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{\"fan\": 3}").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_qsheaf")).arg("classes").arg(&path).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn thread_count_does_not_change_reports() {
    let go = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_qsheaf"))
            .env("QSHEAF_THREADS", threads)
            .args(["expand", "--order", "2"])
            .arg(spec("p1xp1.json"))
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(go("1"), go("4"));
}
