use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn harmap(args: &[&str], stdin: Option<&str>, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_harmap"));
    cmd.args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped());
    for (k, v) in env {
        cmd.env(k, v);
    }
    let mut child = cmd.spawn().expect("spawn harmap");
    if let Some(text) = stdin {
        child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
    } else {
        drop(child.stdin.take());
    }
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("stderr is JSON")
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

#[test]
fn ramify_reports_divisor_with_point_at_infinity() {
    let out = harmap(&["ramify", "-f", "-"], Some(r#"{"k":4,"p":[[1],[0,0,1],[0,0,0,0,1]]}"#), &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], "harmap/1");
    assert_eq!(v["r"], 2);
    assert_eq!(v["divisor"]["inf"], 1);
    let finite = &v["divisor"]["finite"]["coeffs"];
    assert_eq!(finite[0]["re"], "0");
    assert_eq!(finite[1]["re"], "1");
}

#[test]
fn table_rows() {
    let out = harmap(&["table", "--max-k", "1", "--max-r", "1"], None, &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows, ["0,0,4,8,2", "0,1,6,9,3", "1,0,7,11,3", "1,1,9,12,4", "-1,0,7,11,3", "-1,1,9,12,4"]);
    assert!(text.starts_with("# harmap/1"));
}

#[test]
fn construct_rejects_non_full_map() {
    let out = harmap(&["construct", "-f", "-"], Some(r#"{"k":1,"p":[[1],[0,1],[1,1]]}"#), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "NotFull");
    assert!(out.stdout.is_empty());
}

#[test]
fn construct_outputs_lift() {
    let out = harmap(&["construct", "-f", "-"], Some(r#"{"k":3,"p":[[1],[0,1],[0,0,0,1]]}"#), &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!((v["deg"].as_i64(), v["energy"].as_i64(), v["r"].as_i64()), (Some(0), Some(6), Some(1)));
    assert_eq!(v["lift"].as_array().unwrap().len(), 3);
}

#[test]
fn invalid_inputs_exit_one() {
    let common = harmap(&["construct", "-f", "-"], Some(r#"{"k":2,"p":[[0,1],[0,1,1],[0,0,1]]}"#), &[]);
    assert_eq!(common.status.code(), Some(1));
    assert_eq!(stderr_json(&common)["error"], "NotAMap");

    let garbage = harmap(&["ramify", "-f", "-"], Some("{not json"), &[]);
    assert_eq!(garbage.status.code(), Some(1));
    assert_eq!(stderr_json(&garbage)["error"], "InvalidInput");

    let no_seed = harmap(&["sample", "-k", "3", "-r", "1"], None, &[]);
    assert_eq!(no_seed.status.code(), Some(1));

    let empty = harmap(&["sample", "-k", "2", "-r", "1", "--seed", "1"], None, &[]);
    assert_eq!(empty.status.code(), Some(1));

    let coarse = harmap(&["verify", "-f", "-", "--grid", "8"], Some(r#"{"k":2,"p":[[1],[0,1],[0,0,1]]}"#), &[]);
    assert_eq!(coarse.status.code(), Some(1));

    let threads = harmap(&["table", "--max-k", "0", "--max-r", "0"], None, &[("HARMAP_THREADS", "zero")]);
    assert_eq!(threads.status.code(), Some(1));
}

#[test]
fn sampling_is_deterministic() {
    let args = ["sample", "-k", "4", "-r", "2", "--count", "3", "--seed", "17"];
    let a = harmap(&args, None, &[("HARMAP_THREADS", "1")]);
    let b = harmap(&args, None, &[("HARMAP_THREADS", "3")]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["samples"].as_array().unwrap().len(), 3);
    assert!(v["samples"].as_array().unwrap().iter().all(|s| s["r"] == 2));
}

#[test]
fn verify_conic() {
    let csv = tmp("residual.csv");
    let out = harmap(
        &["verify", "-f", "-", "--strict", "--csv", csv.to_str().unwrap()],
        Some(r#"{"k":2,"p":[[1],[0,1],[0,0,1]]}"#),
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["snapped"], serde_json::json!([0, 4]));
    assert!(v["pass"].as_object().unwrap().values().all(|b| b == true));
    assert!(std::fs::read_to_string(csv).unwrap().starts_with("h,residual\n"));
}

#[test]
fn path_between_samples() {
    let mut files = Vec::new();
    for seed in ["21", "22"] {
        let out = harmap(&["sample", "-k", "3", "-r", "1", "--seed", seed], None, &[]);
        let v = json(&out);
        let f = tmp(&format!("point{seed}.json"));
        std::fs::write(&f, v["samples"][0].to_string()).unwrap();
        files.push(f);
    }
    let csv = tmp("path.csv");
    let out = harmap(
        &[
            "path",
            "--from",
            files[0].to_str().unwrap(),
            "--to",
            files[1].to_str().unwrap(),
            "--steps",
            "20",
            "--quad-every",
            "10",
            "--csv",
            csv.to_str().unwrap(),
        ],
        None,
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["report"]["all_ok"], true);
    assert_eq!(v["path"]["steps"].as_array().unwrap().len(), 21);
    assert_eq!(std::fs::read_to_string(csv).unwrap().lines().count(), 22);

    let other = harmap(&["sample", "-k", "3", "-r", "0", "--seed", "1"], None, &[]);
    let f = tmp("point_r0.json");
    std::fs::write(&f, json(&other)["samples"][0].to_string()).unwrap();
    let out = harmap(&["path", "--from", files[0].to_str().unwrap(), "--to", f.to_str().unwrap()], None, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "PreconditionViolated");
}

#[test]
fn selftest_passes() {
    let out = harmap(&["selftest"], None, &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["passed"], true);
}
