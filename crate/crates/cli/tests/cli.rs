//! End-to-end behaviour of the `biharm` binary: exit codes, config files,
//! output locations and report determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_biharm"));
    c.env_remove("BIHARM_OUT_DIR");
    c
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("biharm-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn verify_case2_json() {
    let out = bin().args(["verify", "case2", "--format", "json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], "biharm-report/1");
    assert_eq!(v["cases"][0]["case"], "case2");
    assert_eq!(v["cases"][0]["verdict"], "biharmonic ⇔ minimal");
    assert_eq!(v["cases"][0]["residual"], "6*kappa^3");
    assert_eq!(v["exit_code"], 0);
}

#[test]
fn verify_case1_has_degree9_comparison() {
    let dir = scratch("case1");
    let trace = dir.join("out/trace.json");
    let out = bin().args(["verify", "--case", "case1", "--emit-trace"]).arg(&trace).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("degree-9 comparison:"), "{text}");
    assert!(text.contains("elimination orders agree: true"));
    assert!(trace.exists());
}

#[test]
fn json_report_is_deterministic_modulo_timestamp() {
    let run = || {
        let mut v = json(&bin().args(["verify", "both", "--format", "json"]).output().unwrap());
        v["generated_at"] = serde_json::Value::Null;
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn default_trace_goes_to_out_dir_from_env() {
    let dir = scratch("env");
    let out = bin().env("BIHARM_OUT_DIR", &dir).args(["verify", "case2", "--emit-trace"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.join("trace.json").exists());
    let replay = bin().args(["replay"]).arg(dir.join("trace.json")).output().unwrap();
    assert_eq!(replay.status.code(), Some(0));
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let dir = scratch("cfg");
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "# case II only\ncase = case2\nformat = json\nt-max = 0.5\n").unwrap();
    let out = bin().arg("--config").arg(&cfg).arg("ode").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["numeric"][0]["case"], "case2");
    assert_eq!(v["numeric"][0]["closed_form"]["t_max"], 0.5);
    let out = bin().arg("--config").arg(&cfg).args(["ode", "--t-max", "0.25"]).output().unwrap();
    assert_eq!(json(&out)["numeric"][0]["closed_form"]["t_max"], 0.25);
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = scratch("badcfg");
    let cfg = dir.join("bad.cfg");
    std::fs::write(&cfg, "case = case2\ncolour = red\n").unwrap();
    let out = bin().arg("--config").arg(&cfg).args(["verify"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains(":2: colour"), "{err}");
}

#[test]
fn non_positive_numeric_flag_is_a_config_error() {
    let out = bin().args(["ode", "case2", "--step", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["ode", "case2", "--samples", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(bin().args(["verify", "case3"]).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["frobnicate"]).output().unwrap().status.code(), Some(2));
}

#[test]
fn missing_trace_is_io_error() {
    let out = bin().args(["replay", "/nonexistent/biharm/trace.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn empty_and_foreign_traces_are_schema_errors() {
    let dir = scratch("schema");
    for (name, body) in [
        ("empty.json", ""),
        ("no-certs.json", r#"{"schema":"biharm-trace/1","certificates":[]}"#),
        ("other.json", r#"{"schema":"other/9","certificates":[]}"#),
    ] {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        let out = bin().arg("replay").arg(&p).output().unwrap();
        assert_eq!(out.status.code(), Some(7), "{name}");
    }
}

#[test]
fn tampered_expected_field_is_a_replay_mismatch() {
    let dir = scratch("tamper");
    let trace = dir.join("trace.json");
    assert_eq!(bin().args(["verify", "case2", "--emit-trace"]).arg(&trace).output().unwrap().status.code(), Some(0));
    let text = std::fs::read_to_string(&trace).unwrap().replace("-2*kappa^3 + 6*kappa*tau^2", "-3*kappa^3 + 6*kappa*tau^2");
    std::fs::write(&trace, text).unwrap();
    let out = bin().args(["replay", "--format", "json"]).arg(&trace).output().unwrap();
    assert_eq!(out.status.code(), Some(6));
    let v = json(&out);
    assert!(v["replay"]["mismatches"].as_array().unwrap().iter().any(|m| m["step"] == "e4e4(kappa)"));
}

#[test]
fn ode_writes_csv_with_documented_headers() {
    let dir = scratch("csv");
    let out = bin().args(["ode", "both", "--samples", "5", "--csv"]).arg(&dir).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let c1 = std::fs::read_to_string(dir.join("trajectory-case1.csv")).unwrap();
    let c2 = std::fs::read_to_string(dir.join("trajectory-case2.csv")).unwrap();
    assert!(c1.starts_with("t,k1,k3,k4,xi,eta,I1,I2,R\n"));
    assert!(c2.starts_with("t,kappa,tau,R2\n"));
    assert!(c1.lines().count() > 2);
}
