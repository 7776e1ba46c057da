use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "examples", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn netctl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netctl")).args(args).env_remove("NETCTL_SEED").output().unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = netctl(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn drivers_report() {
    let v = json(&["drivers", "--input", &data("star.edges")]);
    assert_eq!(v["schema"], "netctl/1");
    assert_eq!(v["command"], "drivers");
    assert_eq!(v["n_drivers"], 3);
    assert_eq!(v["drivers"], serde_json::json!(["hub", "b", "c"]));
}

#[test]
fn sensors_from_reactions() {
    let v = json(&["sensors", "--reactions", &data("eleven_species.rxn")]);
    assert_eq!(v["n_sensors"], 3);
    assert_eq!(v["multiplicity"], 6);
    assert_eq!(v["sensors"], serde_json::json!(["D", "F", "G"]));
}

#[test]
fn csv_output_for_cavity() {
    let out = netctl(&["cavity", "--dist", "er", "--kmean", "2,4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k_mean,gamma,n_d_cavity,n_d_simulated,stderr"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn seed_flag_and_environment() {
    let a = json(&["ogy", "--seed", "3"]);
    let b = Command::new(env!("CARGO_BIN_EXE_netctl")).args(["ogy"]).env("NETCTL_SEED", "3").output().unwrap();
    let b: Value = serde_json::from_slice(&b.stdout).unwrap();
    assert_eq!(a, b);
    let c = json(&["ogy", "--seed", "4"]);
    assert_ne!(a["capture_step"], c["capture_step"]);
}

#[test]
fn output_file() {
    let dir = std::env::temp_dir().join(format!("netctl-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = netctl(&["mds", "--generate", "star:6", "-o", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["command"], "mds");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn exit_codes() {
    let usage = netctl(&["drivers", "--bogus"]);
    assert_eq!(usage.status.code(), Some(2));
    let missing = netctl(&["drivers", "--input", "/nonexistent/graph.edges"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error: Io:"));
    let no_csv = netctl(&["msf", "--generate", "ring:5", "--format", "csv"]);
    assert_eq!(no_csv.status.code(), Some(2));
    assert_eq!(netctl(&["--help"]).status.code(), Some(0));
}

#[test]
fn jobs_do_not_change_results() {
    let args = ["obs-transition", "--generate", "er:2000:4", "--trials", "8"];
    let one = netctl(&[&args[..], &["--jobs", "1"]].concat());
    let four = netctl(&[&args[..], &["--jobs", "4"]].concat());
    assert!(one.status.success(), "{}", String::from_utf8_lossy(&one.stderr));
    assert_eq!(one.stdout, four.stdout);
}
