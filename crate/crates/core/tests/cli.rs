use std::path::PathBuf;
use std::process::{Command, Output};

use qcontract::channel::ChannelRep;
use qcontract::io::{ChannelJson, MatrixJson};
use qcontract::state::{isotropic, Density};
use serde_json::Value;

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qcontract-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn channel_file(name: &str, e: &ChannelRep) -> PathBuf {
    scratch(name, &serde_json::to_string(&ChannelJson::from_channel(e)).unwrap())
}

fn state_file(name: &str, rho: &Density) -> PathBuf {
    scratch(name, &serde_json::to_string(&MatrixJson::from_matrix(rho.matrix())).unwrap())
}

fn qcontract(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcontract")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn path(p: &PathBuf) -> &str {
    p.to_str().unwrap()
}

#[test]
fn contraction_depolarizing() {
    let ch = channel_file("depol.json", &ChannelRep::depolarizing(2, 0.7).unwrap());
    let st = state_file("mixed.json", &Density::maximally_mixed(2));
    let out = qcontract(&["contraction", path(&ch), path(&st)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let reports = json(&out);
    assert_eq!(reports.as_array().unwrap().len(), 4);
    for r in reports.as_array().unwrap() {
        assert!((r["eta"].as_f64().unwrap() - 0.49).abs() < 1e-7);
    }
}

#[test]
fn contraction_power_flagged() {
    let ch = channel_file("amp.json", &ChannelRep::from_kraus(vec![
        qcontract::linalg::from_real(2, 2, &[1.0, 0.0, 0.0, 0.8]),
        qcontract::linalg::from_real(2, 2, &[0.0, 0.6, 0.0, 0.0]),
    ]).unwrap());
    let st = state_file("diag.json", &Density::from_diagonal(&[0.3, 0.7]).unwrap());
    let out = qcontract(&["contraction", path(&ch), path(&st), "--f", "power:0.2"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn mixing_depolarizing() {
    let ch = channel_file("depol9.json", &ChannelRep::depolarizing(2, 0.9).unwrap());
    let out = qcontract(&["mixing", path(&ch), "--delta", "0.01"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["min_steps"].as_u64(), Some(51));
    assert!(v["fixed_point"].is_object());
}

#[test]
fn mixing_identity_is_not_unique() {
    let ch = channel_file("id.json", &ChannelRep::identity(2));
    let out = qcontract(&["mixing", path(&ch), "--delta", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mixing_replacer_needs_full_rank() {
    let tau = Density::from_diagonal(&[1.0, 0.0]).unwrap();
    let ch = channel_file("rep.json", &ChannelRep::replacer(2, &tau));
    let out = qcontract(&["mixing", path(&ch), "--delta", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn correlation_isotropic_and_table() {
    let st = state_file("iso.json", &isotropic(2, 0.3).unwrap());
    let out = qcontract(&["correlation", path(&st), "--dims", "2,2", "--f", "gm,am", "--k", "0.25", "--spectrum"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    for r in v["reports"].as_array().unwrap() {
        assert!((r["mu"].as_f64().unwrap() - 0.3).abs() < 1e-8);
    }
    assert!(v["gm_schmidt_spectrum"].is_array());

    let table = scratch("table.json", r#"{"p": [[0.4, 0.1], [0.1, 0.4]]}"#);
    let v = json(&qcontract(&["correlation", path(&table)]));
    assert!((v["classical_mu"].as_f64().unwrap() - 0.6).abs() < 1e-12);
    assert!((v["reports"][0]["mu"].as_f64().unwrap() - 0.6).abs() < 1e-8);

    let out = qcontract(&["correlation", path(&table), "--dims", "2,3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_inputs_exit_one() {
    let bad = scratch("bad.json", "{\"kraus\": [");
    let st = state_file("mixed2.json", &Density::maximally_mixed(2));
    let out = qcontract(&["contraction", path(&bad), path(&st)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
    assert_eq!(qcontract(&["verify", "nope"]).status.code(), Some(1));
    assert_eq!(qcontract(&["verify", "dpi", "--tol-override", "bogus=1"]).status.code(), Some(1));
    assert_eq!(qcontract(&["verify", "dpi", "--tol-override", "gs_tol=-1"]).status.code(), Some(1));
    let ch = channel_file("depol3.json", &ChannelRep::depolarizing(2, 0.5).unwrap());
    assert_eq!(qcontract(&["contraction", path(&ch), path(&st), "--f", "nonsense"]).status.code(), Some(1));
}

#[test]
fn not_a_state_exits_two() {
    let ch = channel_file("depol4.json", &ChannelRep::depolarizing(2, 0.5).unwrap());
    let st = scratch("neg.json", r#"{"rows":2,"cols":2,"re":[[1.5,0],[0,-0.5]]}"#);
    assert_eq!(qcontract(&["contraction", path(&ch), path(&st)]).status.code(), Some(2));
}

#[test]
fn verify_is_deterministic() {
    let a = qcontract(&["verify", "ordering", "--seed", "11", "--trials", "5"]);
    let b = qcontract(&["verify", "ordering", "--seed", "11", "--trials", "5"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)[0]["pass"], Value::Bool(true));
}

#[test]
fn output_file_and_threads() {
    let out_path = std::env::temp_dir().join(format!("qcontract-cli-out-{}.json", std::process::id()));
    let out = Command::new(env!("CARGO_BIN_EXE_qcontract"))
        .args(["verify", "classical", "--trials", "3", "--output", out_path.to_str().unwrap()])
        .env("QCONTRACT_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v[0]["suite"], "classical");

    let out = Command::new(env!("CARGO_BIN_EXE_qcontract"))
        .args(["verify", "classical", "--trials", "1"])
        .env("QCONTRACT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
