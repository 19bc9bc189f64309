use std::path::Path;
use std::process::{Command, Output};

fn psskit(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psskit"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env("PSSKIT_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn report(out: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(out.join(format!("{name}.json"))).unwrap()).unwrap()
}

#[test]
fn verify_preset_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = psskit(dir.path(), &["verify", "--family", "t22-default"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path(), "verify");
    assert_eq!(r["passed"], true);
    assert_eq!(r["result"]["residuals"], serde_json::json!(["0", "0", "0"]));
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    assert!(r["config"]["family"]["kind"].is_string());
}

#[test]
fn certify_t23_example() {
    let dir = tempfile::tempdir().unwrap();
    let o = psskit(dir.path(), &["certify", "--kind", "t23", "--mu3", "0", "--eta2", "1", "--eta3", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report(dir.path(), "certify")["result"]["value"], "1");
}

#[test]
fn malformed_family_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "kind = \"t22\"\nunknown_key = 3\n").unwrap();
    let o = psskit(dir.path(), &["verify", "--family", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(&bad, "kind = [").unwrap();
    assert_eq!(psskit(dir.path(), &["verify", "--family", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(psskit(dir.path(), &["verify", "--family", "no-such-preset"]).status.code(), Some(2));
}

#[test]
fn family_file_in_json() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("fam.json");
    std::fs::write(&f, r#"{"kind": "sg", "scalars": {"eta": "2"}}"#).unwrap();
    let o = psskit(dir.path(), &["verify", "--family", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn nonpositive_tolerance_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = psskit(dir.path(), &["immerse", "--family", "t22-default", "--gauss-tol", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failing_check_exits_one() {
    // A Gauss tolerance below rounding turns a valid immersion into a failure.
    let dir = tempfile::tempdir().unwrap();
    let o = psskit(dir.path(), &["immerse", "--family", "t22-default", "--gauss-tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(report(dir.path(), "immerse")["passed"], false);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("occupied");
    std::fs::write(&file, "").unwrap();
    let o = psskit(&file, &["verify", "--family", "t22-default"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn report_config_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let o = psskit(&a, &["--seed", "17", "immerse", "--family", "t24-default-minus"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = psskit(&b, &["run", a.join("immerse.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (mut ra, mut rb) = (report(&a, "immerse"), report(&b, "immerse"));
    assert_eq!(ra["seed"], 17);
    ra["timing"] = serde_json::Value::Null;
    rb["timing"] = serde_json::Value::Null;
    assert_eq!(ra, rb);
    assert_eq!(std::fs::read(a.join("sff.csv")).unwrap(), std::fs::read(b.join("sff.csv")).unwrap());
}

#[test]
fn run_accepts_toml_and_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "command = \"lemma21\"\nfamily = \"t25i-default\"\n").unwrap();
    assert_eq!(psskit(dir.path(), &["run", cfg.to_str().unwrap()]).status.code(), Some(0));
    std::fs::write(&cfg, "command = \"lemma21\"\nfamily = \"t25i-default\"\nextra = true\n").unwrap();
    assert_eq!(psskit(dir.path(), &["run", cfg.to_str().unwrap()]).status.code(), Some(2));
    let missing = dir.path().join("missing.toml");
    assert_eq!(psskit(dir.path(), &["run", missing.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn reconstruct_writes_mesh_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = psskit(dir.path(), &["reconstruct", "--n", "21", "--h", "0.05"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("mesh.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x,t,rx,ry,rz,a,b,c,K,drift"));
    let obj = std::fs::read_to_string(dir.path().join("mesh.obj")).unwrap();
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 441);
    assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 800);
}

#[test]
fn match_ch_records_the_family() {
    let dir = tempfile::tempdir().unwrap();
    let o = psskit(dir.path(), &["match-ch"]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(dir.path(), "match-ch");
    assert_eq!(r["result"]["coefficient_residual"], "0");
    assert_eq!(r["config"]["family"]["kind"], "t24");
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_psskit"))
        .args(["--out", dir.path().to_str().unwrap(), "verify", "--family", "t22-default"])
        .env("PSSKIT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
