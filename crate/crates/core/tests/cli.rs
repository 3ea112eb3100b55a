use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_flatmoduli");

fn square() -> Value {
    json!({ "g": 1, "period_matrix": [[[1, 0], [0, 1]]] })
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

struct Run {
    code: i32,
    lines: Vec<Value>,
    stderr: String,
}

impl Run {
    fn find(&self, kind: &str, name: &str) -> Option<&Value> {
        self.lines.iter().find(|l| l["kind"] == kind && l["name"] == name)
    }

    fn summary(&self) -> &Value {
        self.lines.last().unwrap()
    }
}

fn run(command: &str, config: &Path, extra: &[&str]) -> Run {
    let out = Command::new(BIN).arg(command).arg("--config").arg(config).args(extra).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    Run {
        code: out.status.code().unwrap(),
        lines: text.lines().map(|l| serde_json::from_str(l).unwrap()).collect(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

#[test]
fn verify_identities_on_square_curve() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "job.json", &json!({ "torus": square(), "group": { "family": "T2" }, "seed": 7 }));
    let r = run("verify-identities", &cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.lines[0]["kind"], "header");
    assert_eq!(r.lines[0]["format_version"], 1);
    let checks: Vec<_> = r.lines.iter().filter(|l| l["kind"] == "check").collect();
    assert!(checks.len() > 20);
    assert!(checks.iter().all(|c| c["pass"] == true));
    assert_eq!(r.summary()["kind"], "summary");
    assert_eq!(r.summary()["outcome"], "pass");
    assert_eq!(r.summary()["failed"], 0);
}

#[test]
fn classify_t2_full_sector() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "job.json", &json!({ "torus": square(), "group": { "family": "T2" }, "seed": 1 }));
    let r = run("classify", &cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.find("data", "ambient_dim").unwrap()["value"], 4);
    assert_eq!(r.find("data", "constraint_rank").unwrap()["value"], 1);
    let eqs = r.find("data", "equations").unwrap()["value"].as_array().unwrap().clone();
    assert_eq!(eqs.len(), 1);
    assert_eq!(eqs[0], "(a11 - a22)*b12 = 0");
}

#[test]
fn classify_unipotent_sector() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "job.json", &json!({ "torus": square(), "group": { "family": "T2" }, "sector": "unipotent" }));
    let r = run("classify", &cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.find("data", "ambient_dim").unwrap()["value"], 2);
    assert_eq!(r.find("data", "constraint_rank").unwrap()["value"], 0);
}

#[test]
fn certify_hodge_borel_sp4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "job.json", &json!({ "torus": square(), "group": { "family": "BorelSp(4)" } }));
    let r = run("certify-hodge", &cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.lines.iter().any(|l| l["kind"] == "data" && l["name"] == "certificate"));
    assert!(r.find("check", "certificate.verified").is_some());
    assert_eq!(r.summary()["outcome"], "pass");
}

#[test]
fn unknown_family_is_undecided() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "job.json", &json!({ "torus": square(), "group": { "family": "Exotic", "rank": 7 } }));
    let r = run("certify-hodge", &cfg, &[]);
    assert_eq!(r.code, 2, "{}", r.stderr);
    assert_eq!(r.summary()["outcome"], "undecided");
    assert!(r.lines.iter().any(|l| l["kind"] == "undecided"));
}

#[test]
fn usage_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let no_periods = write(dir.path(), "a.json", &json!({ "torus": { "g": 1 }, "group": { "family": "T2" } }));
    let r = run("classify", &no_periods, &[]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("period_matrix"), "{}", r.stderr);

    let off_diagonal = write(dir.path(), "b.json", &json!({
        "torus": square(), "group": { "family": "T2" },
        "twist": { "chi": [[[[0.1, 0], [0.2, 0]], [[0, 0], [0.1, 0]]]] }
    }));
    let r = run("classify", &off_diagonal, &[]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("diagonal"), "{}", r.stderr);

    let ok = write(dir.path(), "c.json", &json!({ "torus": square(), "group": { "family": "T2" } }));
    assert_eq!(run("frobnicate", &ok, &[]).code, 3);
    assert_eq!(run("classify", &dir.path().join("missing.json"), &[]).code, 3);

    let unknown_key = write(dir.path(), "d.json", &json!({ "torus": square(), "group": { "family": "T2" }, "sed": 3 }));
    assert_eq!(run("classify", &unknown_key, &[]).code, 3);

    let wrong_command = write(dir.path(), "e.json", &json!({ "torus": square(), "group": { "family": "T2" }, "command": "picard" }));
    assert_eq!(run("classify", &wrong_command, &[]).code, 3);

    let out = Command::new(BIN).arg("classify").output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = Command::new(BIN).arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "job.json", &json!({
        "torus": { "g": 1, "period_matrix": [[[1, 0], [0.5, 1]]], "cutoff": 6 },
        "group": { "family": "T", "rank": 3 }, "seed": 11
    }));
    for cmd in ["canonicalize", "classify", "holonomy"] {
        let a = run(cmd, &cfg, &[]);
        let b = run(cmd, &cfg, &[]);
        assert_eq!(a.code, 0, "{cmd}: {}", a.stderr);
        assert_eq!(a.lines[1..], b.lines[1..], "{cmd}");
    }
    let c = run("classify", &cfg, &["--seed", "12"]);
    let d = run("classify", &cfg, &[]);
    assert_ne!(c.lines[1..], d.lines[1..]);
}

#[test]
fn out_flag_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "job.json", &json!({ "torus": square(), "group": { "family": "T2" } }));
    let path = dir.path().join("report.jsonl");
    let r = run("picard", &cfg, &["--out", path.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.lines.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let last: Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(last["kind"], "summary");
}

#[test]
fn reconstruct_then_canonicalize_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let torus = json!({ "g": 1, "period_matrix": [[[1, 0], [0.5, 1]]], "cutoff": 6 });
    let recon = dir.path().join("recon.json");
    let cfg = write(dir.path(), "r.json", &json!({
        "torus": torus, "group": { "family": "T2" }, "seed": 5, "output": recon
    }));
    let r = run("reconstruct", &cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&recon).unwrap()).unwrap();
    let omega = write(dir.path(), "omega.json", &written["omega"]);
    let psi_in = r.find("data", "psi").unwrap()["value"].clone();

    let canon = dir.path().join("canon.json");
    let cfg = write(dir.path(), "c.json", &json!({
        "torus": torus, "group": { "family": "T2" }, "seed": 5,
        "input": omega, "compare": omega, "output": canon
    }));
    let c = run("canonicalize", &cfg, &[]);
    assert_eq!(c.code, 0, "{}", c.stderr);
    assert_eq!(c.find("data", "equivalence").unwrap()["value"]["decision"], "equivalent");
    let psi_out = &c.find("data", "psi").unwrap()["value"];
    let flat = |v: &Value| -> Vec<f64> {
        v.as_array().unwrap().iter()
            .flat_map(|f| f["matrix"].as_array().unwrap().iter().flat_map(|r| r.as_array().unwrap().clone()))
            .flat_map(|z| z.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect::<Vec<_>>())
            .collect()
    };
    let (a, b) = (flat(&psi_in), flat(psi_out));
    assert_eq!(a.len(), b.len());
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-10), "{a:?} vs {b:?}");
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&canon).unwrap()).unwrap();
    assert_eq!(saved["psi"]["degree"], 1);
}
