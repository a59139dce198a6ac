use std::path::{Path, PathBuf};
use std::process::Command;

use embedlab::{fixtures, RealMatrix};
use serde_json::{json, Value};
use tempfile::TempDir;

struct Run {
    code: i32,
    report: Option<Value>,
    stderr: String,
}

fn embedlab<I, S>(args: I, env_tol: Option<&str>) -> Run
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_embedlab"));
    cmd.args(args).env_remove("EMBEDLAB_TOL");
    if let Some(t) = env_tol {
        cmd.env("EMBEDLAB_TOL", t);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().expect("exited normally"),
        report: serde_json::from_slice(&out.stdout).ok(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn write_json(dir: &TempDir, name: &str, m: &RealMatrix) -> PathBuf {
    let path = dir.path().join(format!("{name}.json"));
    let doc = json!({ "n": m.dim(), "rows": m.rows() });
    std::fs::write(&path, doc.to_string()).unwrap();
    path
}

fn write_csv(dir: &TempDir, name: &str, m: &RealMatrix) -> PathBuf {
    let path = dir.path().join(format!("{name}.csv"));
    let text: String = m
        .rows()
        .iter()
        .map(|r| r.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",") + "\n")
        .collect();
    std::fs::write(&path, format!("# {name}\n{text}")).unwrap();
    path
}

/// Report with the run-specific parts (timing, file path) blanked out.
fn comparable(mut report: Value) -> Value {
    let obj = report.as_object_mut().unwrap();
    obj.remove("duration_ms");
    obj["command"]["argv"][1] = json!("FILE");
    report
}

fn fixture_set() -> Vec<(&'static str, RealMatrix)> {
    vec![
        ("z1", fixtures::z1()),
        ("e1", fixtures::e1()),
        ("e2", fixtures::e2()),
        ("e2e1", fixtures::e2_e1()),
        ("e1e2", fixtures::e1_e2()),
        ("scaling", fixtures::diagonal_scaling_base()),
        ("scaled", fixtures::diagonal_scaled_counterexample()),
        ("identity3", RealMatrix::identity(3)),
    ]
}

fn commands(path: &Path) -> Vec<Vec<String>> {
    let p = path.display().to_string();
    let with = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    vec![
        with(&["classify", &p]),
        with(&["structure", &p]),
        with(&["expm", &p]),
        with(&["logm", &p]),
        with(&["root", &p, "--n", "3"]),
        with(&["embed", &p]),
        with(&["embed", &p, "--bound", "paper"]),
        with(&["infdiv", &p, "--roots", "2,7"]),
    ]
}

#[test]
fn e2e1_is_not_embeddable() {
    let dir = TempDir::new().unwrap();
    let path = write_json(&dir, "e2e1", &fixtures::e2_e1());
    let run = embedlab(["embed".as_ref(), path.as_os_str()], None);
    assert_eq!(run.code, 1, "{}", run.stderr);
    let report = run.report.unwrap();
    assert_eq!(report["status"], "negative");
    assert_eq!(report["exit_code"], 1);
    assert_eq!(report["result"]["verdict"], "NotEmbeddable");
}

#[test]
fn e1e2_is_embeddable() {
    let dir = TempDir::new().unwrap();
    let path = write_json(&dir, "e1e2", &fixtures::e1_e2());
    let run = embedlab(["embed".as_ref(), path.as_os_str()], None);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert_eq!(run.report.unwrap()["result"]["verdict"], "Embeddable");
}

#[test]
fn expm_of_z1() {
    let dir = TempDir::new().unwrap();
    let path = write_json(&dir, "z1", &fixtures::z1());
    let run = embedlab(["expm".as_ref(), path.as_os_str()], None);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let got: Vec<Vec<f64>> = serde_json::from_value(run.report.unwrap()["result"]["matrix"].clone()).unwrap();
    let want = [[0.135, 0.233, 0.632], [0.0, 0.368, 0.632], [0.0, 0.0, 1.0]];
    for i in 0..3 {
        for j in 0..3 {
            assert!((got[i][j] - want[i][j]).abs() <= 5e-4, "({i},{j}) = {}", got[i][j]);
        }
    }
}

#[test]
fn identity_classifies() {
    let dir = TempDir::new().unwrap();
    let path = write_json(&dir, "identity3", &RealMatrix::identity(3));
    let run = embedlab(["classify".as_ref(), path.as_os_str()], None);
    assert_eq!(run.code, 0);
    let flags = &run.report.unwrap()["result"]["flags"];
    assert_eq!(flags["stochastic"], true);
    assert_eq!(flags["m_matrix"], true);
}

#[test]
fn diagonal_scaling_counterexample() {
    let dir = TempDir::new().unwrap();
    let base = write_json(&dir, "base", &fixtures::diagonal_scaling_base());
    let scaled = write_json(&dir, "scaled", &fixtures::diagonal_scaled_counterexample());
    assert_eq!(embedlab(["infdiv".as_ref(), base.as_os_str()], None).code, 0);
    let run = embedlab(["infdiv".as_ref(), scaled.as_os_str()], None);
    assert_eq!(run.code, 1);
    assert_eq!(run.report.unwrap()["result"]["verdict"], "NotStronglyInfDivisible");
}

#[test]
fn echoed_command_reproduces_report() {
    let dir = TempDir::new().unwrap();
    for (name, m) in fixture_set() {
        let path = write_json(&dir, name, &m);
        for args in commands(&path) {
            let first = embedlab(&args, None);
            let Some(report) = first.report else {
                // the command does not apply to this matrix (e.g. embed on a Z-matrix)
                assert_eq!(first.code, 65, "{args:?}: {}", first.stderr);
                continue;
            };
            assert_eq!(report["exit_code"], first.code);

            // rebuild the input from the echo alone and rerun the echoed argv
            let replay = dir.path().join(format!("replay-{name}.json"));
            std::fs::write(&replay, report["input"].to_string()).unwrap();
            let mut argv: Vec<String> = serde_json::from_value(report["command"]["argv"].clone()).unwrap();
            argv[1] = replay.display().to_string();
            let second = embedlab(&argv, None);
            assert_eq!(second.code, first.code, "{argv:?}");
            assert_eq!(comparable(second.report.unwrap()), comparable(report), "{argv:?}");
        }
    }
}

#[test]
fn csv_and_json_give_identical_reports() {
    let dir = TempDir::new().unwrap();
    for (name, m) in fixture_set() {
        let json_path = write_json(&dir, name, &m);
        let csv_path = write_csv(&dir, name, &m);
        for (a, b) in commands(&json_path).into_iter().zip(commands(&csv_path)) {
            let (ra, rb) = (embedlab(&a, None), embedlab(&b, None));
            assert_eq!(ra.code, rb.code, "{a:?}");
            assert_eq!(ra.stderr, rb.stderr.replace(".csv", ".json"), "{a:?}");
            if let (Some(x), Some(y)) = (ra.report, rb.report) {
                assert_eq!(comparable(x), comparable(y), "{a:?}");
            }
        }
    }
}

#[test]
fn tolerance_comes_from_flag_or_environment() {
    let dir = TempDir::new().unwrap();
    let path = write_json(&dir, "e1", &fixtures::e1());
    let p = path.to_str().unwrap();

    let env = embedlab(["classify", p], Some("1e-6")).report.unwrap();
    assert_eq!(env["tolerance"]["entry_tol"], 1e-6);
    assert_eq!(env["command"]["argv"], json!(["classify", p, "--tol", "1e-6"]));

    let flag = embedlab(["classify", p, "--tol", "1e-7"], Some("1e-6")).report.unwrap();
    assert_eq!(flag["tolerance"]["entry_tol"], 1e-7);

    let default = embedlab(["classify", p], None).report.unwrap();
    assert_eq!(default["tolerance"]["entry_tol"], 1e-9);
}

#[test]
fn usage_errors_exit_64() {
    let dir = TempDir::new().unwrap();
    let path = write_json(&dir, "e1", &fixtures::e1());
    let p = path.to_str().unwrap();
    for args in [
        vec!["frobnicate", p],
        vec!["embed"],
        vec!["root", p],
        vec!["root", p, "--n", "0"],
        vec!["embed", p, "--bound", "sideways"],
        vec!["infdiv", p, "--roots", "1"],
        vec!["logm", p, "--branch=0,1"],
        vec!["classify", p, "--tol", "-1"],
        vec!["classify", p, "--tol", "abc"],
    ] {
        let run = embedlab(&args, None);
        assert_eq!(run.code, 64, "{args:?}: {}", run.stderr);
        assert!(run.report.is_none());
    }
    assert_eq!(embedlab(["classify", p], Some("0")).code, 64);
}

#[test]
fn malformed_input_exits_65() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("truncated.json", r#"{"n": 2, "rows": [[1, 0], [0"#),
        ("short.json", r#"{"n": 3, "rows": [[1, 0], [0, 1]]}"#),
        ("ragged.json", r#"{"n": 2, "rows": [[1, 0], [0]]}"#),
        ("empty.json", r#"{"n": 0, "rows": []}"#),
        ("kind.json", r#"{"n": 2, "rows": [[1, 0], [0, 1]], "kind": "intensity"}"#),
        ("badkind.json", r#"{"n": 1, "rows": [[1]], "kind": "square"}"#),
        ("word.csv", "1,0\n0,one\n"),
        ("ragged.csv", "1,0\n0\n"),
        ("empty.csv", "# nothing\n"),
    ];
    for (name, text) in cases {
        let path = dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        let run = embedlab(["classify".as_ref(), path.as_os_str()], None);
        assert_eq!(run.code, 65, "{name}: {}", run.stderr);
    }
    let missing = dir.path().join("missing.json");
    assert_eq!(embedlab(["expm".as_ref(), missing.as_os_str()], None).code, 65);

    // embed needs a stochastic matrix, infdiv a nonnegative one
    let z1 = write_json(&dir, "z1", &fixtures::z1());
    assert_eq!(embedlab(["embed".as_ref(), z1.as_os_str()], None).code, 65);
    assert_eq!(embedlab(["infdiv".as_ref(), z1.as_os_str()], None).code, 65);
}

#[test]
fn declared_kind_is_accepted_when_true() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("p.json");
    std::fs::write(&path, r#"{"n": 2, "rows": [[0.9, 0.1], [0.2, 0.8]], "kind": "stochastic", "name": "two-state"}"#).unwrap();
    let run = embedlab(["embed".as_ref(), path.as_os_str()], None);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let report = run.report.unwrap();
    assert_eq!(report["input"]["kind"], "stochastic");
    assert_eq!(report["input"]["name"], "two-state");
}

#[test]
fn logm_branches() {
    let dir = TempDir::new().unwrap();
    let path = write_json(&dir, "e1", &fixtures::e1());
    let p = path.to_str().unwrap();

    let principal = embedlab(["logm", p], None);
    assert_eq!(principal.code, 0);
    let l: RealMatrix = serde_json::from_value(principal.report.unwrap()["result"]["logarithm"].clone()).unwrap();
    assert!(l.relative_distance(&fixtures::z1()) < 1e-10);

    let branch = embedlab(["logm", p, "--branch=0,0,0"], None);
    assert_eq!(branch.code, 0);
    let report = branch.report.unwrap();
    assert_eq!(report["result"]["real"], true);
    assert_eq!(report["command"]["argv"][2], "--branch=0,0,0");

    // a nonzero offset on a real eigenvalue has no real logarithm
    let complex = embedlab(["logm", p, "--branch", "1,0,0"], None);
    assert_eq!(complex.code, 1);
    let report = complex.report.unwrap();
    assert_eq!(report["result"]["real"], false);
    assert!(report["result"]["max_imag"].as_f64().unwrap() > 1.0);

    let rotation = write_json(
        &dir,
        "flip",
        &RealMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap(),
    );
    assert_eq!(embedlab(["logm".as_ref(), rotation.as_os_str()], None).code, 1);
}

#[test]
fn numerical_failures_are_undetermined() {
    let dir = TempDir::new().unwrap();
    let path = write_json(&dir, "identity2", &RealMatrix::identity(2));
    let run = embedlab(["logm".as_ref(), path.as_os_str(), "--branch=0,0".as_ref()], None);
    assert_eq!(run.code, 2, "{}", run.stderr);
    let report = run.report.unwrap();
    assert_eq!(report["status"], "undetermined");
    let error = report["error"].as_str().unwrap();
    assert!(error.contains("ill-conditioned") || error.contains("repeated"), "{error}");
}

#[test]
fn root_and_version() {
    let dir = TempDir::new().unwrap();
    let path = write_json(&dir, "e1", &fixtures::e1());
    let run = embedlab(["root".as_ref(), path.as_os_str(), "--n".as_ref(), "2".as_ref()], None);
    assert_eq!(run.code, 0);
    let report = run.report.unwrap();
    let r: RealMatrix = serde_json::from_value(report["result"]["root"].clone()).unwrap();
    assert!(r.pow(2).unwrap().relative_distance(&fixtures::e1()) < 1e-10);
    assert_eq!(report["version"], env!("CARGO_PKG_VERSION"));
    assert!(report["duration_ms"].as_f64().unwrap() >= 0.0);

    assert_eq!(embedlab(["--version"], None).code, 0);
    assert_eq!(embedlab(["--help"], None).code, 0);
}
