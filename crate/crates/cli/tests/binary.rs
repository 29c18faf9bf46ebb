use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn asymptotica(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_asymptotica"));
    cmd.args(args);
    match threads {
        Some(n) => cmd.env("ASYMPTOTICA_THREADS", n),
        None => cmd.env_remove("ASYMPTOTICA_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn report_without_timestamp(path: &str) -> Value {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    v["provenance"].as_object_mut().unwrap().remove("timestamp");
    v
}

#[test]
fn analyze_writes_report_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let spec =
        write(dir.path(), "t.json", r#"{"type": "gallery", "name": "jordan_plus_identity", "params": {"beta": 5}}"#);
    let out = dir.path().join("report.json");
    let trace = dir.path().join("trace.csv");
    let o = asymptotica(
        &["analyze", "--spec", &spec, "--out", out.to_str().unwrap(), "--trace", trace.to_str().unwrap()],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["request"]["command"], "analyze");
    assert_eq!(report["provenance"]["version"], env!("CARGO_PKG_VERSION"));
    assert!(report["provenance"]["timestamp"].as_u64().unwrap() > 0);
    let csv = std::fs::read_to_string(&trace).unwrap();
    assert!(csv.starts_with("n,cesaro_mean_delta,residual\n"));
}

#[test]
fn envelope_from_csv_on_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let seq = write(dir.path(), "ones.csv", &"1\n".repeat(512));
    let o = asymptotica(&["envelope", "--spec", &seq], None);
    assert_eq!(o.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["results"]["phi_minus"], 1.0);
    assert_eq!(report["results"]["phi_plus"], 1.0);
    assert_eq!(report["results"]["uniform"], true);
}

#[test]
fn identical_runs_are_byte_identical_modulo_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "t.json", r#"{"type": "gallery", "name": "block_shift"}"#);
    let probes = write(
        dir.path(),
        "p.json",
        r#"[{"support": [0], "amplitudes": [[1, 0]]}, {"support": [0, 3], "amplitudes": [[1, 0], [0, 1]]}]"#,
    );
    let mut reports = Vec::new();
    for (k, threads) in [Some("1"), Some("3"), None].into_iter().enumerate() {
        let out = dir.path().join(format!("r{k}.json")).to_str().unwrap().to_string();
        let trace = dir.path().join(format!("r{k}.csv")).to_str().unwrap().to_string();
        let o = asymptotica(
            &["envelope", "--spec", &spec, "--probes", &probes, "--seed", "7", "--out", &out, "--trace", &trace],
            threads,
        );
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        reports.push((report_without_timestamp(&out), std::fs::read(&trace).unwrap()));
    }
    assert_eq!(reports[0], reports[1]);
    assert_eq!(reports[0], reports[2]);
    // the pretty-printed text differs only on the timestamp line
    let a = std::fs::read_to_string(dir.path().join("r0.json")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("r1.json")).unwrap();
    let strip = |s: &str| s.lines().filter(|l| !l.contains("\"timestamp\"")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let broken = write(dir.path(), "broken.json", "{\"type\": \"dense\",\n \"entries\": [[[1, 0]]");
    let o = asymptotica(&["analyze", "--spec", &broken], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let unknown = write(dir.path(), "unknown.json", r#"{"type": "dense", "entries": [[[1, 0]]], "extra": 1}"#);
    assert_eq!(asymptotica(&["classify", "--spec", &unknown], None).status.code(), Some(2));

    let missing = dir.path().join("nope.json");
    assert_eq!(asymptotica(&["classify", "--spec", missing.to_str().unwrap()], None).status.code(), Some(2));

    let half =
        write(dir.path(), "half.json", r#"{"type": "dense", "entries": [[[0.5, 0], [0, 0]], [[0, 0], [1, 0]]]}"#);
    let o = asymptotica(&["witness", "--spec", &half], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not power bounded"));

    let rot = write(dir.path(), "rot.json", r#"{"type": "gallery", "name": "similar_rotation"}"#);
    assert_eq!(asymptotica(&["analyze", "--spec", &rot, "--tol", "1e-300"], None).status.code(), Some(3));
    assert_eq!(asymptotica(&["analyze", "--spec", &rot, "--tol", "-1"], None).status.code(), Some(2));
    assert_eq!(asymptotica(&["analyze", "--spec", &rot], Some("zero")).status.code(), Some(2));

    assert_eq!(asymptotica(&["gallery-list"], None).status.code(), Some(0));
}
