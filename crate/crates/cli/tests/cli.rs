use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn causal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_causal")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name).to_string_lossy().into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("causal-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn vertices_writes_csv_and_config() {
    let out = scratch("vertices");
    let o = causal(&["vertices", "--scenario", "2,2,2,2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "112 vertices");
    let dir = out.join("vertices/2-2-2-2");
    let csv = std::fs::read_to_string(dir.join("vertices.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 113);
    let cfg: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("config.json")).unwrap()).unwrap();
    assert_eq!(cfg["command"], "vertices");
    assert_eq!(cfg["scenario"], "2,2,2,2");
}

#[test]
fn oversized_scenario_exits_with_code_2() {
    let o = causal(&["vertices", "--scenario", "5,5,5,5", "--out", scratch("large").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("too large"));
}

#[test]
fn facets_of_binary_scenario_and_point_list() {
    let out = scratch("facets");
    let o = causal(&["facets", "--scenario", "2,2,2,2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "48 facets; orbits: 16 trivial, 16 GYNI, 16 LGYNI");
    let json = std::fs::read_to_string(out.join("facets/2-2-2-2/facets.json")).unwrap();
    let list: Vec<serde_json::Value> = serde_json::from_str(&json).unwrap();
    assert_eq!(list.len(), 48);

    let o = causal(&["facets", "--points", &data("cube.csv"), "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "6 facets");
    let csv = std::fs::read_to_string(out.join("facets/cube/facets.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn check_w_reports_violation() {
    let out = scratch("check");
    let inst = data("standard_instruments.json");
    let o = causal(&[
        "check-w",
        "--w",
        &data("simple_w.json"),
        "--alice",
        &inst,
        "--bob",
        &inst,
        "--inequality",
        &data("gyni.json"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("lhs 0.533470869121, bound 1/2, VIOLATES"), "{text}");
    let o = causal(&[
        "check-w",
        "--w",
        &data("simple_w.json"),
        "--alice",
        &inst,
        "--bob",
        &inst,
        "--inequality",
        &data("lgyni.json"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(stdout(&o).contains("bound 3/4, VIOLATES"));
}

#[test]
fn check_w_rejects_invalid_process() {
    let out = scratch("invalid");
    std::fs::create_dir_all(&out).unwrap();
    let bad = out.join("bad_w.json");
    let text = std::fs::read_to_string(data("maximally_mixed_w.json")).unwrap();
    // doubling the matrix breaks the trace condition
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    fn double(v: &mut serde_json::Value) {
        match v {
            serde_json::Value::Number(n) => *v = serde_json::json!(n.as_f64().unwrap() * 2.0),
            serde_json::Value::Array(a) => a.iter_mut().for_each(double),
            serde_json::Value::Object(o) => o.values_mut().for_each(double),
            _ => {}
        }
    }
    double(&mut v["matrix"]);
    std::fs::write(&bad, v.to_string()).unwrap();
    let inst = data("standard_instruments.json");
    let o = causal(&[
        "check-w",
        "--w",
        bad.to_str().unwrap(),
        "--alice",
        &inst,
        "--bob",
        &inst,
        "--inequality",
        &data("gyni.json"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn facet_report_on_ocb_inequality() {
    let out = scratch("report");
    let o = causal(&["facet-report", "--inequality", &data("ocb_inequality.json"), "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("320 saturating, affine dim 21, NOT a facet"));
    let o = causal(&["facet-report", "--inequality", &data("gyni.json"), "--out", out.to_str().unwrap()]);
    assert!(stdout(&o).starts_with("30 saturating, affine dim 11, facet (dim 11 of 12)"), "{}", stdout(&o));
}

#[test]
fn optimize_writes_results_and_is_reproducible() {
    let out = scratch("optimize");
    let args = ["optimize", "--objective", "lgyni", "--restarts", "2", "--seed", "5", "--threads", "1", "--out", out.to_str().unwrap()];
    let first = causal(&args);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    assert!(stdout(&first).contains("(lower bound)"));
    let dir = out.join("optimize/lgyni_2-2-2-2_seed5");
    let result = std::fs::read_to_string(dir.join("lgyni_2-2-2-2_seed5_result.json")).unwrap();
    for name in ["w", "alice", "bob"] {
        assert!(dir.join(format!("lgyni_2-2-2-2_seed5_{name}.json")).exists());
    }
    let second = causal(&args);
    assert_eq!(stdout(&first), stdout(&second));
    assert_eq!(result, std::fs::read_to_string(dir.join("lgyni_2-2-2-2_seed5_result.json")).unwrap());

    // the written triple passes check-w against the objective's inequality
    let o = causal(&[
        "check-w",
        "--w",
        dir.join("lgyni_2-2-2-2_seed5_w.json").to_str().unwrap(),
        "--alice",
        dir.join("lgyni_2-2-2-2_seed5_alice.json").to_str().unwrap(),
        "--bob",
        dir.join("lgyni_2-2-2-2_seed5_bob.json").to_str().unwrap(),
        "--inequality",
        &data("lgyni.json"),
        "--tol",
        "1e-8",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn bad_objective_and_config_file() {
    let out = scratch("bad");
    let o = causal(&["optimize", "--objective", "nonsense", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    std::fs::create_dir_all(&out).unwrap();
    let cfg = out.join("job.json");
    std::fs::write(&cfg, r#"{"command": "vertices", "scenario": "2,2,2,2", "bogus": 1}"#).unwrap();
    assert_eq!(causal(&["run", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn run_replays_a_written_config() {
    let out = scratch("run");
    let o = causal(&["vertices", "--scenario", "2,2,2,2", "--label", "first", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let cfg_path = out.join("vertices/first/config.json");
    let o = causal(&["run", cfg_path.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "112 vertices");
}

#[test]
fn export_data_matches_bundled_files() {
    let out = scratch("export");
    let o = causal(&["export-data", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    for entry in std::fs::read_dir(&out).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_str().unwrap().to_string();
        let bundled = std::fs::read_to_string(data(&name)).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), bundled, "{name}");
    }
}
