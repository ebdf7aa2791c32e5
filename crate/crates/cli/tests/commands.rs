use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn ncpt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncpt")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn config(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn write(dir: &TempDir, name: &str, value: &Value) -> String {
    let p = dir.path().join(name);
    fs::write(&p, serde_json::to_string(value).unwrap()).unwrap();
    p.to_string_lossy().into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

/// Rows of a conditional table CSV keyed by operation label.
fn conditional_rows(p: PathBuf) -> Vec<(String, String, String)> {
    let text = fs::read_to_string(p).unwrap();
    text.lines()
        .skip(1)
        .map(|l| {
            let cells: Vec<&str> = l.split(',').collect();
            (cells[0].to_string(), cells[1].to_string(), cells[2].to_string())
        })
        .collect()
}

#[test]
fn simulate_writes_one_row_per_run_and_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = ncpt(&["simulate", "--runs", "100", "--seed", "1", "--out", path(out)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stdout).contains("D1"));
    }
    let records = fs::read_to_string(a.join("records.csv")).unwrap();
    assert_eq!(records.lines().count(), 101);
    assert!(records.starts_with("h,obs_order,d_first,d_second,d_third,tau1,tau2,tau3\n"));
    for f in ["records.csv", "counts.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    let counts: Value = serde_json::from_str(&fs::read_to_string(a.join("counts.json")).unwrap()).unwrap();
    let total = counts["h0"]["total"].as_u64().unwrap() + counts["h1"]["total"].as_u64().unwrap();
    assert_eq!(total, 100);
}

#[test]
fn simulate_rejects_degenerate_and_malformed_configs() {
    let dir = TempDir::new().unwrap();
    let degenerate = json!({
        "observers": [{"pmf_h0": [0.5, 0.5, 0.0], "pmf_h1": [0.5, 0.5, 0.0], "alpha": 0.05, "beta": 0.05, "max_samples": 10}],
        "preference": [1]
    });
    let cfg = write(&dir, "degenerate.json", &degenerate);
    let out = dir.path().join("out");
    assert_eq!(code(&ncpt(&["simulate", "--config", &cfg, "--out", path(&out)])), 3);
    let broken = dir.path().join("broken.json");
    fs::write(&broken, "{ not json").unwrap();
    assert_eq!(code(&ncpt(&["simulate", "--config", path(&broken), "--out", path(&out)])), 2);
}

#[test]
fn estimate_reproduces_fixture_conditionals() {
    let dir = TempDir::new().unwrap();
    let table = json!({
        "h0": {"total": 20000, "counts": {
            "D2=1,D1=1,D3=1": 4628, "D2=1,D1=1,D3=0": 5372,
            "D1=1,D2=1,D3=1": 3905, "D1=1,D2=1,D3=0": 6095
        }},
        "h1": {"total": 0, "counts": {}}
    });
    let cfg = write(&dir, "counts.json", &table);
    let out = dir.path().join("est");
    let o = ncpt(&["estimate", "--config", &cfg, "--out", path(&out)]);
    // most branches are empty, which is reported as insufficient data
    assert_eq!(code(&o), 3);
    let rows = conditional_rows(out.join("conditional_h0.csv"));
    assert_eq!(rows.len(), 8);
    let find = |op: &str| rows.iter().find(|r| r.0 == op).unwrap().clone();
    assert_eq!(find("T_E1∘T_E2").2, "0.4628");
    assert_eq!(find("T_E2∘T_E1").2, "0.3905");
    assert_eq!(find("T_E1'∘T_E2'").1, "");
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("order_effects.json")).unwrap()).unwrap();
    assert_eq!(report["any_significant"], json!(true));
}

#[test]
fn estimate_on_single_sequence_gives_degenerate_conditionals() {
    let dir = TempDir::new().unwrap();
    let table = json!({
        "h0": {"total": 10, "counts": {"D1=1,D2=1,D3=1": 10}},
        "h1": {"total": 10, "counts": {"D1=1,D2=1,D3=1": 10}}
    });
    let cfg = write(&dir, "counts.json", &table);
    let out = dir.path().join("est");
    ncpt(&["estimate", "--config", &cfg, "--out", path(&out)]);
    for h in 0..2 {
        let rows = conditional_rows(out.join(format!("conditional_h{h}.csv")));
        let filled: Vec<_> = rows.iter().filter(|r| !r.1.is_empty()).collect();
        assert_eq!(filled.len(), 1);
        assert_eq!((filled[0].1.as_str(), filled[0].2.as_str()), ("0", "1"));
    }
}

/// Counts proportional to a classical joint law of the decisions with the
/// collection order drawn independently: no order effect at all.
#[test]
fn commuting_model_shows_no_order_effect() {
    let orders = [[1, 2, 3], [1, 3, 2], [2, 1, 3], [2, 3, 1], [3, 1, 2], [3, 2, 1]];
    let joint = |h: usize, d: [u8; 3]| {
        let p = [[0.3, 0.4, 0.2], [0.7, 0.6, 0.9]][h];
        let base: f64 = (0..3).map(|i| if d[i] == 1 { p[i] } else { 1.0 - p[i] }).product();
        // correlate the first two decisions
        base * if d[0] == d[1] { 1.2 } else { 0.8 }
    };
    let mut sides = Vec::new();
    for h in 0..2 {
        let mut counts = serde_json::Map::new();
        let mut total = 0u64;
        for bits in 0..8u8 {
            let d = [bits >> 2 & 1, bits >> 1 & 1, bits & 1];
            for o in &orders {
                let n = (joint(h, d) * 100_000.0).round() as u64;
                let key = o.iter().map(|&id| format!("D{id}={}", d[id - 1])).collect::<Vec<_>>().join(",");
                counts.insert(key, json!(n));
                total += n;
            }
        }
        sides.push(json!({"total": total, "counts": counts}));
    }
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "counts.json", &json!({"h0": sides[0], "h1": sides[1]}));
    let out = dir.path().join("est");
    let o = ncpt(&["estimate", "--config", &cfg, "--out", path(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("order_effects.json")).unwrap()).unwrap();
    assert_eq!(report["any_significant"], json!(false));
    for e in report["entries"].as_array().unwrap() {
        assert!(e["z"].as_f64().unwrap().abs() < 1e-9);
    }
}

#[test]
fn orders_on_two_stage_fixture() {
    let o = ncpt(&["orders", "--config", &config("orders_two_stage.json"), "--priors", "0.4,0.6"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(
        text,
        "Order of measurements,Probability of error,optimal\n\"Y1,Y2\",0.35,false\n\"Y2,Y1\",0.266,true\n"
    );
}

#[test]
fn orders_with_uninformative_distributions_give_the_smaller_prior() {
    let dir = TempDir::new().unwrap();
    let dist = |order: &str| {
        json!({"order": order, "outcomes": ["a", "b", "c", "d"], "p0": [0.25, 0.25, 0.25, 0.25], "p1": [0.25, 0.25, 0.25, 0.25]})
    };
    let cfg = write(&dir, "d.json", &json!([dist("X,Y"), dist("Y,X")]));
    let o = ncpt(&["orders", "--config", &cfg, "--priors", "0.3,0.7"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for line in text.lines().skip(1) {
        let err: f64 = line.rsplit(',').nth(1).unwrap().parse().unwrap();
        assert!((err - 0.3).abs() < 1e-12, "{line}");
    }
}

#[test]
fn simulated_pipeline_gives_six_order_errors() {
    let dir = TempDir::new().unwrap();
    let sim = dir.path().join("sim");
    let o = ncpt(&["simulate", "--config", &config("simulate_small.json"), "--out", path(&sim)]);
    assert_eq!(code(&o), 0);
    let table = dir.path().join("orders.csv");
    for input in ["counts.json", "records.csv"] {
        let o = ncpt(&["orders", "--config", path(&sim.join(input)), "--out", path(&table)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let text = fs::read_to_string(&table).unwrap();
        let rows: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows.iter().filter(|r| r.ends_with("true")).count(), 1);
        for r in rows {
            let err: f64 = r.rsplit(',').nth(1).unwrap().parse().unwrap();
            assert!(err.is_finite() && err > 0.0 && err <= 0.5, "{r}");
        }
    }
    let est = dir.path().join("est");
    let o = ncpt(&["estimate", "--config", path(&sim.join("records.csv")), "--out", path(&est)]);
    assert!(matches!(code(&o), 0 | 3));
    assert!(est.join("conditional_h1.csv").exists());
}

#[test]
fn detect_solves_the_two_stage_problem() {
    let o = ncpt(&["detect", "--config", &config("detect_two_stage.json")]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert!((v["classical"]["error"].as_f64().unwrap() - 0.35).abs() < 1e-12);
    assert!((v["pvm"]["error"].as_f64().unwrap() - 0.35).abs() < 1e-12);
    assert_eq!(v["holevo_conditions"], json!(true));
    let o = ncpt(&["detect", "--config", &config("detect_two_stage.json"), "--priors", "0.5,0.5"]);
    assert_eq!(stdout_json(&o)["problem"]["priors"], json!([0.5, 0.5]));
}

#[test]
fn detect_rejects_malformed_problems() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", &json!({"priors": [0.5, 0.5], "p0": [0.5, 0.6], "p1": [0.5, 0.5]}));
    assert_eq!(code(&ncpt(&["detect", "--config", &bad])), 2);
    assert_eq!(code(&ncpt(&["detect", "--config", "/nonexistent/problem.json"])), 2);
    assert_eq!(code(&ncpt(&["detect"])), 2);
}

#[test]
fn axioms_pass_on_models_and_fail_on_corrupted_spec() {
    for name in ["axioms_three_events.json", "axioms_classical.json"] {
        let o = ncpt(&["axioms", "--config", &config(name)]);
        assert_eq!(code(&o), 0, "{name}");
        assert_eq!(stdout_json(&o)["all_passed"], json!(true));
    }
    let o = ncpt(&["axioms", "--config", &config("axioms_corrupted.json")]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("projection_invariant"));
}

#[test]
fn state_exists_verdicts() {
    for (name, verdict) in [
        ("state_exists_feasible.json", "feasible"),
        ("state_exists_certificate.json", "certificate"),
        ("state_exists_unknown.json", "unknown"),
    ] {
        let o = ncpt(&["state-exists", "--config", &config(name)]);
        assert_eq!(code(&o), 0, "{name}");
        assert_eq!(stdout_json(&o)["verdict"], json!(verdict), "{name}");
    }
    let dir = TempDir::new().unwrap();
    let bad = write(
        &dir,
        "bad.json",
        &json!({"povm": {"elements": [{"real": [[0.5]]}, {"real": [[0.2]]}]}, "target": [0.5, 0.5]}),
    );
    assert_eq!(code(&ncpt(&["state-exists", "--config", &bad])), 2);
}
