use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn schmidt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_schmidt")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// `λ` column of the decompose output.
fn coefficients(o: &Output) -> Vec<f64> {
    stdout(o)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split_whitespace().nth(1).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn decompose_files() {
    let dir = TempDir::new().unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bell = write(&dir, "bell.json", &format!(r#"{{"dims": [2, 2], "amps": [[{h}, 0], [0, 0], [0, 0], [{h}, 0]]}}"#));
    let o = schmidt(&["decompose", "--state", &bell, "--cut", "1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).matches("0.7071067812").count(), 2);

    let product = write(&dir, "product.json", r#"{"dims": [2, 2], "amps": [[1, 0], [0, 0], [0, 0], [0, 0]]}"#);
    let o = schmidt(&["decompose", "--state", &product]);
    assert_eq!(coefficients(&o), vec![1.0, 0.0]);

    let t = 1.0 / 3f64.sqrt();
    let w = write(
        &dir,
        "w.json",
        &format!(r#"{{"dims": [2, 2, 2], "amps": [[0,0],[{t},0],[{t},0],[0,0],[{t},0],[0,0],[0,0],[0,0]]}}"#),
    );
    let o = schmidt(&["decompose", "--state", &w, "--cut", "1"]);
    let c = coefficients(&o);
    assert!((c[0] - (2.0f64 / 3.0).sqrt()).abs() < 1e-9);
    assert!((c[1] - (1.0f64 / 3.0).sqrt()).abs() < 1e-9);
    // entanglement spectrum
    let xi: f64 = stdout(&o).lines().nth(1).unwrap().split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!((xi - 1.5f64.ln()).abs() < 1e-9);
}

#[test]
fn decompose_rejects_malformed_input() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", r#"{"dims": [2, 2], "amps": [[1, 0]]}"#);
    assert_eq!(schmidt(&["decompose", "--state", &bad]).status.code(), Some(1));
    let unnormalized = write(&dir, "u.json", r#"{"dims": [2], "amps": [[1, 0], [1, 0]]}"#);
    assert_eq!(schmidt(&["decompose", "--state", &unnormalized]).status.code(), Some(1));
    let garbage = write(&dir, "g.json", "not json");
    assert_eq!(schmidt(&["decompose", "--state", &garbage]).status.code(), Some(1));
    assert_eq!(schmidt(&["decompose", "--generator", "bell", "--cut", "0"]).status.code(), Some(1));
}

#[test]
fn maximize_reports() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("r.json");
    let trace = dir.path().join("t.csv");
    let o = schmidt(&[
        "maximize", "--space", "identity", "--dims", "2,2", "--p", "1", "--k", "2", "--restarts", "3", "--out",
        out.to_str().unwrap(), "--trace", trace.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    for key in ["experiment", "params", "results", "seeds", "meta"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert_eq!(r.as_object().unwrap().len(), 5);
    assert!((r["results"]["best_value"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-8);
    assert_eq!(r["seeds"].as_array().unwrap().len(), 3);
    let csv = std::fs::read_to_string(&trace).unwrap();
    assert!(csv.starts_with("restart,iter,objective,residual\n"));
    assert!(csv.lines().count() > 3);
}

#[test]
fn maximize_fermion_configs() {
    let dir = TempDir::new().unwrap();
    for (d, n, split, want) in [(6, 3, 1, 1.0 / 3.0), (8, 4, 2, 0.25)] {
        let cfg = write(
            &dir,
            "f.json",
            &format!(
                r#"{{"seed": 3, "restarts": 4,
                    "params": {{"space": {{"kind": "fermion", "d": {d}, "n": {n}, "split": {split}}},
                               "terms": [{{"cut": [1], "p": 2, "k": 1}}]}}}}"#
            ),
        );
        let out = dir.path().join("f_out.json");
        let o = schmidt(&["maximize", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
        let best = report(&out)["results"]["best_value"].as_f64().unwrap();
        assert!((best * best - want).abs() < 1e-6, "d={d}: {best}");
    }
}

#[test]
fn schema_errors_exit_1() {
    let dir = TempDir::new().unwrap();
    let p_low = write(
        &dir,
        "p.json",
        r#"{"params": {"space": {"kind": "identity", "dims": [2, 2]}, "terms": [{"cut": [1], "p": 0.5, "k": 1}]}}"#,
    );
    let o = schmidt(&["maximize", "--config", &p_low]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("p must be ≥ 1"));

    let k_zero = write(
        &dir,
        "k.json",
        r#"{"params": {"space": {"kind": "identity", "dims": [2, 2]}, "terms": [{"cut": [1], "p": 2, "k": 0}]}}"#,
    );
    assert_eq!(schmidt(&["maximize", "--config", &k_zero]).status.code(), Some(1));

    let unknown = write(&dir, "u.json", r#"{"seed": 1, "sede": 2}"#);
    assert_eq!(schmidt(&["ame", "--config", &unknown, "--dims", "3,3,3"]).status.code(), Some(1));
    let unknown_param = write(&dir, "v.json", r#"{"params": {"dims": [3, 3, 3], "cuts": 2}}"#);
    assert_eq!(schmidt(&["ame", "--config", &unknown_param]).status.code(), Some(1));
    assert_eq!(schmidt(&["maximize", "--space", "identity", "--dims", "2,2", "--p", "0.9"]).status.code(), Some(1));
}

#[test]
fn all_restarts_at_max_iters_exit_2() {
    let o = schmidt(&["maximize", "--space", "identity", "--dims", "3,3", "--max-iters", "2", "--restarts", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = schmidt(&["ame", "--dims", "2,2,2", "--seed", "11", "--restarts", "3", "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
        let mut r = report(&out);
        r.as_object_mut().unwrap().remove("meta");
        serde_json::to_string(&r).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn ame_three_qutrits() {
    let o = schmidt(&["ame", "--dims", "3,3,3"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("successes: 10/10"));
}

#[test]
fn variety_rank_one() {
    let o = schmidt(&["variety", "--space", "full", "--dims", "3,3", "--target", "rank1"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("D = 4"));
}

#[test]
fn channel_dephasing() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "dephasing.json", r#"{"kind": "dephasing", "q": 0.5}"#);
    let out = dir.path().join("c.json");
    let o = schmidt(&["channel", "--spec", &spec, "--alpha", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let s = report(&out)["results"]["details"]["min_entropy"].as_f64().unwrap();
    assert!(s.abs() < 1e-9);

    let kraus = write(&dir, "id.json", r#"{"d_s": 2, "d_a": 2, "kraus": [[[[1,0],[0,0]],[[0,0],[1,0]]]]}"#);
    let o = schmidt(&["channel", "--spec", &kraus, "--second", &spec, "--restarts", "3"]);
    assert!(o.status.success());

    let not_tp = write(&dir, "bad.json", r#"{"d_s": 1, "d_a": 1, "kraus": [[[[2,0]]]]}"#);
    assert_eq!(schmidt(&["channel", "--spec", &not_tp]).status.code(), Some(1));
}

#[test]
fn fermion_modes() {
    let o = schmidt(&["fermion", "--d", "6", "--n", "3", "--split", "1"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("best value squared: 0.333333"));
    let o = schmidt(&["fermion", "--d", "6", "--n", "4", "--split", "2", "--mode", "yang", "--restarts", "3"]);
    assert!(stdout(&o).contains("yang state dominates: true"));
    let o = schmidt(&["fermion", "--d", "6", "--n", "2", "--split", "1", "--mode", "entropy", "--restarts", "3"]);
    assert!(o.status.success());
}

#[test]
fn table1_small() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "t.json", r#"{"params": {"rows": [{"kind": "ame", "dims": [3, 3, 3]}]}}"#);
    let csv = dir.path().join("t.csv");
    let o = schmidt(&["table1", "--config", &cfg, "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("experiment,mean_iterations,successes,restarts\n"));
    assert!(text.contains("AME 3x3x3,"));
    assert!(text.trim_end().ends_with(",10,10"));
}
