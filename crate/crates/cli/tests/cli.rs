use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_laplace-sums"))
}

fn run(args: &[&str]) -> i32 {
    let out = bin().args(args).output().expect("binary runs");
    out.status.code().expect("exit code")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(rows: &[Vec<String>], i: usize) -> Vec<f64> {
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

fn manifest(path: &Path) -> Value {
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    for o in v["outputs"].as_array().unwrap() {
        assert!(Path::new(o.as_str().unwrap()).exists(), "missing output {o}");
    }
    v
}

fn config(dir: &Path, s0: &str, t: f64, extra: &str) -> String {
    let path = dir.join("config.json");
    let text = format!(
        r#"{{"beta":2,"alpha_r":1,"n":400,"t":{t},"tol":1e-9,"S0":{s0},
            "L0":{{"pieces":[],"outside":1}},"picture":"probability","grid_points":101{extra}}}"#
    );
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

const QUADRATIC: &str = r#"{"pieces":[{"a":0,"b":1,"coeffs":[0.18,-0.6,0.5]}],"outside":"inf"}"#;

#[test]
fn series_eval_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = out.to_str().unwrap();
    assert_eq!(run(&["series-eval", "--f", "paper-example", "--alpha", "1", "--n", "10000", "--out", o]), 0);
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["n", "direct_value", "truncation_bound"]);
    let ratio = column(&rows, 1)[0] / (2.0 * PI * 1e4).sqrt();
    assert!((0.99..=1.01).contains(&ratio), "{ratio}");
    let m = manifest(&dir.path().join("s.csv.manifest.json"));
    assert_eq!(m["command"], "series-eval");
}

#[test]
fn series_eval_exact_half_uses_theta_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = out.to_str().unwrap();
    assert_eq!(run(&["series-eval", "--f", "paper-example", "--alpha", "1/2", "--n", "10000", "--out", o]), 0);
    let (_, rows) = read_csv(&out);
    let v = column(&rows, 1)[0];
    // Independent theta_3 sum.
    let q = (-2.0 * PI * PI).exp();
    let z = -100.0 * PI * 0.5;
    let theta = 1.0 + 2.0 * (1..6).map(|k| q.powi(k * k) * (2.0 * k as f64 * z).cos()).sum::<f64>();
    let ratio = v / ((2.0 * PI * 1e4).sqrt() * theta);
    assert!((0.9..=1.1).contains(&ratio), "{ratio}");
}

#[test]
fn series_eval_empty_list_writes_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e.csv");
    assert_eq!(run(&["series-eval", "--f", "linear", "--alpha", "1", "--n", "", "--out", out.to_str().unwrap()]), 0);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "n,direct_value,truncation_bound\n");
}

#[test]
fn series_eval_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let o = out.to_str().unwrap();
    assert_eq!(run(&["series-eval", "--f", "{not json", "--alpha", "1", "--n", "5", "--out", o]), 2);
    assert_eq!(run(&["series-eval", "--f", "linear", "--alpha", "-1", "--n", "5", "--out", o]), 2);
    // Bounded pieces with a negative value outside: terms never decay.
    let growing = r#"{"pieces":[{"a":0,"b":1,"coeffs":[1]}],"outside":-1}"#;
    assert_eq!(run(&["series-eval", "--f", growing, "--alpha", "1", "--n", "2", "--out", o]), 3);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for p in [&a, &b] {
        let args = ["series-eval", "--f", "paper-example", "--alpha", "2/5", "--n", "100,1000,5000", "--out", p.to_str().unwrap()];
        assert_eq!(run(&args), 0);
    }
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn sums_agree_with_theta_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sums.csv");
    let args = ["sums", "--n", "400,1000", "--alpha", "0.5", "--gamma", "0.5", "--x0", "0.5", "--out", out.to_str().unwrap()];
    assert_eq!(run(&args), 0);
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["n", "exp_sum", "gaussian_direct", "gaussian_theta", "oscillatory_p"]);
    for (d, t) in column(&rows, 2).iter().zip(column(&rows, 3)) {
        assert!((d / t - 1.0).abs() < 1e-10);
    }
}

#[test]
fn figure_1a_ratio_decreases() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["figures", "--which", "1a", "--out", dir.path().to_str().unwrap()]), 0);
    let (header, rows) = read_csv(&dir.path().join("figure_1a.csv"));
    assert_eq!(header, ["n", "ratio_minus_1"]);
    assert_eq!(rows.len(), 40);
    let r = column(&rows, 1);
    assert!(r.windows(2).all(|w| w[1].abs() < w[0].abs()));
    let m = manifest(&dir.path().join("figure_1a.manifest.json"));
    assert_eq!(m["inputs"]["n_grid"]["points"], 40);
}

#[test]
fn figure_1d_absolute_error_vanishes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["figures", "--which", "1d", "--out", dir.path().to_str().unwrap()]), 0);
    let (header, rows) = read_csv(&dir.path().join("figure_1d.csv"));
    assert_eq!(header, ["n", "scaled_direct", "p", "relative_error", "absolute_error"]);
    let abs = column(&rows, 4);
    let head = abs[..20].iter().cloned().fold(0.0, f64::max);
    let tail = abs[abs.len() - 20..].iter().cloned().fold(0.0, f64::max);
    assert!(tail < head / 5.0, "{head} {tail}");
}

#[test]
fn unknown_figure_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["figures", "--which", "2x", "--out", dir.path().to_str().unwrap()]), 2);
}

#[test]
fn sis_stationary_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), QUADRATIC, 0.5, "");
    let out = dir.path().join("out");
    assert_eq!(run(&["sis", "stationary", "--config", &cfg, "--out", out.to_str().unwrap()]), 0);
    let (header, rows) = read_csv(&out.join("stationary_x.csv"));
    assert_eq!(header, ["x", "q_star"]);
    assert!(rows.iter().any(|r| r[0] == "0.5" && r[1].parse::<f64>().unwrap() == 0.0));
    let (_, h) = read_csv(&out.join("hamiltonian_h_grid.csv"));
    assert_eq!(h.len(), 51 * 101);
    manifest(&out.join("sis_stationary.manifest.json"));
}

#[test]
fn sis_conservation_ladder_converges() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), QUADRATIC, 0.5, r#","n_ladder":[100,400,1600]"#);
    let out = dir.path().join("out");
    assert_eq!(run(&["sis", "conservation", "--config", &cfg, "--out", out.to_str().unwrap()]), 0);
    let (_, rows) = read_csv(&out.join("conservation.csv"));
    let dev: Vec<f64> = column(&rows, 3).iter().map(|r| (r - 1.0).abs()).collect();
    assert!(dev[1] < dev[0] && dev[2] < dev[1], "{dev:?}");
}

#[test]
fn sis_generating_and_wkb() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), QUADRATIC, 0.5, r#","z_values":[1.0, 4.0]"#);
    let out = dir.path().join("out");
    let o = out.to_str().unwrap();
    assert_eq!(run(&["sis", "generating", "--config", &cfg, "--out", o]), 0);
    let (header, rows) = read_csv(&out.join("generating.csv"));
    assert_eq!(header, ["z", "sigma", "lambda", "regime", "direct_gamma", "ratio"]);
    assert_eq!(rows[0][3], "interior");
    assert_eq!(rows[1][3], "boundary-right");
    assert_eq!(run(&["sis", "wkb-check", "--config", &cfg, "--out", o]), 0);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("wkb_report.json")).unwrap()).unwrap();
    assert!(report["max_action_error"].as_f64().unwrap() < 0.01);
}

#[test]
fn sis_evolve_past_caustic_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let concave = r#"{"pieces":[{"a":0,"b":1,"coeffs":[-0.125,0.5,-0.5]}],"outside":"inf"}"#;
    let cfg = config(dir.path(), concave, 5.0, "");
    let out = dir.path().join("out");
    assert_eq!(run(&["sis", "evolve", "--config", &cfg, "--out", out.to_str().unwrap()]), 4);
    let m = manifest(&out.join("sis_evolve.manifest.json"));
    let safe = m["caustic"]["safe_time"].as_f64().unwrap();
    assert!(safe > 0.0 && safe < 5.0);
    assert!(out.join("field_safe.csv").exists());
}

#[test]
fn sis_evolve_writes_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), QUADRATIC, 0.5, "");
    let out = dir.path().join("out");
    assert_eq!(run(&["sis", "evolve", "--config", &cfg, "--out", out.to_str().unwrap()]), 0);
    let (header, rows) = read_csv(&out.join("field_final.csv"));
    assert_eq!(header, ["grid", "action", "amplitude"]);
    assert_eq!(rows.len(), 101);
    assert!(manifest(&out.join("sis_evolve.manifest.json"))["caustic"].is_null());
}

#[test]
fn sis_bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"beta": -1}"#).unwrap();
    let out = dir.path().join("out");
    assert_eq!(run(&["sis", "evolve", "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()]), 2);
}
