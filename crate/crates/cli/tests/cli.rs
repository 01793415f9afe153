//! The `fracfund` binary end to end: files written, exit codes, output formats.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn fracfund(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fracfund"));
    cmd.args(args).env_remove("FRACFUND_THREADS");
    if let Some(t) = threads {
        cmd.env("FRACFUND_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn config(grid_n: usize, coefficient: &str, forcing: &str, history: &str, t_star: f64) -> String {
    format!(
        "grid_N = {grid_n}\n[problem]\nalpha = 0.5\ntheta = 1.0\nt_star = {t_star}\n\
         [problem.coefficient]\n{coefficient}\n[problem.forcing]\n{forcing}\n[problem.history]\n{history}\n"
    )
}

const ZERO: &str = "preset = \"zero\"\ndim = 2";
const COSINE: &str = "preset = \"cosine\"\nmatrix = [[0.0, 1.0], [-1.0, 0.0]]\nomega = 4.0";
const HARMONIC: &str = "preset = \"harmonic\"\nconstant = [0.0, 1.0]\nsine = [1.0, 0.0]";
const W0: &str = "preset = \"constant\"\nw0 = [1.0, 0.0]";

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn mlf_prints_fifteen_digits() {
    for (args, want) in [
        (["--alpha", "1", "--beta", "1", "--z", "1"], "2.71828182845905"),
        (["--alpha", "0.5", "--beta", "0.5", "--z", "0"], "0.564189583547756"),
        // e erfc(1)
        (["--alpha", "0.5", "--beta", "1", "--z", "-1"], "0.427583576155807"),
    ] {
        let mut full = vec!["mlf"];
        full.extend(args);
        let out = fracfund(&full, None);
        assert_eq!(code(&out), 0);
        assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), want);
    }
}

#[test]
fn mlf_exit_codes() {
    assert_eq!(
        code(&fracfund(&["mlf", "--alpha", "0", "--beta", "1", "--z", "1"], None)),
        2
    );
    assert_eq!(code(&fracfund(&["mlf", "--alpha", "0.5", "--beta", "1"], None)), 2);
    assert_eq!(
        code(&fracfund(&["mlf", "--alpha", "x", "--beta", "1", "--z", "1"], None)),
        2
    );
    assert_eq!(
        code(&fracfund(&["mlf", "--alpha", "0.2", "--beta", "1", "--z", "-60"], None)),
        3
    );
}

#[test]
fn malformed_config_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("f.csv");
    for (i, text) in [
        "grid_N = [".to_string(),
        config(4, ZERO, HARMONIC, W0, 0.0),
        config(16, ZERO, HARMONIC, "preset = \"constant\"\nw0 = [1.0]", 0.0),
        config(16, ZERO, HARMONIC, W0, 0.3),
    ]
    .iter()
    .enumerate()
    {
        let cfg = write_config(&dir, &format!("bad{i}.toml"), text);
        let r = fracfund(&["fundamental", "--config", s(&cfg), "--out", s(&out)], None);
        assert_eq!(code(&r), 2, "{text}");
        assert!(!out.exists());
        assert!(!String::from_utf8(r.stderr).unwrap().is_empty());
    }
    let missing = dir.path().join("nope.toml");
    assert_eq!(
        code(&fracfund(
            &["fundamental", "--config", s(&missing), "--out", s(&out)],
            None
        )),
        2
    );
    let cfg = write_config(&dir, "ok.toml", &config(16, ZERO, HARMONIC, W0, 0.0));
    assert_eq!(code(&fracfund(&["fundamental", "--config", s(&cfg)], None)), 2);
    assert_eq!(
        code(&fracfund(
            &["fundamental", "--config", s(&cfg), "--out", s(&out)],
            Some("zero")
        )),
        2
    );
    assert!(!out.exists());
}

#[test]
fn zero_coefficient_field_is_identity_over_gamma() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "z.toml", &config(16, ZERO, HARMONIC, W0, 0.0));
    let out = dir.path().join("f.csv");
    assert_eq!(
        code(&fracfund(&["fundamental", "--config", s(&cfg), "--out", s(&out)], None)),
        0
    );
    let header = fs::read_to_string(&out).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, "t,s,F_11,F_12,F_21,F_22");
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 17 * 18 / 2);
    let g = 1.0 / std::f64::consts::PI.sqrt();
    for r in rows {
        assert!(r[3] == 0.0 && r[4] == 0.0);
        assert!((r[2] - g).abs() < 1e-15 && (r[5] - g).abs() < 1e-15);
    }
}

#[test]
fn direct_solve_of_constant_forcing_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "c.toml",
        &config(512, ZERO, "preset = \"constant\"\nvalue = [1.0, 1.0]", W0, 0.0),
    );
    let out = dir.path().join("x.csv");
    assert_eq!(
        code(&fracfund(
            &["solve", "--config", s(&cfg), "--method", "direct", "--out", s(&out)],
            None
        )),
        0
    );
    let last = csv_rows(&out).pop().unwrap();
    // w0 + θ^α/Γ(α+1) with Γ(3/2) = √π/2
    let rise = 2.0 / std::f64::consts::PI.sqrt();
    assert_eq!(last[0], 1.0);
    assert!((last[1] - (1.0 + rise)).abs() < 1e-6);
    assert!((last[2] - rise).abs() < 1e-6);

    let meta: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("x.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["method"], "direct");
    assert_eq!(meta["grid_n"], 512);
    assert!(meta["residual"].as_f64().unwrap() < 1e-10);
    assert!(meta["wall_time_s"].as_f64().is_some());
}

#[test]
fn gc_without_history_is_byte_identical_to_pc() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "g.toml", &config(64, COSINE, HARMONIC, W0, 0.0));
    let pc = dir.path().join("pc.csv");
    let gc = dir.path().join("gc.csv");
    assert_eq!(
        code(&fracfund(
            &["solve", "--config", s(&cfg), "--method", "repr-pc", "--out", s(&pc)],
            None
        )),
        0
    );
    assert_eq!(
        code(&fracfund(
            &["solve", "--config", s(&cfg), "--method", "repr-gc", "--out", s(&gc)],
            None
        )),
        0
    );
    assert_eq!(fs::read(&pc).unwrap(), fs::read(&gc).unwrap());
}

#[test]
fn pc_with_history_is_a_precondition_failure() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "h.toml", &config(64, COSINE, HARMONIC, W0, 0.25));
    let out = dir.path().join("pc.csv");
    assert_eq!(
        code(&fracfund(
            &["solve", "--config", s(&cfg), "--method", "repr-pc", "--out", s(&out)],
            None
        )),
        4
    );
    assert!(!out.exists());
    assert_eq!(
        code(&fracfund(
            &["solve", "--config", s(&cfg), "--method", "rk4", "--out", s(&out)],
            None
        )),
        2
    );
    assert_eq!(
        code(&fracfund(&["solve", "--config", s(&cfg), "--out", s(&out)], None)),
        2
    );
}

#[test]
fn method_and_output_can_come_from_the_config() {
    let dir = TempDir::new().unwrap();
    let text = format!(
        "method = \"repr-gc-compact\"\n{}\n[output]\nsolution = \"sol.csv\"\n",
        config(32, COSINE, HARMONIC, W0, 0.25)
    );
    let cfg = write_config(&dir, "m.toml", &text);
    assert_eq!(code(&fracfund(&["solve", "--config", s(&cfg)], None)), 0);
    let meta: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("sol.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["method"], "repr-gc-compact");
    assert_eq!(meta["t_star"], 0.25);
}

#[test]
fn solution_csv_reads_back_as_history() {
    let dir = TempDir::new().unwrap();
    let first = write_config(&dir, "a.toml", &config(64, COSINE, HARMONIC, W0, 0.0));
    let x = dir.path().join("x.csv");
    assert_eq!(
        code(&fracfund(
            &["solve", "--config", s(&first), "--method", "direct", "--out", s(&x)],
            None
        )),
        0
    );
    let second = write_config(
        &dir,
        "b.toml",
        &config(64, COSINE, HARMONIC, "preset = \"samples\"\npath = \"x.csv\"", 0.25),
    );
    for method in ["repr-gc", "repr-gc-compact", "direct"] {
        let y = dir.path().join(format!("{method}.csv"));
        assert_eq!(
            code(&fracfund(
                &["solve", "--config", s(&second), "--method", method, "--out", s(&y)],
                None
            )),
            0
        );
        let a = fs::read_to_string(&x).unwrap();
        let b = fs::read_to_string(&y).unwrap();
        // header plus the 17 nodes of [0, 0.25]
        let prefix = |t: &str| t.lines().take(18).map(str::to_owned).collect::<Vec<_>>();
        assert_eq!(prefix(&a), prefix(&b), "{method}");
    }
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "d.toml", &config(48, COSINE, HARMONIC, W0, 0.25));
    let mut files = Vec::new();
    for threads in ["1", "3"] {
        let f = dir.path().join(format!("f{threads}.csv"));
        let x = dir.path().join(format!("x{threads}.csv"));
        assert_eq!(
            code(&fracfund(
                &["fundamental", "--config", s(&cfg), "--out", s(&f)],
                Some(threads)
            )),
            0
        );
        assert_eq!(
            code(&fracfund(
                &["solve", "--config", s(&cfg), "--method", "repr-gc", "--out", s(&x)],
                Some(threads)
            )),
            0
        );
        files.push((fs::read(&f).unwrap(), fs::read(&x).unwrap()));
    }
    assert!(files[0] == files[1]);
}

#[test]
fn picard_solver_agrees_with_march() {
    let dir = TempDir::new().unwrap();
    let base = config(32, COSINE, HARMONIC, W0, 0.0);
    let march = write_config(&dir, "m.toml", &base);
    let picard = write_config(
        &dir,
        "p.toml",
        &format!("{base}[fundamental]\nsolver = \"picard\"\n[tolerances]\npicard_tol = 1e-13\n"),
    );
    let fm = dir.path().join("m.csv");
    let fp = dir.path().join("p.csv");
    assert_eq!(
        code(&fracfund(
            &["fundamental", "--config", s(&march), "--out", s(&fm)],
            None
        )),
        0
    );
    assert_eq!(
        code(&fracfund(
            &["fundamental", "--config", s(&picard), "--out", s(&fp)],
            None
        )),
        0
    );
    let gap = csv_rows(&fm)
        .iter()
        .zip(csv_rows(&fp))
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect::<Vec<_>>())
        .fold(0.0, f64::max);
    assert!(gap < 1e-10, "{gap}");
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn check<'a>(r: &'a Value, name: &str) -> &'a Value {
    r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap()
}

#[test]
fn verify_zero_coefficient_passes() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "z.toml", &config(128, ZERO, HARMONIC, W0, 0.0));
    let rep = dir.path().join("r.json");
    let out = fracfund(&["verify", "--config", s(&cfg), "--report", s(&rep)], None);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let r = report(&rep);
    assert!(check(&r, "duality")["residual"].as_f64().unwrap() <= 1e-12);
    for c in r["checks"].as_array().unwrap() {
        assert_eq!(c["pass"], true);
        assert!(c["threshold"].is_number());
    }
}

#[test]
fn verify_constant_coefficient_reports_oracle_residual() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "c.toml",
        &config(1024, "preset = \"rotation\"", "preset = \"zero\"", W0, 0.0),
    );
    let rep = dir.path().join("r.json");
    let out = fracfund(&["verify", "--config", s(&cfg), "--report", s(&rep)], None);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let c = check(&report(&rep), "constant-coefficient-oracle").clone();
    assert!(c["residual"].as_f64().unwrap() <= 5e-3);
}

#[test]
fn verify_under_resolved_stiff_run_fails_with_report() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "s.toml",
        &config(
            8,
            "preset = \"constant\"\nmatrix = [[-40.0, 0.0], [0.0, -60.0]]",
            HARMONIC,
            W0,
            0.0,
        ),
    );
    let rep = dir.path().join("r.json");
    let out = fracfund(&["verify", "--config", s(&cfg), "--report", s(&rep)], None);
    assert_eq!(code(&out), 1);
    let r = report(&rep);
    assert!(r["checks"].as_array().unwrap().iter().any(|c| c["pass"] == false));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL"));
}
