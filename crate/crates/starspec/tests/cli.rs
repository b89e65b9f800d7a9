use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;
use starspec::cli::run;
use tempfile::TempDir;

fn run_in(dir: &Path, args: &[&str]) -> i32 {
    let out = dir.to_str().unwrap();
    let mut argv = vec!["starspec"];
    argv.extend_from_slice(args);
    argv.extend_from_slice(&["--out", out]);
    run(argv)
}

fn json(dir: &Path, name: &str) -> Value {
    let text = fs::read_to_string(dir.join(format!("{name}.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn eigenvalues(v: &Value) -> Vec<f64> {
    v["summary"]["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(["starspec", "--help"]), 0);
    assert_eq!(run(["starspec", "--version"]), 0);
    assert_eq!(run(["starspec", "solve", "--help"]), 0);
}

#[test]
fn input_errors_exit_two() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    assert_eq!(run(["starspec"]), 2);
    assert_eq!(run_in(d, &["bogus"]), 2);
    assert_eq!(run_in(d, &["solve", "--no-such-flag"]), 2);
    assert_eq!(run_in(d, &["solve", "--h", "0"]), 2);
    assert_eq!(run_in(d, &["solve", "--R", "-1"]), 2);
    assert_eq!(run_in(d, &["solve", "--graph", "broken:2.0"]), 2);
    assert_eq!(run_in(d, &["solve", "--graph", "zigzag"]), 2);
    assert_eq!(run_in(d, &["solve", "--operator", "robin", "--gamma", "-1"]), 2);
    assert_eq!(run_in(d, &["sweep-theta", "--thetas", "0.3,0.2"]), 2);
    assert_eq!(run_in(d, &["weyl", "--n", "40,10"]), 2);
    assert_eq!(run_in(d, &["solve", "--jobs", "0"]), 2);
    assert_eq!(run_in(d, &["solve", "--config", "/nonexistent/run.toml"]), 2);
    let cfg = d.join("bad.toml");
    fs::write(&cfg, "[solve]\nradius = 3\n").unwrap();
    assert_eq!(run_in(d, &["solve", "--config", cfg.to_str().unwrap()]), 2);
    // Nothing was computed, so nothing was written.
    assert!(!d.join("solve.json").exists());
}

#[test]
fn line_has_nothing_below_minus_four() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let code = run_in(
        d,
        &[
            "solve", "--graph", "line", "--alpha", "-1", "--R", "12", "--h", "0.04", "--k", "4",
        ],
    );
    assert_eq!(code, 0);
    let v = json(d, "solve");
    assert_eq!(v["summary"]["count_below"], 0);
    assert_eq!(v["summary"]["threshold"], -4.0);
    let ev = eigenvalues(&v);
    assert_eq!(ev.len(), 4);
    assert!(ev.iter().all(|&e| e > -4.0));
    // The resolved configuration is echoed.
    assert_eq!(v["config"]["mesh"]["radius"], 12.0);
    assert_eq!(v["config"]["problem"]["graph"]["shape"], "line");
    let csv = fs::read_to_string(d.join("solve.csv")).unwrap();
    assert!(csv.starts_with("n,eigenvalue,residual,below_threshold\n"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn weyl_quotients_decrease() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    assert_eq!(run_in(d, &["weyl", "--k", "0", "--n", "10,100"]), 0);
    let rows: Vec<Vec<f64>> = fs::read_to_string(d.join("weyl.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[1][1] < rows[0][1]);
}

#[test]
fn degrees_switch_matches_radians() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("rad"), tmp.path().join("deg"));
    let common = [
        "solve",
        "--alpha",
        "-1",
        "--R",
        "6",
        "--h",
        "0.1",
        "--grading",
        "2",
        "--k",
        "2",
    ];
    let mut rad = common.to_vec();
    rad.extend(["--graph", "broken:0.5"]);
    let deg_angle = format!("broken:{}", 0.5f64.to_degrees());
    let mut deg = common.to_vec();
    deg.extend(["--graph", &deg_angle, "--degrees"]);
    assert_eq!(run_in(&a, &rad), 0);
    assert_eq!(run_in(&b, &deg), 0);
    let (ea, eb) = (eigenvalues(&json(&a, "solve")), eigenvalues(&json(&b, "solve")));
    for (x, y) in ea.iter().zip(&eb) {
        assert!((x - y).abs() < 1e-9 * x.abs());
    }
}

#[test]
fn flags_override_the_config_file() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let cfg = d.join("run.toml");
    fs::write(
        &cfg,
        "[solve]\nk = 3\nproblem = { operator = \"robin_sector\", gamma = 1.0, theta = 0.4 }\n\
         mesh = { radius = 6.0, h = 0.1, grading = 2.0 }\n",
    )
    .unwrap();
    assert_eq!(
        run_in(d, &["solve", "--config", cfg.to_str().unwrap(), "--gamma", "2"]),
        0
    );
    let v = json(d, "solve");
    assert_eq!(v["config"]["k"], 3);
    assert_eq!(v["config"]["problem"]["operator"], "robin_sector");
    assert_eq!(v["config"]["problem"]["gamma"], 2.0);
    assert_eq!(v["config"]["problem"]["theta"], 0.4);
    // Robin threshold −γ².
    assert_eq!(v["summary"]["threshold"], -4.0);
}

#[test]
fn failed_flag_exits_one() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let cfg = d.join("strict.toml");
    fs::write(&cfg, "[weyl]\nratio_tol = 1e-9\n").unwrap();
    assert_eq!(run_in(d, &["weyl", "--config", cfg.to_str().unwrap()]), 1);
    let v = json(d, "weyl");
    let failed: Vec<&str> = v["flags"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|f| f["passed"] == false)
        .map(|f| f["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["quotient_decay"]);
}

#[test]
fn dump_writes_parseable_files() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let code = run_in(
        d,
        &[
            "solve",
            "--graph",
            "broken:0.6",
            "--R",
            "2",
            "--h",
            "0.25",
            "--k",
            "1",
            "--dump",
        ],
    );
    assert_eq!(code, 0);
    let mesh = starspec::dump::parse_mesh(&fs::read_to_string(d.join("mesh.txt")).unwrap()).unwrap();
    let a = starspec::dump::parse_matrix(&fs::read_to_string(d.join("A.txt")).unwrap()).unwrap();
    assert!(!mesh.crack_pairs.is_empty());
    let n = a.iter().map(|e| e.0.max(e.1)).max().unwrap() + 1;
    assert!(n < mesh.vertices.len());
    assert_eq!(run_in(d, &["weyl", "--dump"]), 2);
}

#[test]
fn one_d_model_from_the_command_line() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    assert_eq!(
        run_in(
            d,
            &["solve", "--operator", "delta-prime-1d", "--points", "2000", "--k", "1"]
        ),
        0
    );
    let e = eigenvalues(&json(d, "solve"))[0];
    assert!(e > -4.0 && e < -3.99, "{e}");
}

#[test]
fn binary_honours_the_output_variable() {
    let tmp = TempDir::new().unwrap();
    let bin = env!("CARGO_BIN_EXE_starspec");
    let status = Command::new(bin)
        .args(["weyl", "--quiet"])
        .env("STARSPEC_OUT", tmp.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(tmp.path().join("weyl.csv").exists());

    let flag_dir = tmp.path().join("flag");
    let status = Command::new(bin)
        .args(["weyl", "--quiet", "--out", flag_dir.to_str().unwrap()])
        .env("STARSPEC_OUT", tmp.path().join("env"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(flag_dir.join("weyl.json").exists());
    assert!(!tmp.path().join("env").exists());

    let out = Command::new(bin).arg("--bogus").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(String::from_utf8_lossy(&out.stderr).trim().lines().count(), 1);
}
