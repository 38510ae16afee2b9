use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fracb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracb"))
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

const BASIC: &str = r#"{
  "alpha": 1.5, "nu": 2.0, "T": 1.5, "K": 6,
  "spectrum": { "kind": "dirichlet_1d", "L": 3.141592653589793 },
  "phi": { "coefficients": { "1": 1.0, "2": -0.25, "4": 0.05 } },
  "grids": { "time_points": 21 },
  "seed": 11
}"#;

#[test]
fn solve_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.json", BASIC);
    let o = fracb(&["solve", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("modes=6 "));
    let csv = std::fs::read_to_string(dir.path().join("run.series.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,T_1,T_2,T_3,T_4,T_5,T_6");
    assert_eq!(lines.count(), 21);
    let json: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("run.solution.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(json["modes"].as_array().unwrap().len(), 6);
}

#[test]
fn outputs_are_reproducible() {
    let read = |d: &Path| {
        (
            std::fs::read(d.join("run.series.csv")).unwrap(),
            std::fs::read(d.join("run.solution.json")).unwrap(),
            std::fs::read(d.join("run.report.json")).unwrap(),
        )
    };
    let mut runs = Vec::new();
    for threads in ["1", "4"] {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(dir.path(), "run.json", BASIC);
        for cmd in ["solve", "verify"] {
            let o = Command::new(env!("CARGO_BIN_EXE_fracb"))
                .args([cmd, cfg.to_str().unwrap()])
                .env("FRACB_THREADS", threads)
                .output()
                .unwrap();
            assert_eq!(code(&o), 0, "{}", stderr(&o));
        }
        runs.push(read(dir.path()));
    }
    assert!(runs[0] == runs[1]);
}

#[test]
fn verify_passes_then_fails_under_fault_injection() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ok.json", BASIC);
    let o = fracb(&["verify", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("failed=0"));

    let faulty = BASIC.replacen(
        "\"seed\": 11",
        "\"seed\": 11, \"fault\": { \"scale_b\": 1.01 }",
        1,
    );
    let cfg = write_config(dir.path(), "bad.json", &faulty);
    let o = fracb(&["verify", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("mode_periodicity"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("bad.report.json")).unwrap())
            .unwrap();
    assert!(report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .any(|c| c["pass"] == false));
}

#[test]
fn zero_data_is_zero_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let body = BASIC.replacen(
        r#"{ "1": 1.0, "2": -0.25, "4": 0.05 }"#,
        r#"{ "1": 0.0 }"#,
        1,
    );
    let cfg = write_config(dir.path(), "zero.json", &body);
    let o = fracb(&["solve", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("max|u|=0"));
    let csv = std::fs::read_to_string(dir.path().join("zero.series.csv")).unwrap();
    for line in csv.lines().skip(1) {
        assert!(
            line.split(',')
                .skip(1)
                .all(|v| v.parse::<f64>().unwrap() == 0.0),
            "{line}"
        );
    }
}

#[test]
fn sampled_data_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut samples = String::from("x,value\n");
    for i in 0..=200 {
        let x = std::f64::consts::PI * i as f64 / 200.0;
        samples.push_str(&format!("{x},{}\n", x.sin()));
    }
    std::fs::write(dir.path().join("phi.csv"), samples).unwrap();
    let body = BASIC.replacen(
        r#"{ "coefficients": { "1": 1.0, "2": -0.25, "4": 0.05 } }"#,
        r#"{ "samples_csv": "phi.csv" }"#,
        1,
    );
    let cfg = write_config(dir.path(), "s.json", &body);
    let o = fracb(&["solve", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (
            "missing.json",
            BASIC.replacen("\"alpha\": 1.5, ", "", 1),
            "alpha",
        ),
        (
            "type.json",
            BASIC.replacen("\"nu\": 2.0", "\"nu\": \"fast\"", 1),
            "nu",
        ),
        (
            "order.json",
            BASIC.replacen("\"alpha\": 1.5", "\"alpha\": 2.0", 1),
            "alpha",
        ),
        (
            "unknown.json",
            BASIC.replacen("\"seed\": 11", "\"seed\": 11, \"sede\": 1", 1),
            "sede",
        ),
    ];
    for (name, body, needle) in cases {
        let cfg = write_config(dir.path(), name, &body);
        let o = fracb(&["solve", cfg.to_str().unwrap()]);
        assert_eq!(code(&o), 2, "{name}: {}", stderr(&o));
        assert!(stderr(&o).contains(needle), "{name}: {}", stderr(&o));
    }
    let o = fracb(&["solve", dir.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&fracb(&[])), 2);
    assert_eq!(code(&fracb(&["frobnicate"])), 2);
    assert_eq!(
        code(&fracb(&[
            "resonance",
            "--nu",
            "1",
            "--T",
            "1",
            "--points",
            "0"
        ])),
        2
    );
    assert_eq!(
        code(&fracb(&["ml", "--rho", "1.5", "--mu", "1", "--z", "0.5"])),
        2
    );
    assert_eq!(code(&fracb(&["bounds", "--alpha-list", "2.5"])), 2);
    let o = Command::new(env!("CARGO_BIN_EXE_fracb"))
        .args(["ml", "--rho", "1.5", "--mu", "1", "--z", "-1"])
        .env("FRACB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn ml_prints_seventeen_digits() {
    let o = fracb(&["ml", "--rho", "1", "--mu", "1", "--z", "-1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "0.36787944117144233");
    let o = fracb(&[
        "ml", "--rho", "1.5", "--mu", "2", "--z", "-1", "--oracle", "60",
    ]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let mut lines = out.lines();
    let v: f64 = lines.next().unwrap().parse().unwrap();
    assert!((v - 0.737_482_247_901_894_8).abs() <= 1e-16);
    assert!(lines
        .next()
        .unwrap()
        .starts_with("oracle 7.37482247901894714175276"));
    let diff: f64 = lines
        .next()
        .unwrap()
        .trim_start_matches("rel_diff ")
        .parse()
        .unwrap();
    assert!(diff <= 1e-12);
}

#[test]
fn resonance_csv() {
    let o = fracb(&[
        "resonance",
        "--nu",
        "6.283185307179586",
        "--T",
        "1",
        "--points",
        "50",
        "--alpha-list",
        "1.5,2",
    ]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "alpha,x,D");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 100);
    assert!(rows.iter().filter(|r| r[0] == 1.5).all(|r| r[2] > 0.0));
    let last = rows.iter().rfind(|r| r[0] == 2.0).unwrap();
    assert!(last[2].abs() <= 1e-12);
}

#[test]
fn bounds_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.json");
    let o = fracb(&["bounds", "--points", "25", "--json", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["empirical_c0"].as_array().unwrap().len(), 5);
}
