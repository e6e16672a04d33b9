use std::process::{Command, Output};

use num_complex::Complex64 as C64;
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_phasedelta"));
    c.env_remove("SOURCE_DATE_EPOCH");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn footer(csv: &str, key: &str) -> String {
    let prefix = format!("# summary.{key} = ");
    csv.lines().find_map(|l| l.strip_prefix(&prefix)).expect("footer line").to_string()
}

#[test]
fn default_q_grid_is_normalized_csv() {
    let o = run(&["grid", "--nx", "121", "--ny", "121"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "x,y,re,im"));
    let rows = text.lines().filter(|l| !l.starts_with('#') && *l != "x,y,re,im").count();
    assert_eq!(rows, 121 * 121);
    let integral: f64 = footer(&text, "integral_re").parse().unwrap();
    assert!((integral - 1.0).abs() < 1e-6, "{integral}");
    assert_eq!(footer(&text, "has_negative_values"), "false");
}

#[test]
fn identical_config_gives_identical_bytes() {
    let args = ["grid", "--nx", "31", "--ny", "31", "--timestamp", "2020-02-02T00:00:00Z", "--format", "json"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["meta"]["timestamp"], "2020-02-02T00:00:00Z");
}

#[test]
fn timestamp_falls_back_to_source_date_epoch() {
    let o = bin().args(["grid", "--nx", "3", "--ny", "3"]).env("SOURCE_DATE_EPOCH", "1700000000").output().unwrap();
    assert!(stdout(&o).contains("# timestamp = \"1700000000\""));
    let o = run(&["grid", "--nx", "3", "--ny", "3"]);
    assert!(stdout(&o).contains("# timestamp = \"unspecified\""));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("job.toml");
    std::fs::write(&cfg, "nx = 7\nny = 9\nalpha1 = [1.0, 0.5]\nformat = \"json\"\ntimestamp = \"from-file\"\n").unwrap();
    let out = dir.path().join("q.json");
    let o = run(&[
        "grid",
        "--config",
        cfg.to_str().unwrap(),
        "--nx",
        "5",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["nx"], 5);
    assert_eq!(v["ny"], 9);
    assert_eq!(v["meta"]["alpha1"], serde_json::json!([1.0, 0.5]));
    assert_eq!(v["meta"]["timestamp"], "from-file");
}

#[test]
fn number_state_wigner_goes_negative() {
    let o = run(&["grid", "--field", "wigner", "--fock", "2", "--x-range", "-4", "4", "--y-range", "-4", "4", "--nx", "41", "--ny", "41"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(footer(&text, "has_negative_values"), "true");
    assert!(text.contains("xp_quadratures"));
    // W(0,0) of |2⟩ is +1/π
    let origin = text.lines().find(|l| l.starts_with("0.0,0.0,")).unwrap();
    let w: f64 = origin.split(',').nth(2).unwrap().parse().unwrap();
    assert!((w - std::f64::consts::FRAC_1_PI).abs() < 1e-8, "{w}");
}

#[test]
fn cat_wigner_shows_interference() {
    let o = run(&["grid", "--field", "wigner", "--alpha1", "2", "0", "--alpha2", "-2", "0", "--zeta", "-1", "0",
        "--x-range", "-8", "8", "--y-range", "-8", "8", "--nx", "65", "--ny", "65"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(footer(&text, "has_negative_values"), "true");
    let integral: f64 = footer(&text, "integral_re").parse().unwrap();
    assert!((integral - 1.0).abs() < 1e-3, "{integral}");
}

#[test]
fn unit_gain_p_is_a_numeric_guard() {
    let o = run(&["grid", "--field", "p_amplified", "--nx", "5", "--ny", "5"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("sigma_of_gain(1) = 0"), "{}", stderr(&o));
    assert!(stderr(&o).contains("cannot be plotted"));
    assert!(o.stdout.is_empty());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&run(&["grid", "--no-such-flag"])), 1);
    assert_eq!(code(&run(&["grid", "--field", "p_regularized"])), 1);
    assert_eq!(code(&run(&["amplify", "--nx", "5"])), 1);
    assert_eq!(code(&run(&["grid", "--gain", "0.5"])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "unknown_key = 1\n").unwrap();
    assert_eq!(code(&run(&["grid", "--config", cfg.to_str().unwrap()])), 1);
}

#[test]
fn degenerate_cat_is_a_numeric_guard() {
    let o = run(&["grid", "--alpha1", "1", "0", "--alpha2", "1", "0", "--zeta", "-1", "0"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn amplified_p_json_roundtrips() {
    let o = run(&["amplify", "--field", "p", "--gain", "2", "--x-range", "-14", "14", "--y-range", "-14", "14",
        "--nx", "113", "--ny", "113", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let values = v["values"].as_array().unwrap();
    assert_eq!(values.len(), 113 * 113);
    let sigma = v["meta"]["sigma"].as_f64().unwrap();
    assert!((sigma - 1.5f64.sqrt()).abs() < 1e-15);
    let integral = v["meta"]["summary"]["integral_re"].as_f64().unwrap();
    assert!((integral - 1.0).abs() < 1e-6, "{integral}");
    assert!(values.iter().all(|p| p[1].as_f64().unwrap() == 0.0));
}

#[test]
fn amplified_q_broadens() {
    let o1 = run(&["amplify", "--field", "q", "--gain", "1", "--format", "json", "--nx", "41", "--ny", "41"]);
    let o3 = run(&["amplify", "--field", "q", "--gain", "3", "--format", "json", "--nx", "41", "--ny", "41"]);
    let max = |o: &Output| {
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        v["meta"]["summary"]["max_re"].as_f64().unwrap()
    };
    assert!(max(&o3) < max(&o1));
}

#[test]
fn roundtrip_passes_and_reports_numeric_section() {
    let o = run(&["roundtrip", "--alpha1", "0.6", "0.2", "--alpha2", "-0.5", "0.1", "--zeta", "0", "1",
        "--n-max", "20", "--sigma", "0.4", "--levels", "3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["report"]["max_abs_deviation"].as_f64().unwrap() <= 1e-8);
    let num = &v["numeric"];
    assert!(num["ordering_residual"].as_f64().unwrap() < 1e-8);
    let raw = num["max_abs_deviation"].as_f64().unwrap();
    let lim = num["limit_max_abs_deviation"].as_f64().unwrap();
    assert!(lim < raw, "{lim} vs {raw}");
}

#[test]
fn sift_limit_matches_continuation() {
    let o = run(&["sift"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["limit_relative_error"].as_f64().unwrap() < 1e-6);
    assert!(v["shifted_max_abs_error"].as_f64().unwrap() < 1e-12);
    assert_eq!(v["sigma_schedule"].as_array().unwrap().len(), 4);
    assert!(v["direct"].as_array().unwrap().iter().all(Value::is_null));

    let o = run(&["sift", "--z0", "0.7", "-0.3", "--coeffs", "1", "0", "0", "0", "0.5", "0.5"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["limit_relative_error"].as_f64().unwrap() < 1e-6);

    // small |Im z0| and wide σ keep the direct path usable
    let o = run(&["sift", "--z0", "0.7", "-0.1", "--sigma", "0.2", "--levels", "2"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    for (d, e) in v["direct"].as_array().unwrap().iter().zip(v["exact_finite_sigma"].as_array().unwrap()) {
        let (d, e) = (d.as_array().unwrap(), e.as_array().unwrap());
        let err = (d[0].as_f64().unwrap() - e[0].as_f64().unwrap()).hypot(d[1].as_f64().unwrap() - e[1].as_f64().unwrap());
        assert!(err < 1e-10, "{err}");
    }
}

#[test]
fn emitted_grids_parse_back() {
    for format in ["csv", "json"] {
        let o = run(&["grid", "--field", "p_regularized", "--sigma", "0.5", "--alpha1", "1", "0.5", "--alpha2", "-1", "0",
            "--zeta", "0", "1", "--nx", "9", "--ny", "7", "--format", format]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let text = stdout(&o);
        let (grid, meta) = if format == "csv" {
            phasedelta::grid::Grid2D::from_csv(&text).unwrap()
        } else {
            phasedelta::grid::Grid2D::from_json(&serde_json::from_str(&text).unwrap()).unwrap()
        };
        assert_eq!((grid.spec().nx, grid.spec().ny), (9, 7));
        assert_eq!(meta["field"], "p_regularized");
        let spec = phasedelta::states::CatStateSpec::new(
            C64::new(1.0, 0.5),
            C64::new(-1.0, 0.0),
            C64::new(0.0, 1.0),
        )
        .unwrap();
        let rep = phasedelta::quasiprob::p_cat_terms(&spec);
        let direct = phasedelta::grid::Grid2D::try_sample(grid.spec(), |x, y| {
            phasedelta::quasiprob::p_regularized_eval(&rep, 0.5, C64::new(x, y))
        })
        .unwrap();
        assert_eq!(grid.max_abs_diff(&direct).unwrap(), 0.0);
    }
}

#[test]
fn verify_subset_passes() {
    let o = run(&["verify", "--criterion", "1", "--criterion", "3", "--criterion", "7"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let err = stderr(&o);
    assert_eq!(err.lines().filter(|l| l.starts_with("[PASS]")).count(), 3);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["report"]["all_passed"], true);
}

#[test]
fn verify_detects_injected_fault() {
    let o = run(&["verify", "--criterion", "3", "--fault", "flip-center-sign"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("[FAIL]"));
}

#[test]
fn verify_rejects_unknown_criterion() {
    assert_eq!(code(&run(&["verify", "--criterion", "11"])), 1);
}
