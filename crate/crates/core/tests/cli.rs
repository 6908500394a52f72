use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use shearwave::shear::{build_asymptotic_state, ShearProfile};
use shearwave::waveio::write_wave;
use shearwave::wavesolve::{solve_wave, HeightField, SolveConfig, StripGrid, WaveSolution};

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shearwave"))
        .arg("--out")
        .arg(out)
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

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn still_profile(dir: &Path, name: &str, c: f64) -> PathBuf {
    write(dir, name, &format!(r#"{{"g":1.0,"c":{c},"d":1.0,"U":{{"kind":"constant","value":0.0}}}}"#))
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn shear_uniform_stream() {
    let dir = tempfile::tempdir().unwrap();
    let p = still_profile(dir.path(), "u0.json", 2.0);
    let o = run(dir.path(), &["shear", s(&p)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&dir.path().join("u0.shear.json"));
    assert!((v["F"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert!((v["Lambda"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((v["m"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!(stdout(&o).contains("upper Froude bound applies"));
    let m = json(&dir.path().join("shear.manifest.json"));
    assert_eq!(m["exit_code"], 0);
    assert_eq!(m["inputs"].as_array().unwrap().len(), 1);
}

#[test]
fn shear_constant_vorticity_beyond_the_bound() {
    // λ* = 3, γ* = 0.5: c = √3, U = -c γ* y / d
    let dir = tempfile::tempdir().unwrap();
    let c = 3.0_f64.sqrt();
    let p = write(
        dir.path(),
        "cv.json",
        &format!(r#"{{"g":1.0,"c":{c},"d":1.0,"U":{{"kind":"linear","surface":0.0,"shear":{}}}}}"#, -0.5 * c),
    );
    let o = run(dir.path(), &["--format", "csv", "shear", s(&p)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("not applicable (Lambda >= 2/sqrt 3)"), "{text}");
    let csv = fs::read_to_string(dir.path().join("cv.shear.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(csv.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    let row = rdr.records().next().unwrap().unwrap();
    let get = |k: &str| row[headers.iter().position(|h| h == k).unwrap()].parse::<f64>().unwrap();
    assert!((get("F") - 1.5_f64.sqrt()).abs() < 1e-8);
    assert!((get("Lambda") - 2.0).abs() < 1e-8);
}

#[test]
fn malformed_profile_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "bad.json", "{\"g\": 1.0, \"c\": ");
    let o = run(dir.path(), &["shear", s(&p)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("malformed JSON"));
    let o = run(dir.path(), &["shear", "/nonexistent/profile.json"]);
    assert_eq!(code(&o), 2);
    let o = run(dir.path(), &["frobnicate"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn solve_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let p = still_profile(dir.path(), "f105.json", 1.05);
    let o = run(dir.path(), &["solve", s(&p)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let line = stdout(&o);
    assert!(line.contains("F = 1.050000") && line.contains("0 fail"), "{line}");
    let wave = dir.path().join("f105.wave.json");
    let o = run(dir.path(), &["verify", s(&wave)]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let report = json(&dir.path().join("f105.report.json"));
    let rows = report["bound_verdicts"].as_array().unwrap();
    let f_row = rows.iter().find(|r| r["name"] == "F > 1 (elevation)").unwrap();
    assert_eq!(f_row["verdict"], "holds");
    let csv = fs::read_to_string(dir.path().join("f105.report.csv")).unwrap();
    assert!(csv.starts_with("name,lhs,rhs,residual,verdict"));
    let m = json(&dir.path().join("verify.manifest.json"));
    assert_eq!(m["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn critical_and_subcritical_solves_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let crit = still_profile(dir.path(), "f1.json", 1.0);
    let o = run(dir.path(), &["solve", s(&crit)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("critical"));
    let sub = still_profile(dir.path(), "f09.json", 0.9);
    let o = run(dir.path(), &["solve", s(&sub)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("lower Froude bound"), "{}", stderr(&o));
    assert!(!dir.path().join("f09.wave.json").exists());
    // allowed with the flag, but there is no decaying mode without tension
    let o = run(dir.path(), &["solve", "--subcritical", s(&sub)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn solver_failure_has_its_own_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let p = still_profile(dir.path(), "f105.json", 1.05);
    let o = run(dir.path(), &["solve", "--max-iters", "1", s(&p)]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

fn rest_wave(dir: &Path) -> (PathBuf, WaveSolution) {
    let profile = ShearProfile::still_water(1.0, 1.05, 1.0).unwrap();
    let state = build_asymptotic_state(&profile, 33).unwrap();
    let grid = StripGrid::new(30.0, 201, 33, true).unwrap();
    let field = HeightField::trivial(&grid, &state);
    let sol = WaveSolution::new(grid, field, state, 0.0, 0.0, 0, 1e-10);
    let path = dir.join("rest.wave.json");
    write_wave(&sol, &path).unwrap();
    (path, sol)
}

#[test]
fn verify_rest_state() {
    let dir = tempfile::tempdir().unwrap();
    let (path, _) = rest_wave(dir.path());
    let o = run(dir.path(), &["verify", s(&path)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let csv = fs::read_to_string(dir.path().join("rest.report.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let verdict = line.rsplit(',').next().unwrap();
        assert!(["not_applicable", "pass", "holds"].contains(&verdict), "{line}");
    }
}

#[test]
fn verify_rejects_a_scaled_field() {
    let dir = tempfile::tempdir().unwrap();
    let mut sol = solve_wave(&ShearProfile::still_water(1.0, 1.05, 1.0).unwrap(), &SolveConfig::default()).unwrap();
    let np = sol.grid.np;
    for (k, w) in sol.field.w.iter_mut().enumerate() {
        *w += 0.01 * sol.state.height[k % np];
    }
    let path = dir.path().join("scaled.wave.json");
    write_wave(&sol, &path).unwrap();
    let o = run(dir.path(), &["verify", s(&path)]);
    assert_eq!(code(&o), 1);
    let err = stderr(&o);
    assert!(err.contains("bernoulli surface") && err.contains("identity lower"), "{err}");
}

#[test]
fn verify_flags_quarantined_fields() {
    let dir = tempfile::tempdir().unwrap();
    let (_, mut sol) = rest_wave(dir.path());
    let np = sol.grid.np;
    sol.field.w[4 * np + 10] = -0.6;
    let path = dir.path().join("bad.wave.json");
    write_wave(&sol, &path).unwrap();
    let o = run(dir.path(), &["verify", s(&path)]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("unvalidated field"));
    assert_eq!(json(&dir.path().join("bad.report.json"))["unvalidated"], true);
}

#[test]
fn verify_corrupted_file_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let (path, _) = rest_wave(dir.path());
    let text = fs::read_to_string(&path).unwrap().replacen("\"tol\":1", "\"tol\":2", 1);
    fs::write(&path, text).unwrap();
    let o = run(dir.path(), &["verify", s(&path)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("checksum mismatch"));
}

fn family(dir: &Path, name: &str, ustar: f64) -> PathBuf {
    write(
        dir,
        name,
        &format!(r#"{{"g":1.0,"c":2.0,"d":1.0,"ustar":{{"kind":"constant","value":{ustar}}}}}"#),
    )
}

#[test]
fn continue_irrotational_branch() {
    let dir = tempfile::tempdir().unwrap();
    let fam = family(dir.path(), "irr.json", 1.0);
    let o = run(dir.path(), &["continue", s(&fam), "--steps", "20", "--np", "33", "--nq", "401", "--name", "irr"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    let last = text.lines().last().unwrap();
    assert!(last == "endpoint: target_count" || last == "endpoint: stagnation", "{last}");
    let csv = fs::read_to_string(dir.path().join("irr.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(csv.as_bytes());
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert!(rows.len() >= 10 && rows.len() <= 20);
    let col = |r: &csv::StringRecord, k: usize| r[k].parse::<f64>().unwrap();
    for w in rows.windows(2) {
        assert!(col(&w[1], 1) > col(&w[0], 1));
    }
    assert!(rows.iter().all(|r| col(r, 0) > 1.0 && col(r, 0) < 2.0 && &r[6] == "true"));
    let log = shearwave::waveio::read_branch_log(&dir.path().join("irr.jsonl")).unwrap();
    assert_eq!(log.entries.len(), rows.len() + 2);
}

#[test]
fn continue_to_stagnation() {
    let dir = tempfile::tempdir().unwrap();
    let fam = family(dir.path(), "irr.json", 1.0);
    let o = run(dir.path(), &["continue", s(&fam), "--steps", "400", "--np", "33", "--nq", "401"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let last = stdout(&o).lines().last().unwrap().to_string();
    assert_eq!(last, "endpoint: stagnation");
}

#[test]
fn continue_rejects_bad_normalization() {
    let dir = tempfile::tempdir().unwrap();
    let fam = family(dir.path(), "bad.json", 2.0);
    let o = run(dir.path(), &["continue", s(&fam)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("0.250000000000"), "{}", stderr(&o));
}

#[test]
fn sturm_spectra() {
    let dir = tempfile::tempdir().unwrap();
    let p = still_profile(dir.path(), "c12.json", 1.2);
    let o = run(dir.path(), &["sturm", s(&p)]);
    assert_eq!(code(&o), 0);
    let v = json(&dir.path().join("c12.sturm.json"));
    // tan k = (c²/(g d)) k
    let (mut lo, mut hi) = (0.5_f64, 1.5_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid.tan() < 1.44 * mid {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let oracle = lo * lo;
    let mu1 = v["mu1"].as_f64().unwrap();
    assert!((mu1 - oracle).abs() < 1e-4 * oracle, "{mu1} vs {oracle}");
    assert_eq!(v["phi1"].as_array().unwrap().len(), 512);

    let p = still_profile(dir.path(), "c1.json", 1.0);
    assert_eq!(code(&run(dir.path(), &["sturm", s(&p)])), 0);
    assert!(json(&dir.path().join("c1.sturm.json"))["mu1"].as_f64().unwrap().abs() < 1e-6);

    let p = still_profile(dir.path(), "c09.json", 0.9);
    let o = run(dir.path(), &["--format", "csv", "sturm", "--count", "3", s(&p)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("warning: mu1 < 0"));
    let eig = fs::read_to_string(dir.path().join("c09.eigenvalues.csv")).unwrap();
    assert_eq!(eig.lines().count(), 4);
    assert!(fs::read_to_string(dir.path().join("c09.sturm.csv")).unwrap().starts_with("p,phi1"));
}

#[test]
fn config_file_sets_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", r#"{"solve": {"np": 33, "nq": 401}, "thresholds": {"bernoulli": 1e-2}}"#);
    let p = still_profile(dir.path(), "f105.json", 1.05);
    let o = run(dir.path(), &["--config", s(&cfg), "solve", s(&p)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&dir.path().join("f105.wave.json"));
    assert_eq!(v["payload"]["grid"]["np"], 33);
    let m = json(&dir.path().join("solve.manifest.json"));
    assert_eq!(m["config"]["solve"]["nq"], 401);
    let bad = write(dir.path(), "bad.json", r#"{"solve": {"np": "many"}}"#);
    assert_eq!(code(&run(dir.path(), &["--config", s(&bad), "solve", s(&p)])), 2);
}

#[test]
fn repeated_runs_give_identical_outputs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut sums = Vec::new();
    for dir in [a.path(), b.path()] {
        let p1 = still_profile(dir, "f105.json", 1.05);
        let p2 = still_profile(dir, "f11.json", 1.1);
        let o = run(dir, &["--workers", "3", "solve", "--np", "33", "--nq", "401", s(&p1), s(&p2)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let m = json(&dir.join("solve.manifest.json"));
        let outs: Vec<String> = m["outputs"]
            .as_array()
            .unwrap()
            .iter()
            .map(|d| d["sha256"].as_str().unwrap().to_string())
            .collect();
        assert_eq!(outs.len(), 2);
        sums.push(outs);
    }
    assert_eq!(sums[0], sums[1]);
}
