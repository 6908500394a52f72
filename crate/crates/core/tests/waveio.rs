use std::fs;

use shearwave::diagnostics::diagnose;
use shearwave::shear::{build_asymptotic_state, FamilySpec, ShearProfile, VelocitySpec};
use shearwave::waveio::*;
use shearwave::wavesolve::*;

fn wave() -> WaveSolution {
    let profile = ShearProfile::new(1.0, 1.3, 1.0, VelocitySpec::Linear { surface: 0.2, shear: 0.1 }).unwrap();
    let cfg = SolveConfig { np: 33, nq: 401, ..SolveConfig::default() };
    solve_wave(&profile, &cfg).unwrap()
}

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

#[test]
fn round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.wave.json");
    let sol = wave();
    let checksum = write_wave(&sol, &path).unwrap();
    let loaded = read_wave(&path).unwrap();
    assert_eq!(loaded.checksum, checksum);
    assert!(loaded.conversion.is_none());
    let back = loaded.solution;
    assert_eq!(bits(&back.field.w), bits(&sol.field.w));
    assert_eq!(bits(&back.field.base), bits(&sol.field.base));
    assert_eq!(back.grid, sol.grid);
    assert_eq!(back.state.profile, sol.state.profile);
    assert_eq!(back.froude.to_bits(), sol.froude.to_bits());
    assert_eq!(back.residual_norm.to_bits(), sol.residual_norm.to_bits());
    assert_eq!(back.newton_iters, sol.newton_iters);
    assert_eq!(back.tol.to_bits(), sol.tol.to_bits());
    assert_eq!(back.sigma.to_bits(), sol.sigma.to_bits());
}

#[test]
fn stored_residual_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.wave.json");
    let sol = wave();
    write_wave(&sol, &path).unwrap();
    let back = read_wave(&path).unwrap().solution;
    let r = recompute_residual(&back).unwrap();
    assert!((r - sol.residual_norm).abs() <= 1e-12, "{r:e} vs {:e}", sol.residual_norm);
}

#[test]
fn checksums_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let sol = wave();
    let a = write_wave(&sol, &dir.path().join("a.json")).unwrap();
    let b = write_wave(&sol, &dir.path().join("b.json")).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, wave_checksum(&sol));
    assert_eq!(
        fs::read(dir.path().join("a.json")).unwrap(),
        fs::read(dir.path().join("b.json")).unwrap()
    );
    // an independent solve of the same input
    assert_eq!(wave_checksum(&wave()), a);
}

#[test]
fn corrupted_digit_fails_the_checksum() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.json");
    write_wave(&wave(), &path).unwrap();
    let mut bytes = fs::read(&path).unwrap();
    let at = bytes.windows(4).position(|w| w == b"\"h\":").unwrap() + 6;
    let k = (at..bytes.len()).find(|&k| bytes[k].is_ascii_digit() && bytes[k] != b'0').unwrap();
    bytes[k] = if bytes[k] == b'9' { b'8' } else { bytes[k] + 1 };
    fs::write(&path, bytes).unwrap();
    assert!(matches!(read_wave(&path), Err(WaveIoError::Checksum { .. })));
}

#[test]
fn unsupported_version_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.json");
    write_wave(&wave(), &path).unwrap();
    let text = fs::read_to_string(&path).unwrap().replace("\"format_version\":1", "\"format_version\":7");
    fs::write(&path, text).unwrap();
    match read_wave(&path) {
        Err(WaveIoError::Version { found: 7, expected: 1, .. }) => {}
        other => panic!("{other:?}"),
    }
}

#[test]
fn degenerate_field_is_quarantined() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.json");
    let mut sol = wave();
    let np = sol.grid.np;
    sol.field.w[5 * np + 12] -= 0.5;
    write_wave(&sol, &path).unwrap();
    match read_wave(&path) {
        Err(WaveIoError::Quarantined { min_hp, solution, .. }) => {
            assert!(min_hp <= 0.0);
            assert_eq!(solution.field.w, sol.field.w);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn external_velocity_file_is_converted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ext.json");
    let sol = wave();
    let ext = external_from_solution(&sol, 129).unwrap();
    fs::write(&path, serde_json::to_string(&ext).unwrap()).unwrap();
    let loaded = read_wave(&path).unwrap();
    let report = loaded.conversion.unwrap();
    assert!(report.flux_mismatch < 1e-6, "{report:?}");
    assert!(report.u_residual < 1e-4 && report.v_residual < 1e-4, "{report:?}");
    assert!(report.equation_residual < 1e-4, "{report:?}");
    let back = loaded.solution;
    assert!((back.amplitude - sol.amplitude).abs() < 1e-6 * sol.amplitude);
    let r = diagnose(&back).unwrap();
    assert!(r.identity_lower.relative_residual < 1e-3);
}

#[test]
fn malformed_external_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ext.json");
    let mut ext = external_from_solution(&wave(), 17).unwrap();
    ext.format = "velocity".into();
    fs::write(&path, serde_json::to_string(&ext).unwrap()).unwrap();
    assert!(matches!(read_wave(&path), Err(WaveIoError::Invalid { .. })));
    fs::write(&path, "{not json").unwrap();
    assert!(matches!(read_wave(&path), Err(WaveIoError::Parse { .. })));
}

fn point(sol: &WaveSolution, k: usize) -> BranchPoint {
    let mut s = sol.clone();
    s.field.w.iter_mut().for_each(|w| *w *= 1.0 + 0.01 * k as f64);
    BranchPoint {
        froude: sol.froude,
        amplitude: s.field.w[s.grid.np - 1],
        arclength: k as f64,
        sup_u_over_c: 0.5,
        speed_margin: 0.9,
        iterations: 3,
        solution: s,
    }
}

#[test]
fn truncated_branch_log_keeps_complete_entries() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.jsonl");
    let sol = wave();
    let family = FamilySpec { g: 1.0, c: 2.0, d: 1.0, ustar: VelocitySpec::Constant { value: 1.0 } };
    let mut log = BranchLog::create(&path).unwrap();
    log.append(&BranchEntry::Header { family, sigma: 0.0, lambda_ratio: 1.0 }).unwrap();
    let mut written = Vec::new();
    for k in 0..3 {
        written.push(log.append_point(&point(&sol, k)).unwrap());
    }
    drop(log);

    let full = read_branch_log(&path).unwrap();
    assert!(!full.truncated);
    assert_eq!(full.entries.len(), 4);
    assert_eq!(&full.entries[1..], &written[..]);
    for e in &written {
        if let BranchEntry::Point { checksum, file, .. } = e {
            let loaded = read_wave(&dir.path().join(file)).unwrap();
            assert_eq!(&loaded.checksum, checksum);
        }
    }

    let text = fs::read_to_string(&path).unwrap();
    let cut = text.len() - text.lines().last().unwrap().len() / 2 - 1;
    fs::write(&path, &text[..cut]).unwrap();
    let part = read_branch_log(&path).unwrap();
    assert!(part.truncated);
    assert_eq!(part.entries, full.entries[..3].to_vec());

    let broken = text.replacen("\"kind\":\"point\"", "\"kind\":\"pint\"", 1);
    fs::write(&path, broken).unwrap();
    assert!(read_branch_log(&path).is_err());
}

#[test]
fn profile_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    let p = ShearProfile::new(
        9.81,
        3.0,
        2.0,
        VelocitySpec::Samples { points: vec![[-2.0, 0.1], [-1.0, 0.3], [0.0, 0.2]] },
    )
    .unwrap();
    write_profile(&p, &path).unwrap();
    assert_eq!(read_profile(&path).unwrap(), p);
    let state = build_asymptotic_state(&read_profile(&path).unwrap(), 65).unwrap();
    assert!(state.froude > 0.0);
}
