//! Acceptance criteria, one PASS/FAIL line each. Runs under `cargo test`
//! with its own harness so the lines are always printed.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use geophase::scalar::angle_distance;
use geophase::{
    berry_magnetic_from_trace, berry_magnetic_numeric, berry_quantized_numeric, concurrence_pure, eigenframes,
    gamma2_closed_form, gamma_2q_subsystem_analytic, mixed_phase_numeric, number_expectation,
    solid_angle_fixed_latitude, track_all_levels, two_mode_berry_numeric, two_mode_jz_phase, wilson_loop_phase, Error,
    Params, Partition,
};
use geophase_cli::config::{Axis, Output, SweepSpec};
use geophase_cli::scenarios::{run_and_write, Scenario, ScenarioOptions};
use geophase_cli::sweep::{csv_string, run_sweep};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DRAWS: usize = 100;
const ORACLE_STEPS: usize = 4096;
const FINE_STEPS: usize = 65536;
const ORACLE_TOL: f64 = 1e-6;
const ORACLE_BUDGET: Duration = Duration::from_secs(10);
const LIMIT_TOL: f64 = 1e-3;
const STATIC_TOL: f64 = 1e-8;
const PRODUCT_STATE_TOL: f64 = 1e-10;
const QUANTIZED_TOL: f64 = 1e-8;
const NUMBER_TOL: f64 = 1e-10;
const CALIBRATION_TOL: f64 = 1e-8;
const IDENTITY_TOL: f64 = 1e-10;
const SUBSYSTEM_TOL: f64 = 1e-6;
const GAUGE_TOL: f64 = 1e-12;
const LIMIT_PROXY: f64 = 1e6;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn random_params(rng: &mut ChaCha8Rng) -> Params {
    Params::new(
        rng.gen_range(0.1..=2.0),
        rng.gen_range(0.1..=2.0),
        rng.gen_range(-2.0..=2.0),
        rng.gen_range(-2.0..=2.0),
        rng.gen_range(-2.0..=2.0),
        rng.gen_range(0..=2),
    )
}

/// The shared draws: nondegenerate parameter points, redrawn otherwise.
fn draws() -> (Vec<Params>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut out = Vec::with_capacity(DRAWS);
    let mut rejected = 0;
    while out.len() < DRAWS {
        let p = random_params(&mut rng);
        match track_all_levels(&p, 16) {
            Err(Error::DegeneracyEncountered { .. }) => rejected += 1,
            _ => out.push(p),
        }
    }
    (out, rejected)
}

fn oracle_equivalence() -> Verdict {
    let (params, rejected) = draws();
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for (i, p) in params.iter().enumerate() {
        match track_all_levels(p, ORACLE_STEPS) {
            Ok(traces) => {
                for t in &traces {
                    match berry_magnetic_from_trace(t) {
                        Ok(r) => worst = worst.max(r.difference_mod_2pi.abs()),
                        Err(e) => failures.push(format!("draw {i} level {}: {e}", t.label_j)),
                    }
                }
            }
            Err(e) => failures.push(format!("draw {i}: {e}")),
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && worst < ORACLE_TOL && elapsed < ORACLE_BUDGET;
    verdict(
        pass,
        format!(
            "{DRAWS} draws x 4 levels at {ORACLE_STEPS} steps ({rejected} degenerate redrawn): max |numeric - analytic| mod 2pi = {worst:.3e}, tolerance {ORACLE_TOL:e}; {:.2} s, budget {} s{}",
            elapsed.as_secs_f64(),
            ORACLE_BUDGET.as_secs(),
            failure_note(&failures)
        ),
    )
}

fn failure_note(failures: &[String]) -> String {
    match failures.first() {
        Some(first) => format!("; {} errors, first: {first}", failures.len()),
        None => String::new(),
    }
}

fn magnetic_all_levels(p: &Params, expected: f64, tol: f64, what: &str) -> Verdict {
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    let mut measured = Vec::new();
    for j in 1..=4 {
        match berry_magnetic_numeric(p, j, ORACLE_STEPS) {
            Ok(r) => {
                worst = worst.max(angle_distance(r.numeric_phase, expected));
                measured.push(format!("{:.9}", r.numeric_phase));
            }
            Err(e) => failures.push(format!("level {j}: {e}")),
        }
    }
    verdict(
        failures.is_empty() && worst < tol,
        format!(
            "{what}: gamma = [{}], max distance from {expected:.6} mod 2pi = {worst:.3e}, tolerance {tol:e}{}",
            measured.join(", "),
            failure_note(&failures)
        ),
    )
}

fn lambda_limit() -> Verdict {
    let p = Params { lambda: LIMIT_PROXY, ..Params::reference() };
    magnetic_all_levels(&p, PI, LIMIT_TOL, "lambda = 1e6")
}

fn j_limit() -> Verdict {
    let p = Params { coupling_j: LIMIT_PROXY, ..Params::reference() };
    magnetic_all_levels(&p, 0.0, LIMIT_TOL, "J = 1e6")
}

fn b_zero() -> Verdict {
    let p = Params { omega2: 0.0, ..Params::reference() };
    magnetic_all_levels(&p, 0.0, STATIC_TOL, "omega2 = 0")
}

fn j_zero() -> Verdict {
    let p = Params { coupling_j: 0.0, ..Params::reference() };
    let mut worst_c = 0.0f64;
    let mut worst_gamma = 0.0f64;
    let mut worst_mixed = 0.0f64;
    let mut failures = Vec::new();
    match track_all_levels(&p, ORACLE_STEPS) {
        Ok(traces) => {
            for t in &traces {
                worst_c = worst_c.max(concurrence_pure(t.initial()));
                match berry_magnetic_from_trace(t) {
                    Ok(r) => worst_gamma = worst_gamma.max(angle_distance(r.numeric_phase, PI)),
                    Err(e) => failures.push(format!("level {} gamma: {e}", t.label_j)),
                }
                match mixed_phase_numeric(t, Partition::Particle2) {
                    Ok(r) => worst_mixed = worst_mixed.max(angle_distance(r.gamma, PI)),
                    Err(e) => failures.push(format!("level {} mixed: {e}", t.label_j)),
                }
            }
        }
        Err(e) => failures.push(e.to_string()),
    }
    let pass =
        failures.is_empty() && worst_c < PRODUCT_STATE_TOL && worst_gamma < ORACLE_TOL && worst_mixed < ORACLE_TOL;
    verdict(
        pass,
        format!(
            "J = 0: max concurrence {worst_c:.3e} (tolerance {PRODUCT_STATE_TOL:e}), max |gamma - pi| {worst_gamma:.3e} (tolerance {ORACLE_TOL:e}), max |Gamma_2 - pi| {worst_mixed:.3e} (tolerance {ORACLE_TOL:e}){}",
            failure_note(&failures)
        ),
    )
}

fn quantized_identity() -> Verdict {
    let (params, _) = draws();
    let mut worst_phase = 0.0f64;
    let mut worst_number = 0.0f64;
    let mut failures = Vec::new();
    for (i, p) in params.iter().enumerate() {
        let frames = match eigenframes(p, 0.0) {
            Ok(f) => f,
            Err(e) => {
                failures.push(format!("draw {i}: {e}"));
                continue;
            }
        };
        for f in &frames {
            let number = number_expectation(p, &f.amplitudes);
            let chi = f.angles.expect("angles").chi;
            worst_number = worst_number.max((number - (f64::from(p.n_photon) + (chi / 2.0).sin().powi(2))).abs());
            match berry_quantized_numeric(p, f.label_j, FINE_STEPS) {
                Ok(r) => worst_phase = worst_phase.max(angle_distance(r.numeric_phase, 2.0 * PI * number)),
                Err(e) => failures.push(format!("draw {i} level {}: {e}", f.label_j)),
            }
        }
    }
    verdict(
        failures.is_empty() && worst_phase < QUANTIZED_TOL && worst_number < NUMBER_TOL,
        format!(
            "{DRAWS} draws x 4 levels at {FINE_STEPS} steps: max |numeric - 2pi<a+a>| mod 2pi = {worst_phase:.3e} (tolerance {QUANTIZED_TOL:e}), max |<a+a> - n - sin^2(chi/2)| = {worst_number:.3e} (tolerance {NUMBER_TOL:e}){}",
            failure_note(&failures)
        ),
    )
}

fn two_mode_calibration() -> Verdict {
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for (n, n_prime) in [(0, 0), (1, 0), (0, 1), (2, 1)] {
        let p = Params { n_photon: n, ..Params::reference() }.with_n_prime(n_prime);
        for j in 1..=4 {
            let r = two_mode_berry_numeric(&p, j, 0.0, FINE_STEPS);
            let jz = two_mode_jz_phase(&p, j);
            match (r, jz) {
                (Ok(r), Ok(jz)) => worst = worst.max(angle_distance(r.numeric_phase, jz)),
                (Err(e), _) | (_, Err(e)) => failures.push(format!("n={n} n'={n_prime} level {j}: {e}")),
            }
        }
    }

    // Comparison column over theta, through the sweep driver.
    let spec = SweepSpec {
        axis: Axis::Theta,
        values: vec![0.0, FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4],
        loop_steps: ORACLE_STEPS,
        outputs: vec![Output::BerryTwomode],
        ..SweepSpec::default()
    };
    let mut populated = 0;
    let mut diffs = Vec::new();
    match run_sweep(&spec, None) {
        Ok(rows) => {
            for r in &rows {
                match r.phase(Output::BerryTwomode) {
                    Some(c) if c.analytic.is_finite() && c.difference.is_finite() => {
                        populated += 1;
                        if r.level == 1 {
                            diffs.push(format!("theta {:.4}: {:+.6}", r.theta, c.difference));
                        }
                    }
                    _ => failures.push(format!("theta {} level {}: comparison missing", r.theta, r.level)),
                }
            }
        }
        Err(e) => failures.push(e.to_string()),
    }
    verdict(
        failures.is_empty() && worst < CALIBRATION_TOL && populated == 16,
        format!(
            "theta = 0 over 4 (n, n') x 4 levels at {FINE_STEPS} steps: max |numeric - 2pi<Jz>| mod 2pi = {worst:.3e}, tolerance {CALIBRATION_TOL:e}; comparison column populated {populated}/16; level-1 closed form minus numeric (reported, not asserted): {}{}",
            diffs.join(", "),
            failure_note(&failures)
        ),
    )
}

fn closed_form_identities() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst_identity = 0.0f64;
    let mut singular = 0;
    for _ in 0..1000 {
        let chi = rng.gen_range(0.0..=PI);
        let xi = rng.gen_range(-PI..=PI);
        let eta = rng.gen_range(-2.0 * PI..=2.0 * PI);
        let n = rng.gen_range(0..=2);
        let n_prime = rng.gen_range(0..=2);
        let omega = solid_angle_fixed_latitude(rng.gen_range(0.0..=PI));
        let g = gamma_2q_subsystem_analytic(chi, xi, eta, n, n_prime, omega);
        if g.singular {
            singular += 1;
        }
        worst_identity = worst_identity.max(angle_distance(g.from_angles, g.from_concurrence));
    }

    let (params, _) = draws();
    let mut worst_mixed = 0.0f64;
    let mut failures = Vec::new();
    let mut skipped = 0;
    for (i, p) in params.iter().enumerate() {
        let traces = match track_all_levels(p, ORACLE_STEPS) {
            Ok(t) => t,
            Err(e) => {
                failures.push(format!("draw {i}: {e}"));
                continue;
            }
        };
        for t in &traces {
            let a = t.initial().angles.expect("angles");
            let closed = gamma2_closed_form(a.chi, a.xi, a.eta);
            match mixed_phase_numeric(t, Partition::Particle2) {
                Ok(r) => worst_mixed = worst_mixed.max(angle_distance(r.gamma, closed.value)),
                // A maximally mixed particle 2 has no eigenbasis to transport.
                Err(Error::ReducedDegeneracy { .. }) => skipped += 1,
                Err(e) => failures.push(format!("draw {i} level {}: {e}", t.label_j)),
            }
        }
    }
    verdict(
        failures.is_empty() && worst_identity < IDENTITY_TOL && worst_mixed < SUBSYSTEM_TOL,
        format!(
            "angle form vs concurrence form over 1000 draws: max difference mod 2pi {worst_identity:.3e} (tolerance {IDENTITY_TOL:e}, {singular} on a branch point); particle-2 closed form vs numeric over {DRAWS} draws x 4 levels at {ORACLE_STEPS} steps: max {worst_mixed:.3e} (tolerance {SUBSYSTEM_TOL:e}, {skipped} maximally mixed skipped){}",
            failure_note(&failures)
        ),
    )
}

fn gauge_fuzz() -> Verdict {
    let traces = track_all_levels(&Params::reference(), 1024).expect("reference point tracks");
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for trial in 0..1000 {
        let t = &traces[trial % 4];
        let states: Vec<Vec<Complex<f64>>> = t.frames().map(|f| f.amplitudes.to_vec()).collect();
        let base = wilson_loop_phase(&states, true).expect("base loop");
        let rephased: Vec<Vec<Complex<f64>>> = states
            .iter()
            .map(|s| {
                let u = Complex::from_polar(1.0, rng.gen_range(0.0..2.0 * PI));
                s.iter().map(|c| c * u).collect()
            })
            .collect();
        let phase = wilson_loop_phase(&rephased, true).expect("rephased loop");
        worst = worst.max(angle_distance(phase, base));
    }
    verdict(
        worst < GAUGE_TOL,
        format!("1000 random per-state rephasings of 1024-state loops: max phase change {worst:.3e}, tolerance {GAUGE_TOL:e}"),
    )
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .expect("output dir")
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism() -> Verdict {
    let tmp = tempfile::tempdir().expect("temp dir");
    let bin = env!("CARGO_BIN_EXE_geophase");
    let mut runs = Vec::new();
    for k in 0..2 {
        let dir = tmp.path().join(format!("run{k}"));
        let status = Command::new(bin).args(["scenario", "--scenario", "all", "--out"]).arg(&dir).output();
        match status {
            Ok(o) if o.status.success() => runs.push(csv_files(&dir)),
            Ok(o) => return verdict(false, format!("scenario run {k} exited with {}", o.status)),
            Err(e) => return verdict(false, format!("cannot run {bin}: {e}")),
        }
    }
    let lib_dir = tmp.path().join("lib");
    let lib_run = run_and_write(&Scenario::ALL, &ScenarioOptions::default(), &lib_dir).map(|_| csv_files(&lib_dir));

    let spec = SweepSpec {
        axis: Axis::Lambda,
        values: (0..=20).map(|i| 0.25 * f64::from(i)).collect(),
        loop_steps: 1024,
        outputs: vec![Output::BerryMagnetic, Output::MixedPhase, Output::Concurrence],
        ..SweepSpec::default()
    };
    let sweep_a = run_sweep(&spec, Some(1)).and_then(|r| csv_string(&r, &spec.outputs));
    let sweep_b = run_sweep(&spec, Some(4)).and_then(|r| csv_string(&r, &spec.outputs));

    let files_equal = runs[0] == runs[1];
    let lib_equal = lib_run.as_ref().is_ok_and(|l| *l == runs[0]);
    let sweep_equal = matches!((&sweep_a, &sweep_b), (Ok(a), Ok(b)) if a == b);
    let sweep_rows = sweep_a.as_ref().map_or(0, |s| s.lines().count().saturating_sub(1));
    verdict(
        files_equal && lib_equal && sweep_equal && runs[0].len() == Scenario::ALL.len() && sweep_rows == 84,
        format!(
            "{} scenario CSVs byte-identical across two CLI runs: {files_equal}; identical to in-process run: {lib_equal}; 84-row lambda sweep identical for 1 and 4 workers: {sweep_equal} ({sweep_rows} rows)",
            runs[0].len()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("oracle equivalence, magnetic loop", oracle_equivalence),
        ("strong spin-field coupling gives pi", lambda_limit),
        ("strong spin-spin coupling gives 0", j_limit),
        ("zero field gives 0", b_zero),
        ("uncoupled spins", j_zero),
        ("quantized driving identity", quantized_identity),
        ("two-mode theta = 0 calibration", two_mode_calibration),
        ("closed-form identities", closed_form_identities),
        ("gauge invariance fuzz", gauge_fuzz),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {:>2} {name} [{:.2} s]: {}", k + 1, start.elapsed().as_secs_f64(), v.detail);
        if !v.pass {
            failed += 1;
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
