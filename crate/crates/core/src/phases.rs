//! Whole-system geometric phases: a discretized, gauge-invariant overlap
//! product along each loop, paired with the closed-form expressions.
//!
//! Three drivings are covered:
//!
//! * the magnetic-field azimuth `φ` (instantaneous eigenstates tracked around the loop),
//! * the single-mode phase shift `exp(-iφ a†a)`,
//! * the two-mode SU(2) rotation `exp(-iφJ_z) exp(-iθJ_y)` at fixed `θ`.
//!
//! The phase-shift loops are generated by a unitary, so their states are built
//! as `U(φ_k)|ψ⟩` and no dynamical phase enters. For the two-mode rotation
//! `U(2π)` is not proportional to the identity (half-integer `J_z` in odd
//! sectors); the path is then closed through the explicit endpoint `U(2π)|ψ⟩`.

use num_complex::Complex;

use crate::eigen::{check_level, frame_at_origin, track_loop, Angles, LoopTrace};
use crate::error::{Error, Result};
use crate::linalg::{inner, norm};
use crate::model::{number_operator_block, ModelParams};
use crate::scalar::{cis, wrap_angle, Real};
use crate::two_mode::{embed_two_mode, jz_of_frame, TwoModeRotation};

/// Consecutive overlaps below this modulus mean the loop is under-sampled.
pub const NULL_OVERLAP_TOL: f64 = 1e-6;

/// Step-halving agreement required to call a loop converged.
pub const CONVERGENCE_TOL: f64 = 1e-6;

const NORM_TOL: f64 = 1e-10;

/// Numeric and analytic values of one geometric phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseReport<T> {
    /// Overlap-product estimate, in `(-π, π]`.
    pub numeric_phase: T,
    /// Closed-form value, unreduced.
    pub analytic_phase: T,
    /// `wrap(analytic − numeric)`.
    pub difference_mod_2pi: T,
    pub loop_steps: usize,
    /// Halving the number of samples moves the numeric phase by less than
    /// [`CONVERGENCE_TOL`].
    pub converged: bool,
}

impl<T: Real> PhaseReport<T> {
    fn new(numeric_phase: T, analytic_phase: T, loop_steps: usize, converged: bool) -> Self {
        Self {
            numeric_phase,
            analytic_phase,
            difference_mod_2pi: wrap_angle(analytic_phase - numeric_phase),
            loop_steps,
            converged,
        }
    }
}

/// `-arg ∏ ⟨s_k|s_{k+1}⟩`, including `⟨s_last|s_0⟩` when `closed`.
///
/// Invariant under multiplying any state by a unit phase when `closed`; an
/// open path is invariant under interior rephasing only.
pub fn wilson_loop_phase<T: Real, S: AsRef<[Complex<T>]>>(states: &[S], closed: bool) -> Result<T> {
    if states.len() < 3 {
        return Err(Error::TooFewSamples { got: states.len(), min: 3 });
    }
    let dim = states[0].as_ref().len();
    let norm_tol = T::tol(NORM_TOL);
    for (index, s) in states.iter().enumerate() {
        let s = s.as_ref();
        if s.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: s.len() });
        }
        let n = norm(s);
        if (n - T::one()).abs() > norm_tol {
            return Err(Error::NotNormalized { index, norm: n.as_f64() });
        }
    }

    let null = T::lit(NULL_OVERLAP_TOL);
    let mut product = Complex::new(T::one(), T::zero());
    let links = if closed { states.len() } else { states.len() - 1 };
    for step in 0..links {
        let next = (step + 1) % states.len();
        let ov = inner(states[step].as_ref(), states[next].as_ref());
        let modulus = ov.norm();
        if modulus < null {
            return Err(Error::NullOverlap { step, modulus: modulus.as_f64() });
        }
        product *= ov / modulus;
        product = product / product.norm();
    }
    Ok(wrap_angle(-product.arg()))
}

/// Numeric phase from `states` and from every second state, plus the
/// halving-convergence verdict.
fn phase_with_halving<T: Real, S: AsRef<[Complex<T>]>>(states: &[S], closed: bool) -> Result<(T, bool)> {
    let full = wilson_loop_phase(states, closed)?;
    let coarse: Vec<&[Complex<T>]> = states.iter().step_by(2).map(|s| s.as_ref()).collect();
    let aligned = closed || (states.len() - 1).is_multiple_of(2);
    let converged = if aligned && coarse.len() >= 3 {
        match wilson_loop_phase(&coarse, closed) {
            Ok(half) => wrap_angle(full - half).abs() < T::lit(CONVERGENCE_TOL),
            Err(_) => false,
        }
    } else {
        false
    };
    Ok((full, converged))
}

/// `Ω(x) = 2π(1 − cos x)`, the solid angle inside a circle of fixed latitude `x`.
pub fn solid_angle_fixed_latitude<T: Real>(x: T) -> T {
    T::TAU() * (T::one() - x.cos())
}

/// `½[sin²(χ/2) Ω(η) + cos²(χ/2) Ω(ξ)]`.
pub fn berry_magnetic_analytic<T: Real>(chi: T, xi: T, eta: T) -> T {
    let half = T::lit(0.5);
    let s2 = (chi * half).sin().powi(2);
    let c2 = (chi * half).cos().powi(2);
    half * (s2 * solid_angle_fixed_latitude(eta) + c2 * solid_angle_fixed_latitude(xi))
}

/// Magnetic-loop phase of an already tracked level.
pub fn berry_magnetic_from_trace<T: Real>(trace: &LoopTrace<T>) -> Result<PhaseReport<T>> {
    let states: Vec<&[Complex<T>]> = trace.frames().map(|f| &f.amplitudes[..]).collect();
    let (numeric, converged) = phase_with_halving(&states, true)?;
    let a: Angles<T> = trace.initial().angles.expect("tracked frames carry angles");
    let analytic = berry_magnetic_analytic(a.chi, a.xi, a.eta);
    Ok(PhaseReport::new(numeric, analytic, trace.steps(), converged))
}

/// Geometric phase of level `label_j` as the field azimuth turns once.
pub fn berry_magnetic_numeric<T: Real>(
    params: &ModelParams<T>,
    label_j: usize,
    steps: usize,
) -> Result<PhaseReport<T>> {
    berry_magnetic_from_trace(&track_loop(params, label_j, steps)?)
}

/// `π(1 − cos χ) + 2πn`.
pub fn berry_quantized_analytic<T: Real>(chi: T, n_photon: u32) -> T {
    T::PI() * (T::one() - chi.cos()) + T::TAU() * T::lit(f64::from(n_photon))
}

/// Phase acquired under the phase shift `exp(-iφ a†a)`, `φ: 0 → 2π`.
pub fn berry_quantized_numeric<T: Real>(
    params: &ModelParams<T>,
    label_j: usize,
    steps: usize,
) -> Result<PhaseReport<T>> {
    check_level(label_j)?;
    if steps < 3 {
        return Err(Error::TooFewSamples { got: steps, min: 3 });
    }
    // The level need not be nondegenerate: any state of the level is a fixed
    // vector transported by a known unitary.
    params.validate()?;
    let raw = crate::eigen::hermitian_eigensystem(&crate::model::BlockHamiltonian::new(params, T::zero()));
    let frame = raw[label_j - 1];
    let numbers = number_operator_block(params);
    let states: Vec<Vec<Complex<T>>> = (0..steps)
        .map(|k| {
            let phi = T::TAU() * T::lit(k as f64) / T::lit(steps as f64);
            frame.amplitudes.iter().zip(&numbers).map(|(c, n)| *c * cis(-phi * *n)).collect()
        })
        .collect();
    let (numeric, converged) = phase_with_halving(&states, true)?;
    let sin2 = frame.ground_weight();
    let chi = T::lit(2.0) * sin2.sqrt().atan2(frame.excited_weight().sqrt());
    let analytic = berry_quantized_analytic(chi, params.n_photon);
    Ok(PhaseReport::new(numeric, analytic, steps, converged))
}

/// `−½Ω[(n − n′) + sin²(χ/2)]`.
pub fn two_mode_berry_analytic<T: Real>(chi: T, n_photon: u32, n_prime: u32, solid_angle: T) -> T {
    let dn = T::lit(f64::from(n_photon)) - T::lit(f64::from(n_prime));
    -T::lit(0.5) * solid_angle * (dn + (chi * T::lit(0.5)).sin().powi(2))
}

/// Vacuum-induced two-mode phase, `−½Ω sin²(χ/2)` at `n = n′ = 0`.
pub fn vacuum_induced_phase<T: Real>(chi: T, solid_angle: T) -> T {
    two_mode_berry_analytic(chi, 0, 0, solid_angle)
}

/// States `U(θ, φ_k)|ψ_j⟩ ⊗ |n′⟩` for `k = 0..=steps`, the last one at `φ = 2π`.
pub(crate) fn two_mode_loop_states<T: Real>(
    params: &ModelParams<T>,
    label_j: usize,
    theta: T,
    steps: usize,
) -> Result<(crate::eigen::EigenFrame<T>, Vec<crate::two_mode::TwoModeState<T>>)> {
    if steps < 3 {
        return Err(Error::TooFewSamples { got: steps, min: 3 });
    }
    let frame = frame_at_origin(params, label_j)?;
    let psi = embed_two_mode(&frame, params);
    let rotation = TwoModeRotation::new(psi.base_sector(), theta);
    let states =
        (0..=steps).map(|k| rotation.apply(&psi, T::TAU() * T::lit(k as f64) / T::lit(steps as f64))).collect();
    Ok((frame, states))
}

/// Two-mode rotation loop at fixed `θ`, `φ: 0 → 2π`.
///
/// The analytic partner is `two_mode_berry_analytic` with `Ω = 2π(1 − cos θ)`.
/// The two are reported side by side; with the unitary generator the overlap
/// product integrates to `2π cos θ ⟨J_z⟩`, which differs from the closed form
/// by `2π⟨J_z⟩`.
pub fn two_mode_berry_numeric<T: Real>(
    params: &ModelParams<T>,
    label_j: usize,
    theta: T,
    steps: usize,
) -> Result<PhaseReport<T>> {
    let (frame, states) = two_mode_loop_states(params, label_j, theta, steps)?;
    let slices: Vec<&[Complex<T>]> = states.iter().map(|s| s.as_slice()).collect();
    let (numeric, converged) = phase_with_halving(&slices, false)?;
    let a = frame.angles.expect("origin frame carries angles");
    let omega = solid_angle_fixed_latitude(theta);
    let analytic = two_mode_berry_analytic(a.chi, params.n_photon, params.n_prime, omega);
    Ok(PhaseReport::new(numeric, analytic, steps, converged))
}

/// `2π⟨J_z⟩` of the embedded level, the exact two-mode phase at `θ = 0`.
pub fn two_mode_jz_phase<T: Real>(params: &ModelParams<T>, label_j: usize) -> Result<T> {
    let frame = frame_at_origin(params, label_j)?;
    Ok(T::TAU() * jz_of_frame(&frame, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn qubit_loop(theta: f64, steps: usize) -> Vec<[Complex<f64>; 2]> {
        (0..steps)
            .map(|k| {
                let phi = 2.0 * PI * k as f64 / steps as f64;
                [Complex::new((theta / 2.0).cos(), 0.0), Complex::from_polar((theta / 2.0).sin(), phi)]
            })
            .collect()
    }

    #[test]
    fn identical_states_have_no_phase() {
        let s = vec![[Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)]; 10];
        assert_eq!(wilson_loop_phase(&s, true).unwrap(), 0.0);
    }

    #[test]
    fn equatorial_qubit_loop() {
        // Half the solid angle 2π of the equator: −π ≡ π.
        let phase = wilson_loop_phase(&qubit_loop(PI / 2.0, 512), true).unwrap();
        assert!(wrap_angle(phase + PI).abs() < 1e-4);
    }

    #[test]
    fn qubit_cap_matches_half_solid_angle() {
        let theta = 0.9;
        let phase = wilson_loop_phase(&qubit_loop(theta, 4096), true).unwrap();
        let expect = -0.5 * solid_angle_fixed_latitude(theta);
        assert!(wrap_angle(phase - expect).abs() < 1e-6);
    }

    #[test]
    fn random_rephasing_leaves_phase_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let states = qubit_loop(1.2, 64);
        let base = wilson_loop_phase(&states, true).unwrap();
        for _ in 0..50 {
            let shifted: Vec<[Complex<f64>; 2]> = states
                .iter()
                .map(|s| {
                    let u = Complex::from_polar(1.0, rng.gen_range(-PI..PI));
                    [s[0] * u, s[1] * u]
                })
                .collect();
            assert!((wilson_loop_phase(&shifted, true).unwrap() - base).abs() < 1e-12);
        }
    }

    #[test]
    fn under_sampled_loop_reports_null_overlap() {
        let states = vec![
            [Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)],
            [Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)],
            [Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)],
        ];
        assert!(matches!(wilson_loop_phase(&states, true), Err(Error::NullOverlap { step: 0, .. })));
    }

    #[test]
    fn input_validation() {
        let two = vec![[Complex::new(1.0, 0.0)]; 2];
        assert!(matches!(wilson_loop_phase(&two, true), Err(Error::TooFewSamples { .. })));
        let unnormalized = vec![[Complex::new(2.0, 0.0)]; 3];
        assert!(matches!(wilson_loop_phase(&unnormalized, true), Err(Error::NotNormalized { .. })));
        let ragged: Vec<Vec<Complex<f64>>> = vec![
            vec![Complex::new(1.0, 0.0)],
            vec![Complex::new(1.0, 0.0)],
            vec![Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)],
        ];
        assert!(matches!(wilson_loop_phase(&ragged, true), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn solid_angles() {
        assert_eq!(solid_angle_fixed_latitude(0.0), 0.0);
        assert!((solid_angle_fixed_latitude(PI / 2.0) - 2.0 * PI).abs() < 1e-15);
        assert!((solid_angle_fixed_latitude(PI) - 4.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn magnetic_analytic_limits() {
        let xi: f64 = 0.8;
        assert!((berry_magnetic_analytic(0.0, xi, 2.0) - PI * (1.0 - xi.cos())).abs() < 1e-15);
        assert!((berry_magnetic_analytic(PI, 0.3, PI / 2.0) - PI).abs() < 1e-14);
    }

    #[test]
    fn quantized_analytic_values() {
        assert_eq!(berry_quantized_analytic(0.0, 0), 0.0);
        assert!((berry_quantized_analytic(PI, 1) - 4.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn two_mode_analytic_values() {
        assert_eq!(two_mode_berry_analytic(0.7, 1, 0, 0.0), 0.0);
        assert_eq!(two_mode_berry_analytic(0.0, 2, 2, 3.0), 0.0);
        let v = two_mode_berry_analytic(PI / 2.0, 1, 0, 2.0 * PI);
        assert!((v + 1.5 * PI).abs() < 1e-14);
        // Linear in the solid angle.
        let a = two_mode_berry_analytic(0.4, 2, 1, 1.0);
        assert_eq!(two_mode_berry_analytic(0.4, 2, 1, 3.0), 3.0 * a);
    }

    #[test]
    fn reference_point_magnetic_phases() {
        // Frozen from an independent dense diagonalization: 2π(|c₁|²+|c₃|²) mod 2π.
        let expect =
            [-2.620_799_249_444_800_7, 2.620_799_249_444_800_7, 2.620_799_249_444_802_5, -2.620_799_249_444_800_7];
        let p = ModelParams::<f64>::reference();
        for (j, want) in expect.iter().enumerate() {
            let r = berry_magnetic_numeric(&p, j + 1, 4096).unwrap();
            assert!(wrap_angle(r.numeric_phase - want).abs() < 1e-6, "level {}: {}", j + 1, r.numeric_phase);
            assert!(wrap_angle(r.analytic_phase - want).abs() < 1e-12);
            assert!(r.difference_mod_2pi.abs() < 1e-6);
            assert!(r.converged);
        }
    }

    #[test]
    fn reference_point_quantized_phases() {
        // Frozen 2π⟨a†a⟩ per level from the same independent diagonalization.
        let expect = [3.889_345_477_037_584, 2.976_976_287_972_677_8, 3.306_209_019_206_907, 2.393_839_830_142_003_4];
        let p = ModelParams::<f64>::reference();
        for (j, want) in expect.iter().enumerate() {
            let r = berry_quantized_numeric(&p, j + 1, 65536).unwrap();
            assert!((r.analytic_phase - want).abs() < 1e-12);
            assert!(wrap_angle(r.numeric_phase - want).abs() < 1e-8);
        }
    }

    #[test]
    fn quantized_number_eigenstate_has_zero_phase() {
        let p = ModelParams::<f64>::new(1.0, 0.8, 0.0, 0.0, 0.0, 0);
        // Levels 3 and 4 are |e₁e₂,0⟩ and |e₁g₂,0⟩ (energy ω₁/2 above ν − ω₁/2).
        for j in [3, 4] {
            let r = berry_quantized_numeric(&p, j, 256).unwrap();
            assert!(r.numeric_phase.abs() < 1e-12);
        }
    }

    #[test]
    fn two_mode_theta_zero_is_jz_phase() {
        let p = ModelParams::<f64>::reference().with_n_prime(1);
        for j in 1..=4 {
            let r = two_mode_berry_numeric(&p, j, 0.0, 65536).unwrap();
            let jz = two_mode_jz_phase(&p, j).unwrap();
            assert!(wrap_angle(r.numeric_phase - jz).abs() < 1e-8);
        }
    }

    #[test]
    fn two_mode_offset_is_jz_phase() {
        let p = ModelParams::<f64>::reference();
        let theta = PI / 3.0;
        for j in 1..=4 {
            let r = two_mode_berry_numeric(&p, j, theta, 65536).unwrap();
            let jz = two_mode_jz_phase(&p, j).unwrap();
            assert!(wrap_angle(r.numeric_phase - theta.cos() * jz).abs() < 1e-8);
            assert!(wrap_angle(r.difference_mod_2pi + jz).abs() < 1e-8);
        }
    }

    #[test]
    fn uncoupled_vacuum_level_has_no_two_mode_phase() {
        let p = ModelParams::<f64>::new(1.0, 0.8, 0.0, 0.0, 0.0, 0);
        // Level 4 is |e₁g₂,0⟩ ⊗ |0⟩: J_z = 0 and the state is invariant.
        let r = two_mode_berry_numeric(&p, 4, 0.0, 64).unwrap();
        assert!(r.numeric_phase.abs() < 1e-12);
    }

    #[test]
    fn single_precision_magnetic_phase() {
        let p = ModelParams::<f32>::reference();
        let r = berry_magnetic_numeric(&p, 2, 1024).unwrap();
        assert!(r.difference_mod_2pi.abs() < 1e-3);
    }
}
