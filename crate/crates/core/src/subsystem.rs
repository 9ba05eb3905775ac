//! Reduced states, pure-state concurrence and mixed-state geometric phases
//! `Γ = arg Σ_l p_l e^{iβ_l}`, where `p_l` are the eigenvalues of a reduced
//! density matrix and `β_l` the geometric phases of its eigenvectors.
//!
//! Closed forms are evaluated in this same arg-of-sum shape, which carries no
//! arctangent branch ambiguity. The tangent-of-arctangent displays are kept as
//! cross-checks that agree modulo π.

use num_complex::Complex;
use num_traits::Zero;

use crate::eigen::{assign_by_overlap, Angles, EigenFrame, LoopTrace};
use crate::error::{Error, Result};
use crate::linalg::{eigh, CMatrix};
use crate::model::ModelParams;
use crate::phases::{solid_angle_fixed_latitude, two_mode_loop_states, wilson_loop_phase};
use crate::scalar::{wrap_angle, Real};
use crate::two_mode::{Spin, TwoModeState};

/// Minimum gap between retained reduced-state eigenvalues.
pub const REDUCED_GAP_TOL: f64 = 1e-9;

/// Allowed drift of a reduced eigenvalue along a loop.
pub const POPULATION_DRIFT_TOL: f64 = 1e-9;

/// Distance of a tangent argument from a pole that is flagged as singular.
pub const BRANCH_TOL: f64 = 1e-9;

const STATE_TOL: f64 = 1e-12;

/// Which subsystem a reduced state keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Partition {
    /// Particle 2 alone (traced over particle 1 and the field).
    Particle2,
    /// Particle 1 with the coupled field mode.
    Particle1Field,
    /// Particle 1 with both field modes.
    Particle1Fields,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState<T> {
    pub matrix: CMatrix<T>,
    pub partition: Partition,
}

impl<T: Real> ReducedState<T> {
    /// Checks Hermiticity, unit trace and positivity within `1e-12`.
    pub fn is_valid(&self) -> bool {
        let tol = T::tol(STATE_TOL);
        if self.matrix.hermiticity_defect() > tol {
            return false;
        }
        let tr = self.matrix.trace();
        if (tr.re - T::one()).abs() > tol || tr.im.abs() > tol {
            return false;
        }
        eigh(&self.matrix).values.iter().all(|&p| p >= -tol && p <= T::one() + tol)
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        eigh(&self.matrix).values
    }
}

/// Partial trace over particle 1 and the field; basis `(|e₂⟩, |g₂⟩)`.
pub fn reduce_to_particle2<T: Real>(frame: &EigenFrame<T>) -> ReducedState<T> {
    let c = frame.amplitudes;
    let mut m = CMatrix::zeros(2);
    m[(0, 0)] = Complex::new(c[0].norm_sqr() + c[2].norm_sqr(), T::zero());
    m[(1, 1)] = Complex::new(c[1].norm_sqr() + c[3].norm_sqr(), T::zero());
    m[(0, 1)] = c[0] * c[1].conj() + c[2] * c[3].conj();
    m[(1, 0)] = m[(0, 1)].conj();
    ReducedState { matrix: m, partition: Partition::Particle2 }
}

/// Partial trace over particle 2; basis `(|e₁,n⟩, |g₁,n+1⟩)`.
pub fn reduce_to_particle1_field<T: Real>(frame: &EigenFrame<T>) -> ReducedState<T> {
    let c = frame.amplitudes;
    let mut m = CMatrix::zeros(2);
    m[(0, 0)] = Complex::new(c[0].norm_sqr() + c[1].norm_sqr(), T::zero());
    m[(1, 1)] = Complex::new(c[2].norm_sqr() + c[3].norm_sqr(), T::zero());
    m[(0, 1)] = c[0] * c[2].conj() + c[1] * c[3].conj();
    m[(1, 0)] = m[(0, 1)].conj();
    ReducedState { matrix: m, partition: Partition::Particle1Field }
}

/// The particle-2 reduced matrix written through the angles at azimuth `phi`.
pub fn particle2_matrix_from_angles<T: Real>(angles: &Angles<T>, phi: T) -> CMatrix<T> {
    let half = T::lit(0.5);
    let s2 = (angles.chi * half).sin().powi(2);
    let c2 = (angles.chi * half).cos().powi(2);
    let sq = |x: T| x * x;
    let mut m = CMatrix::zeros(2);
    m[(0, 0)] = Complex::new(c2 * sq((angles.xi * half).sin()) + sq((angles.eta * half).sin()) * s2, T::zero());
    m[(1, 1)] = Complex::new(sq((angles.xi * half).cos()) * c2 + sq((angles.eta * half).cos()) * s2, T::zero());
    let off = half * (angles.xi.sin() * c2 + angles.eta.sin() * s2);
    m[(0, 1)] = Complex::from_polar(off, -phi);
    m[(1, 0)] = Complex::from_polar(off, phi);
    m
}

/// Partial trace of a two-mode state over particle 2.
///
/// The kept basis is the stored `(n_a, n_b, spin₁)` order, i.e. flat state
/// index divided by two.
pub fn reduce_two_mode_over_particle2<T: Real>(state: &TwoModeState<T>) -> ReducedState<T> {
    let amps = state.as_slice();
    let dim = amps.len() / 2;
    let mut m = CMatrix::zeros(dim);
    for a in 0..dim {
        for b in 0..dim {
            let mut acc = Complex::zero();
            for s2 in 0..2 {
                acc += amps[2 * a + s2] * amps[2 * b + s2].conj();
            }
            m[(a, b)] = acc;
        }
    }
    ReducedState { matrix: m, partition: Partition::Particle1Fields }
}

/// `(n_a, n_b)` of every basis element kept by [`reduce_two_mode_over_particle2`].
fn two_mode_subsystem_photons<T: Real>(state: &TwoModeState<T>) -> Vec<(u32, u32)> {
    let mut out = vec![(0, 0); state.dim() / 2];
    for (n_a, n_b, _, s2, i) in state.basis() {
        if s2 == Spin::Excited {
            out[i / 2] = (n_a, n_b);
        }
    }
    out
}

/// `2|c₁c₄ − c₂c₃|` across the (particle 1 + field | particle 2) split.
pub fn concurrence_pure<T: Real>(frame: &EigenFrame<T>) -> T {
    let c = frame.amplitudes;
    T::lit(2.0) * (c[0] * c[3] - c[1] * c[2]).norm()
}

/// `|sin χ · sin((ξ − η)/2)|`.
pub fn concurrence_from_angles<T: Real>(angles: &Angles<T>) -> T {
    (angles.chi.sin() * ((angles.xi - angles.eta) * T::lit(0.5)).sin()).abs()
}

/// Numeric mixed-state phase and its ingredients.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedPhaseReport<T> {
    pub partition: Partition,
    /// Retained reduced eigenvalues, ascending.
    pub eigenvalues: Vec<T>,
    /// Geometric phase of each retained eigenvector, same order.
    pub betas: Vec<T>,
    /// `arg Σ p_l e^{iβ_l}`, in `(-π, π]`.
    pub gamma: T,
    pub analytic: Option<T>,
    /// `wrap(analytic − gamma)`.
    pub difference_mod_2pi: Option<T>,
    /// For two-mode loops, `⟨J_z⟩` of each retained eigenvector before rotation.
    pub generator_expectations: Vec<T>,
    pub loop_steps: usize,
}

/// Closed-form value with a flag for a pole or vanishing-weight singularity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm<T> {
    pub value: T,
    pub singular: bool,
}

type EndpointMap<T> = dyn Fn(&[Complex<T>]) -> Vec<Complex<T>>;

#[derive(Debug)]
struct MixedPhase<T> {
    weights: Vec<T>,
    betas: Vec<T>,
    gamma: T,
}

/// Eigen-decomposes every reduced matrix along a loop, tracks the retained
/// eigenvectors and combines their phases.
///
/// `endpoint` maps an eigenvector at the loop start to its transported image
/// at the loop end; `None` means the loop closes on itself.
fn mixed_phase_along<T: Real>(rhos: &[CMatrix<T>], endpoint: Option<&EndpointMap<T>>) -> Result<MixedPhase<T>> {
    let first = eigh(&rhos[0]);
    let keep = retained_indices(&first.values)?;
    let p0: Vec<T> = keep.iter().map(|&i| first.values[i]).collect();
    let drift_tol = T::tol(POPULATION_DRIFT_TOL);

    let mut tracks: Vec<Vec<Vec<Complex<T>>>> = keep.iter().map(|&i| vec![first.vectors[i].clone()]).collect();
    for rho in &rhos[1..] {
        let eig = eigh(rho);
        let prev: Vec<&[Complex<T>]> = tracks.iter().map(|t| t.last().unwrap().as_slice()).collect();
        let cur: Vec<&[Complex<T>]> = keep.iter().map(|&i| eig.vectors[i].as_slice()).collect();
        let assignment = assign_by_overlap(&prev, &cur);
        let mut next = Vec::with_capacity(keep.len());
        for (l, &src) in assignment.iter().enumerate() {
            let p = eig.values[keep[src]];
            let drift = (p - p0[l]).abs();
            if drift > drift_tol {
                return Err(Error::PopulationDrift { drift: drift.as_f64() });
            }
            next.push(eig.vectors[keep[src]].clone());
        }
        for (t, v) in tracks.iter_mut().zip(next) {
            t.push(v);
        }
    }

    let mut betas = Vec::with_capacity(keep.len());
    for track in &mut tracks {
        let beta = match endpoint {
            Some(map) => {
                let end = map(&track[0]);
                track.push(end);
                let b = wilson_loop_phase(track, false)?;
                track.pop();
                b
            }
            None => wilson_loop_phase(track, true)?,
        };
        betas.push(beta);
    }
    let gamma = combine(&p0, &betas);
    Ok(MixedPhase { weights: p0, betas, gamma })
}

/// `arg Σ p_l e^{iβ_l}`.
pub fn combine<T: Real>(weights: &[T], betas: &[T]) -> T {
    let sum =
        weights.iter().zip(betas).fold(Complex::zero(), |acc: Complex<T>, (p, b)| acc + Complex::from_polar(*p, *b));
    wrap_angle(sum.arg())
}

/// Indices of reduced eigenvalues that carry weight, plus a lone vanishing
/// eigenvalue (its eigenvector is still well defined).
fn retained_indices<T: Real>(values: &[T]) -> Result<Vec<usize>> {
    let gap_tol = T::tol(REDUCED_GAP_TOL);
    let small: Vec<usize> = (0..values.len()).filter(|&i| values[i] <= gap_tol).collect();
    let mut keep: Vec<usize> = (0..values.len()).filter(|&i| values[i] > gap_tol).collect();
    if small.len() == 1 {
        keep.insert(0, small[0]);
    }
    for w in keep.windows(2) {
        let gap = values[w[1]] - values[w[0]];
        if gap <= gap_tol {
            return Err(Error::ReducedDegeneracy { gap: gap.as_f64(), tolerance: gap_tol.as_f64() });
        }
    }
    Ok(keep)
}

/// Mixed-state phase of one subsystem along a tracked magnetic loop.
pub fn mixed_phase_numeric<T: Real>(trace: &LoopTrace<T>, keep: Partition) -> Result<MixedPhaseReport<T>> {
    let reduce: fn(&EigenFrame<T>) -> ReducedState<T> = match keep {
        Partition::Particle2 => reduce_to_particle2,
        Partition::Particle1Field => reduce_to_particle1_field,
        Partition::Particle1Fields => {
            return Err(Error::InvalidParams("the magnetic loop has a single field mode".into()))
        }
    };
    let rhos: Vec<CMatrix<T>> = trace.frames().map(|f| reduce(f).matrix).collect();
    let MixedPhase { weights: eigenvalues, betas, gamma } = mixed_phase_along(&rhos, None)?;
    let analytic = match keep {
        Partition::Particle2 => {
            let a = trace.initial().angles.expect("tracked frames carry angles");
            Some(gamma2_closed_form(a.chi, a.xi, a.eta).value)
        }
        // The reduced state of particle 1 and the field does not depend on φ.
        _ => Some(T::zero()),
    };
    Ok(MixedPhaseReport {
        partition: keep,
        eigenvalues,
        betas,
        gamma,
        analytic,
        difference_mod_2pi: analytic.map(|a| wrap_angle(a - gamma)),
        generator_expectations: Vec::new(),
        loop_steps: trace.steps(),
    })
}

/// Bloch-vector data of the particle-2 reduced state: `(Z, R)` with
/// `Z = cos²(χ/2) cos ξ + sin²(χ/2) cos η` and `R` the Bloch length.
fn particle2_bloch<T: Real>(chi: T, xi: T, eta: T) -> (T, T) {
    let half = T::lit(0.5);
    let c2 = (chi * half).cos().powi(2);
    let s2 = (chi * half).sin().powi(2);
    let z = c2 * xi.cos() + s2 * eta.cos();
    let x = c2 * xi.sin() + s2 * eta.sin();
    (z, z.hypot(x))
}

/// Closed-form mixed phase of particle 2 under the magnetic loop.
///
/// The reduced eigenvectors sit at Bloch latitudes with `cos Θ = ∓Z/R`, so
/// `β_± = −π(1 ± Z/R)` and `Γ = π + arg(cos(πZ/R) − iR sin(πZ/R))`.
pub fn gamma2_closed_form<T: Real>(chi: T, xi: T, eta: T) -> ClosedForm<T> {
    let (z, r) = particle2_bloch(chi, xi, eta);
    if r < T::tol(STATE_TOL) {
        return ClosedForm { value: T::PI(), singular: true };
    }
    let x = T::PI() * z / r;
    let inner = Complex::new(x.cos(), -r * x.sin());
    ClosedForm { value: wrap_angle(T::PI() + inner.arg()), singular: false }
}

/// The principal-branch arctangent display
/// `−tan⁻¹(½√(2sin²χ cos(η−ξ) + cos 2χ + 3) · tan(2πZ / √(…)))`.
///
/// Agrees with [`gamma2_closed_form`] modulo π.
pub fn gamma2_arctan_form<T: Real>(chi: T, xi: T, eta: T) -> ClosedForm<T> {
    let two = T::lit(2.0);
    let root = (two * chi.sin().powi(2) * (eta - xi).cos() + (two * chi).cos() + T::lit(3.0)).max(T::zero()).sqrt();
    let (z, _) = particle2_bloch(chi, xi, eta);
    if root < T::tol(STATE_TOL) {
        return ClosedForm { value: T::zero(), singular: true };
    }
    let arg = T::TAU() * z / root;
    let singular = arg.cos().abs() < T::tol(BRANCH_TOL);
    ClosedForm { value: -(T::lit(0.5) * root * arg.tan()).atan(), singular }
}

/// Both closed forms of the two-mode subsystem phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeSubsystemPhase<T> {
    /// Written through `(χ, ξ, η)`.
    pub from_angles: T,
    /// Written through the concurrence `c_j`.
    pub from_concurrence: T,
    pub concurrence: T,
    /// A tangent argument sits on a pole, or `c_j = 1`.
    pub singular: bool,
}

/// `arg(cos(a/R) + iR sin(a/R))`, the branch-free `tan⁻¹(R tan(a/R))`.
fn arctan_of_scaled_tan<T: Real>(r: T, a: T) -> (T, bool) {
    if r < T::tol(STATE_TOL) {
        return (a, true);
    }
    let x = a / r;
    let singular = x.cos().abs() < T::tol(BRANCH_TOL);
    (Complex::new(x.cos(), r * x.sin()).arg(), singular)
}

/// `−½Ω[n − n′ + ½] + tan⁻¹{R tan[Ω cos χ / (4R)]}` with
/// `R = √(sin²χ cos²((ξ−η)/2) + cos²χ) = √(1 − c_j²)`.
pub fn gamma_2q_subsystem_analytic<T: Real>(
    chi: T,
    xi: T,
    eta: T,
    n_photon: u32,
    n_prime: u32,
    solid_angle: T,
) -> TwoModeSubsystemPhase<T> {
    let half = T::lit(0.5);
    let quarter = T::lit(0.25);
    let dn = T::lit(f64::from(n_photon)) - T::lit(f64::from(n_prime));
    let linear = -half * solid_angle * (dn + half);

    let r_angles = (chi.sin().powi(2) * ((xi - eta) * half).cos().powi(2) + chi.cos().powi(2)).sqrt();
    let (g_angles, s_angles) = arctan_of_scaled_tan(r_angles, solid_angle * chi.cos() * quarter);

    let c = concurrence_from_angles(&Angles { chi, xi, eta, xi_undefined: false, eta_undefined: false });
    let r_conc = (T::one() - c * c).max(T::zero()).sqrt();
    let a_conc = solid_angle * (T::one() - T::lit(2.0) * (chi * half).sin().powi(2)) * quarter;
    let (g_conc, s_conc) = arctan_of_scaled_tan(r_conc, a_conc);

    TwoModeSubsystemPhase {
        from_angles: linear + g_angles,
        from_concurrence: linear + g_conc,
        concurrence: c,
        singular: s_angles || s_conc,
    }
}

/// Mixed-state phase of particle 1 plus both modes under the two-mode
/// rotation at fixed `θ`, `φ: 0 → 2π`.
///
/// The analytic partner is `gamma_2q_subsystem_analytic` with
/// `Ω = 2π(1 − cos θ)`; it is reported, not enforced, because the unitary
/// generator gives `β_l = 2π cos θ ⟨J_z⟩_l` where the closed form uses
/// `−Ω⟨J_z⟩_l`.
pub fn mixed_phase_two_mode_numeric<T: Real>(
    params: &ModelParams<T>,
    label_j: usize,
    theta: T,
    steps: usize,
) -> Result<MixedPhaseReport<T>> {
    let (frame, states) = two_mode_loop_states(params, label_j, theta, steps)?;
    let photons = two_mode_subsystem_photons(&states[0]);
    let rhos: Vec<CMatrix<T>> = states[..steps].iter().map(|s| reduce_two_mode_over_particle2(s).matrix).collect();

    // exp(-2πi J_z) = (−1)^{n_a − n_b} on the kept subsystem.
    let parity: Vec<T> = photons.iter().map(|&(a, b)| if (a + b) % 2 == 0 { T::one() } else { -T::one() }).collect();
    let endpoint = move |v: &[Complex<T>]| -> Vec<Complex<T>> { v.iter().zip(&parity).map(|(z, s)| *z * *s).collect() };
    let MixedPhase { weights: eigenvalues, betas, gamma } = mixed_phase_along(&rhos, Some(&endpoint))?;

    let generator_expectations = unrotated_generator_expectations(params, &frame, &photons)?;

    let a = frame.angles.expect("origin frame carries angles");
    let omega = solid_angle_fixed_latitude(theta);
    let analytic =
        gamma_2q_subsystem_analytic(a.chi, a.xi, a.eta, params.n_photon, params.n_prime, omega).from_concurrence;
    Ok(MixedPhaseReport {
        partition: Partition::Particle1Fields,
        eigenvalues,
        betas,
        gamma,
        analytic: Some(analytic),
        difference_mod_2pi: Some(wrap_angle(analytic - gamma)),
        generator_expectations,
        loop_steps: steps,
    })
}

/// `⟨J_z⟩` of each retained reduced eigenvector of `|ψ_j⟩ ⊗ |n′⟩`.
fn unrotated_generator_expectations<T: Real>(
    params: &ModelParams<T>,
    frame: &EigenFrame<T>,
    photons: &[(u32, u32)],
) -> Result<Vec<T>> {
    let psi = crate::two_mode::embed_two_mode(frame, params);
    let rho = reduce_two_mode_over_particle2(&psi).matrix;
    let eig = eigh(&rho);
    let keep = retained_indices(&eig.values)?;
    let half = T::lit(0.5);
    Ok(keep
        .iter()
        .map(|&i| {
            eig.vectors[i].iter().zip(photons).fold(T::zero(), |acc, (z, &(a, b))| {
                acc + half * (T::lit(f64::from(a)) - T::lit(f64::from(b))) * z.norm_sqr()
            })
        })
        .collect())
}
