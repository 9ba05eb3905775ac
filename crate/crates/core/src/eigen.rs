//! Eigenpairs of the block Hamiltonian, their gauge, the `(χ, ξ, η)` angle
//! parameterization and continuity tracking around the azimuthal loop.
//!
//! A gauge-fixed eigenvector has the form
//!
//! ```text
//! ( e^{-iφ} cos(χ/2) sin(ξ/2),  cos(χ/2) cos(ξ/2),  e^{-iφ} sin(χ/2) sin(η/2),  sin(χ/2) cos(η/2) )
//! ```

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{eigh, inner, norm};
use crate::model::{BlockHamiltonian, ModelParams, BLOCK_DIM};
use crate::scalar::{cis, Real};

/// Relative eigenvalue gap below which two levels count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Default number of samples around a loop.
pub const DEFAULT_LOOP_STEPS: usize = 1024;

/// Smallest number of samples accepted by [`track_loop`].
pub const MIN_LOOP_STEPS: usize = 16;

/// Minimum overlap modulus between consecutive tracked frames.
pub const CONTINUITY_MIN: f64 = 0.9;

const GAUGE_PIVOT_TOL: f64 = 1e-12;
const REALITY_TOL: f64 = 1e-9;
const ANGLE_WEIGHT_TOL: f64 = 1e-14;

pub type Amplitudes<T> = [Complex<T>; BLOCK_DIM];

/// Angles parameterizing a gauge-fixed eigenvector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angles<T> {
    /// Mixing between the `n` and `n+1` photon sectors, in `[0, π]`.
    pub chi: T,
    /// Particle-2 latitude within the particle-1 excited sector, in `[-π, π]`.
    pub xi: T,
    /// Particle-2 latitude within the particle-1 ground sector, in `(-2π, 2π]`.
    pub eta: T,
    /// `ξ` is undefined because the particle-1 excited weight vanishes.
    pub xi_undefined: bool,
    /// `η` is undefined because the particle-1 ground weight vanishes.
    pub eta_undefined: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenFrame<T> {
    pub energy: T,
    pub amplitudes: Amplitudes<T>,
    /// Ascending-energy rank, 1..=4.
    pub label_j: usize,
    /// Set once the frame has been gauge fixed and its angles extracted.
    pub angles: Option<Angles<T>>,
}

impl<T: Real> EigenFrame<T> {
    pub fn from_amplitudes(amplitudes: Amplitudes<T>) -> Self {
        Self { energy: T::zero(), amplitudes, label_j: 1, angles: None }
    }

    pub fn norm(&self) -> T {
        norm(&self.amplitudes)
    }

    /// Weight of the `n`-photon sector, `cos²(χ/2)`.
    pub fn excited_weight(&self) -> T {
        self.amplitudes[0].norm_sqr() + self.amplitudes[1].norm_sqr()
    }

    /// Weight of the `n+1`-photon sector, `sin²(χ/2)`.
    pub fn ground_weight(&self) -> T {
        self.amplitudes[2].norm_sqr() + self.amplitudes[3].norm_sqr()
    }

    pub fn overlap(&self, other: &Self) -> Complex<T> {
        inner(&self.amplitudes, &other.amplitudes)
    }
}

/// All four eigenpairs of `h`, ascending in energy, angles unset.
pub fn hermitian_eigensystem<T: Real>(h: &BlockHamiltonian<T>) -> [EigenFrame<T>; BLOCK_DIM] {
    let eig = eigh(&h.to_matrix());
    std::array::from_fn(|k| {
        let v = &eig.vectors[k];
        EigenFrame { energy: eig.values[k], amplitudes: [v[0], v[1], v[2], v[3]], label_j: k + 1, angles: None }
    })
}

/// Chooses the global phase so that the co-rotated amplitudes
/// `(c₁e^{iφ}, c₂, c₃e^{iφ}, c₄)` are real with a nonnegative pivot.
///
/// The pivot is `c₂`, falling back to `c₄` and then `c₁e^{iφ}` when the
/// preceding amplitude is negligible.
pub fn fix_gauge<T: Real>(frame: &EigenFrame<T>, phi: T) -> Result<EigenFrame<T>> {
    let rot = cis(phi);
    let co = co_rotated(&frame.amplitudes, rot);
    let pivot_tol = T::tol(GAUGE_PIVOT_TOL);
    let pivot = [1usize, 3, 0, 2].into_iter().find(|&k| co[k].norm() >= pivot_tol).unwrap_or(1);
    let p = co[pivot];
    let phase = if p.norm() > T::zero() { p.conj() / p.norm() } else { Complex::new(T::one(), T::zero()) };

    let mut out = *frame;
    for c in out.amplitudes.iter_mut() {
        *c *= phase;
    }
    let co = co_rotated(&out.amplitudes, rot);
    let residual = co.iter().fold(T::zero(), |acc, z| acc.max(z.im.abs()));
    if residual > T::tol(REALITY_TOL) {
        return Err(Error::RealityViolation { residual: residual.as_f64() });
    }
    out.angles = None;
    Ok(out)
}

fn co_rotated<T: Real>(a: &Amplitudes<T>, rot: Complex<T>) -> Amplitudes<T> {
    [a[0] * rot, a[1], a[2] * rot, a[3]]
}

/// Inverts the angle parameterization for a gauge-fixed frame.
pub fn extract_angles<T: Real>(frame: &EigenFrame<T>, phi: T) -> Angles<T> {
    let co = co_rotated(&frame.amplitudes, cis(phi));
    let upper = frame.excited_weight();
    let lower = frame.ground_weight();
    let two = T::lit(2.0);
    let chi = two * lower.sqrt().atan2(upper.sqrt());
    let weight_tol = T::tol(ANGLE_WEIGHT_TOL);

    let xi_undefined = upper < weight_tol;
    let eta_undefined = lower < weight_tol;
    let xi = if xi_undefined { T::zero() } else { two * co[0].re.atan2(co[1].re) };
    let eta = if eta_undefined { T::zero() } else { two * co[2].re.atan2(co[3].re) };
    Angles { chi, xi, eta, xi_undefined, eta_undefined }
}

/// Gauge-fixed amplitudes for the given angles at azimuth `phi`.
pub fn amplitudes_from_angles<T: Real>(chi: T, xi: T, eta: T, phi: T) -> Amplitudes<T> {
    let half = T::lit(0.5);
    let (sc, cc) = (chi * half).sin_cos();
    let (sx, cx) = (xi * half).sin_cos();
    let (se, ce) = (eta * half).sin_cos();
    let rot = cis(-phi);
    let real = |x: T| Complex::new(x, T::zero());
    [rot * (cc * sx), real(cc * cx), rot * (sc * se), real(sc * ce)]
}

/// Diagonalizes at `phi`, gauge fixes every eigenvector and extracts angles.
pub fn eigenframes<T: Real>(params: &ModelParams<T>, phi: T) -> Result<[EigenFrame<T>; BLOCK_DIM]> {
    let raw = hermitian_eigensystem(&BlockHamiltonian::new(params, phi));
    let mut out = raw;
    for (slot, frame) in out.iter_mut().zip(raw.iter()) {
        let mut fixed = fix_gauge(frame, phi)?;
        fixed.angles = Some(extract_angles(&fixed, phi));
        *slot = fixed;
    }
    Ok(out)
}

/// Smallest adjacent gap of an ascending spectrum.
pub fn min_adjacent_gap<T: Real>(energies: &[T]) -> T {
    energies.windows(2).fold(T::infinity(), |acc, w| acc.min(w[1] - w[0]))
}

/// Degeneracy threshold for a spectrum: relative to its range, floored at one.
pub fn degeneracy_threshold<T: Real>(energies: &[T]) -> T {
    let range = match (energies.first(), energies.last()) {
        (Some(&lo), Some(&hi)) => hi - lo,
        _ => T::zero(),
    };
    T::tol(DEGENERACY_TOL) * range.max(T::one())
}

/// Matches `current` vectors onto `previous` ones by maximal overlap.
///
/// Returns `assignment[i] = k` meaning `current[k]` continues `previous[i]`.
/// Greedy on descending overlap modulus; near-ties resolve to the lower
/// previous index first.
pub fn assign_by_overlap<T: Real>(previous: &[&[Complex<T>]], current: &[&[Complex<T>]]) -> Vec<usize> {
    let n = previous.len();
    let mut pairs = Vec::with_capacity(n * current.len());
    for (i, p) in previous.iter().enumerate() {
        for (k, c) in current.iter().enumerate() {
            pairs.push((inner(p, c).norm(), i, k));
        }
    }
    let tie = T::tol(1e-12);
    pairs.sort_by(|a, b| {
        if (a.0 - b.0).abs() <= tie {
            (a.1, a.2).cmp(&(b.1, b.2))
        } else {
            b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal)
        }
    });
    let mut assignment = vec![usize::MAX; n];
    let mut taken = vec![false; current.len()];
    for (_, i, k) in pairs {
        if assignment[i] == usize::MAX && !taken[k] {
            assignment[i] = k;
            taken[k] = true;
        }
    }
    assignment
}

/// One tracked level sampled around the azimuthal loop `φ_k = 2πk/steps`.
#[derive(Debug, Clone)]
pub struct LoopTrace<T> {
    pub params: ModelParams<T>,
    pub label_j: usize,
    /// `(φ_k, frame)` pairs, `k = 0..steps`.
    pub samples: Vec<(T, EigenFrame<T>)>,
    pub min_gap: T,
}

impl<T: Real> LoopTrace<T> {
    pub fn steps(&self) -> usize {
        self.samples.len()
    }

    pub fn frames(&self) -> impl Iterator<Item = &EigenFrame<T>> {
        self.samples.iter().map(|(_, f)| f)
    }

    /// The frame at `φ = 0`, gauge fixed with angles.
    pub fn initial(&self) -> &EigenFrame<T> {
        &self.samples[0].1
    }
}

/// Tracks all four levels simultaneously around the azimuthal loop.
pub fn track_all_levels<T: Real>(params: &ModelParams<T>, steps: usize) -> Result<[LoopTrace<T>; BLOCK_DIM]> {
    params.validate()?;
    if steps < MIN_LOOP_STEPS {
        return Err(Error::TooFewSamples { got: steps, min: MIN_LOOP_STEPS });
    }
    let continuity = T::lit(CONTINUITY_MIN);
    let mut samples: [Vec<(T, EigenFrame<T>)>; BLOCK_DIM] = std::array::from_fn(|_| Vec::with_capacity(steps));
    let mut min_gap = T::infinity();

    for k in 0..steps {
        let phi = T::TAU() * T::lit(k as f64) / T::lit(steps as f64);
        let frames = eigenframes_checked(params, phi, &mut min_gap)?;
        if k == 0 {
            for (level, frame) in frames.into_iter().enumerate() {
                samples[level].push((phi, frame));
            }
            continue;
        }
        let previous: [Amplitudes<T>; BLOCK_DIM] = std::array::from_fn(|l| samples[l].last().unwrap().1.amplitudes);
        let prev: Vec<&[Complex<T>]> = previous.iter().map(|a| &a[..]).collect();
        let cur: Vec<&[Complex<T>]> = frames.iter().map(|f| &f.amplitudes[..]).collect();
        let assignment = assign_by_overlap(&prev, &cur);
        for (level, &src) in assignment.iter().enumerate() {
            let mut frame = frames[src];
            let ov = inner(&previous[level], &frame.amplitudes).norm();
            if ov <= continuity {
                return Err(Error::ContinuityLost { step: k, overlap: ov.as_f64() });
            }
            frame.label_j = level + 1;
            samples[level].push((phi, frame));
        }
    }

    let mut out = samples.into_iter().enumerate().map(|(level, samples)| LoopTrace {
        params: *params,
        label_j: level + 1,
        samples,
        min_gap,
    });
    Ok(std::array::from_fn(|_| out.next().unwrap()))
}

fn eigenframes_checked<T: Real>(
    params: &ModelParams<T>,
    phi: T,
    min_gap: &mut T,
) -> Result<[EigenFrame<T>; BLOCK_DIM]> {
    let raw = hermitian_eigensystem(&BlockHamiltonian::new(params, phi));
    let energies: Vec<T> = raw.iter().map(|f| f.energy).collect();
    let gap = min_adjacent_gap(&energies);
    let threshold = degeneracy_threshold(&energies);
    *min_gap = min_gap.min(gap);
    if gap < threshold {
        return Err(Error::DegeneracyEncountered { gap: gap.as_f64(), tolerance: threshold.as_f64() });
    }
    let mut out = raw;
    for (slot, frame) in out.iter_mut().zip(raw.iter()) {
        let mut fixed = fix_gauge(frame, phi)?;
        fixed.angles = Some(extract_angles(&fixed, phi));
        *slot = fixed;
    }
    Ok(out)
}

/// Tracks the level with ascending-energy rank `label_j` around the loop.
pub fn track_loop<T: Real>(params: &ModelParams<T>, label_j: usize, steps: usize) -> Result<LoopTrace<T>> {
    check_level(label_j)?;
    let traces = track_all_levels(params, steps)?;
    Ok(traces.into_iter().nth(label_j - 1).unwrap())
}

pub(crate) fn check_level(label_j: usize) -> Result<()> {
    if (1..=BLOCK_DIM).contains(&label_j) {
        Ok(())
    } else {
        Err(Error::InvalidLevel(label_j))
    }
}

/// The gauge-fixed frame of level `label_j` at `φ = 0`.
pub fn frame_at_origin<T: Real>(params: &ModelParams<T>, label_j: usize) -> Result<EigenFrame<T>> {
    check_level(label_j)?;
    params.validate()?;
    Ok(eigenframes(params, T::zero())?[label_j - 1])
}

/// Convenience: the zero amplitude vector.
pub fn zero_amplitudes<T: Real>() -> Amplitudes<T> {
    [Complex::zero(); BLOCK_DIM]
}
