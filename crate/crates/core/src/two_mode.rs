//! Two-mode Fock space, the embedding `|ψ⟩ ⊗ |n′⟩` and the SU(2) rotation
//! `U(θ, φ) = exp(-iφJ_z) exp(-iθJ_y)` generated by
//! `J_z = (a†a − b†b)/2` and `J_y = (a†b − ab†)/(2i)`.
//!
//! Both generators conserve the total photon number `N = n_a + n_b`, so the
//! state is stored exactly as two dense sectors `N = S` and `N = S + 1` with
//! `S = n + n′`. Within a sector the photon basis is indexed by `n_a = 0..=N`.

use num_complex::Complex;
use num_traits::Zero;

use crate::eigen::{Amplitudes, EigenFrame};
use crate::linalg::{inner, unitary_exp, CMatrix};
use crate::model::ModelParams;
use crate::scalar::{cis, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Excited,
    Ground,
}

impl Spin {
    fn bit(self) -> usize {
        match self {
            Spin::Excited => 0,
            Spin::Ground => 1,
        }
    }
}

/// Number of spin configurations of the two particles.
pub const SPIN_CONFIGS: usize = 4;

/// A state of both spins and both field modes, confined to two adjacent
/// total-photon sectors.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeState<T> {
    base: u32,
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> TwoModeState<T> {
    /// The zero state with lower sector `base = n + n′`.
    pub fn zeros(base: u32) -> Self {
        Self { base, amplitudes: vec![Complex::zero(); Self::dim_for(base)] }
    }

    fn dim_for(base: u32) -> usize {
        let s = base as usize;
        SPIN_CONFIGS * ((s + 1) + (s + 2))
    }

    pub fn base_sector(&self) -> u32 {
        self.base
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    fn sector_offset(&self, total: u32) -> Option<usize> {
        if total == self.base {
            Some(0)
        } else if total == self.base + 1 {
            Some(SPIN_CONFIGS * (self.base as usize + 1))
        } else {
            None
        }
    }

    /// Flat index of `(n_a, n_b, spin₁, spin₂)`, if it lies inside the two stored sectors.
    pub fn index(&self, n_a: u32, n_b: u32, spin1: Spin, spin2: Spin) -> Option<usize> {
        let offset = self.sector_offset(n_a + n_b)?;
        Some(offset + SPIN_CONFIGS * n_a as usize + spin_slot(spin1, spin2))
    }

    pub fn amplitude(&self, n_a: u32, n_b: u32, spin1: Spin, spin2: Spin) -> Complex<T> {
        self.index(n_a, n_b, spin1, spin2).map_or(Complex::zero(), |i| self.amplitudes[i])
    }

    pub fn norm(&self) -> T {
        crate::linalg::norm(&self.amplitudes)
    }

    pub fn inner(&self, other: &Self) -> Complex<T> {
        assert_eq!(self.base, other.base);
        inner(&self.amplitudes, &other.amplitudes)
    }

    /// Population of the total-photon sector `total`.
    pub fn sector_population(&self, total: u32) -> T {
        match self.sector_offset(total) {
            Some(off) => {
                let len = SPIN_CONFIGS * (total as usize + 1);
                self.amplitudes[off..off + len].iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
            }
            None => T::zero(),
        }
    }

    /// Every stored basis element as `(n_a, n_b, spin₁, spin₂, flat index)`.
    pub fn basis(&self) -> impl Iterator<Item = (u32, u32, Spin, Spin, usize)> + '_ {
        [self.base, self.base + 1].into_iter().flat_map(move |total| {
            let off = self.sector_offset(total).unwrap();
            (0..=total).flat_map(move |n_a| {
                SPIN_PAIRS
                    .iter()
                    .enumerate()
                    .map(move |(slot, &(s1, s2))| (n_a, total - n_a, s1, s2, off + SPIN_CONFIGS * n_a as usize + slot))
            })
        })
    }

    /// ⟨J_z⟩ = ⟨a†a − b†b⟩ / 2.
    pub fn jz_expectation(&self) -> T {
        let half = T::lit(0.5);
        self.basis().fold(T::zero(), |acc, (n_a, n_b, _, _, i)| {
            acc + half * (T::lit(n_a as f64) - T::lit(n_b as f64)) * self.amplitudes[i].norm_sqr()
        })
    }
}

const SPIN_PAIRS: [(Spin, Spin); SPIN_CONFIGS] = [
    (Spin::Excited, Spin::Excited),
    (Spin::Excited, Spin::Ground),
    (Spin::Ground, Spin::Excited),
    (Spin::Ground, Spin::Ground),
];

fn spin_slot(spin1: Spin, spin2: Spin) -> usize {
    2 * spin1.bit() + spin2.bit()
}

/// Embeds block amplitudes as `|ψ⟩ ⊗ |n′⟩`; mode `a` carries the `n`/`n+1` photons.
pub fn embed_two_mode<T: Real>(frame: &EigenFrame<T>, params: &ModelParams<T>) -> TwoModeState<T> {
    embed_amplitudes(&frame.amplitudes, params.n_photon, params.n_prime)
}

pub fn embed_amplitudes<T: Real>(amplitudes: &Amplitudes<T>, n: u32, n_prime: u32) -> TwoModeState<T> {
    let mut state = TwoModeState::zeros(n + n_prime);
    let slots = [
        (n, Spin::Excited, Spin::Excited),
        (n, Spin::Excited, Spin::Ground),
        (n + 1, Spin::Ground, Spin::Excited),
        (n + 1, Spin::Ground, Spin::Ground),
    ];
    for (c, (n_a, s1, s2)) in amplitudes.iter().zip(slots) {
        let i = state.index(n_a, n_prime, s1, s2).expect("embedding stays within the two stored sectors");
        state.amplitudes[i] = *c;
    }
    state
}

/// `J_y` in the sector of total photon number `total`, basis `n_a = 0..=total`.
pub fn jy_sector<T: Real>(total: u32) -> CMatrix<T> {
    let dim = total as usize + 1;
    let mut m = CMatrix::zeros(dim);
    let half = T::lit(0.5);
    for n_a in 0..total as usize {
        // ⟨n_a+1| a†b |n_a⟩ = √((n_a+1)(N−n_a)), and J_y = (a†b − ab†)/(2i).
        let amp = T::lit(((n_a + 1) * (total as usize - n_a)) as f64).sqrt() * half;
        m[(n_a + 1, n_a)] = Complex::new(T::zero(), -amp);
        m[(n_a, n_a + 1)] = Complex::new(T::zero(), amp);
    }
    m
}

/// `U(θ, φ)` restricted to the two sectors of a given base, with the `θ`
/// factor precomputed so that sweeping `φ` only costs diagonal phases.
#[derive(Debug, Clone)]
pub struct TwoModeRotation<T> {
    base: u32,
    theta_factor: [CMatrix<T>; 2],
}

impl<T: Real> TwoModeRotation<T> {
    pub fn new(base: u32, theta: T) -> Self {
        Self { base, theta_factor: [unitary_exp(&jy_sector(base), theta), unitary_exp(&jy_sector(base + 1), theta)] }
    }

    pub fn apply(&self, state: &TwoModeState<T>, phi: T) -> TwoModeState<T> {
        assert_eq!(state.base, self.base, "rotation built for a different photon sector");
        let mut out = TwoModeState::zeros(self.base);
        let half = T::lit(0.5);
        for (which, total) in [self.base, self.base + 1].into_iter().enumerate() {
            let off = state.sector_offset(total).unwrap();
            let dim = total as usize + 1;
            let d = &self.theta_factor[which];
            for slot in 0..SPIN_CONFIGS {
                for row in 0..dim {
                    let mut acc: Complex<T> = Complex::zero();
                    for col in 0..dim {
                        acc += d[(row, col)] * state.amplitudes[off + SPIN_CONFIGS * col + slot];
                    }
                    let jz = T::lit(row as f64) - half * T::lit(total as f64);
                    out.amplitudes[off + SPIN_CONFIGS * row + slot] = acc * cis(-phi * jz);
                }
            }
        }
        out
    }
}

/// Applies `exp(-iφJ_z) exp(-iθJ_y)` to `state`.
pub fn two_mode_rotation<T: Real>(state: &TwoModeState<T>, theta: T, phi: T) -> TwoModeState<T> {
    TwoModeRotation::new(state.base, theta).apply(state, phi)
}

/// ⟨J_z⟩ of `|ψ⟩ ⊗ |n′⟩`: `((n − n′) + sin²(χ/2)) / 2`.
pub fn jz_of_frame<T: Real>(frame: &EigenFrame<T>, params: &ModelParams<T>) -> T {
    let dn = T::lit(f64::from(params.n_photon)) - T::lit(f64::from(params.n_prime));
    T::lit(0.5) * (dn + frame.ground_weight())
}
