//! Model parameters and the Hamiltonian restricted to its four-dimensional
//! invariant subspace.
//!
//! Basis order (fixed everywhere in the crate):
//!
//! | index | particle 1 | particle 2 | photons |
//! |-------|------------|------------|---------|
//! | 0     | excited    | excited    | n       |
//! | 1     | excited    | ground     | n       |
//! | 2     | ground     | excited    | n + 1   |
//! | 3     | ground     | ground     | n + 1   |

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{cis, Real};

/// Dimension of the invariant subspace.
pub const BLOCK_DIM: usize = 4;

/// Physical constants of the coupled spin–field Hamiltonian (ℏ = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    /// Transition frequency of particle 1.
    pub omega1: T,
    /// Frequency of the quantized field mode.
    pub nu: T,
    /// Spin–field coupling.
    pub lambda: T,
    /// Spin–spin coupling `J`.
    pub coupling_j: T,
    /// Zeeman energy `μB` of particle 2.
    pub omega2: T,
    /// Field excitation labelling the invariant subspace.
    pub n_photon: u32,
    /// Photon number of the second, uncoupled mode.
    pub n_prime: u32,
}

impl<T: Real> ModelParams<T> {
    pub fn new(omega1: T, nu: T, lambda: T, coupling_j: T, omega2: T, n_photon: u32) -> Self {
        Self { omega1, nu, lambda, coupling_j, omega2, n_photon, n_prime: 0 }
    }

    /// The reference off-resonant, nondegenerate parameter point
    /// `(ω₁, ν, λ, J, ω₂) = (1, 0.8, 0.5, 0.3, 0.7)` with no photons.
    pub fn reference() -> Self {
        Self::new(T::one(), T::lit(0.8), T::lit(0.5), T::lit(0.3), T::lit(0.7), 0)
    }

    pub fn with_n_prime(mut self, n_prime: u32) -> Self {
        self.n_prime = n_prime;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega1", self.omega1),
            ("nu", self.nu),
            ("lambda", self.lambda),
            ("coupling_j", self.coupling_j),
            ("omega2", self.omega2),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite, got {value}")));
            }
        }
        Ok(())
    }

    /// Effective coupling `λ√(n+1)` inside the invariant subspace.
    pub fn lambda_n(&self) -> T {
        self.lambda * T::lit(f64::from(self.n_photon) + 1.0).sqrt()
    }

    /// Largest magnitude among the energy scales, used to size limit proxies.
    pub fn largest_scale(&self) -> T {
        [self.omega1, self.nu, self.lambda, self.coupling_j, self.omega2]
            .iter()
            .fold(T::zero(), |acc, x| acc.max(x.abs()))
    }
}

/// The Hamiltonian on the invariant subspace at magnetic-field azimuth `phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockHamiltonian<T> {
    pub entries: [[Complex<T>; BLOCK_DIM]; BLOCK_DIM],
    pub phi: T,
}

impl<T: Real> BlockHamiltonian<T> {
    pub fn new(params: &ModelParams<T>, phi: T) -> Self {
        let half = T::lit(0.5);
        let n = T::lit(f64::from(params.n_photon));
        let np1 = n + T::one();
        let j = params.coupling_j;
        let w1 = params.omega1;
        let nu = params.nu;
        let real = |x: T| Complex::new(x, T::zero());

        let zeeman = cis(-phi) * (params.omega2 * half);
        let jc = real(params.lambda_n());

        let mut e = [[Complex::zero(); BLOCK_DIM]; BLOCK_DIM];
        e[0][0] = real(j + n * nu + w1 * half);
        e[1][1] = real(-j + n * nu + w1 * half);
        e[2][2] = real(-j + np1 * nu - w1 * half);
        e[3][3] = real(j + np1 * nu - w1 * half);
        e[0][1] = zeeman;
        e[2][3] = zeeman;
        e[0][2] = jc;
        e[1][3] = jc;
        for r in 1..BLOCK_DIM {
            let (upper, lower) = e.split_at_mut(r);
            for (c, row) in upper.iter().enumerate() {
                lower[0][c] = row[r].conj();
            }
        }
        Self { entries: e, phi }
    }

    pub fn to_matrix(&self) -> CMatrix<T> {
        CMatrix::from_rows(&self.entries.iter().map(|row| row.to_vec()).collect::<Vec<_>>())
    }

    pub fn is_hermitian(&self) -> bool {
        (0..BLOCK_DIM).all(|r| (0..BLOCK_DIM).all(|c| self.entries[r][c] == self.entries[c][r].conj()))
    }
}

/// Free-function form of [`BlockHamiltonian::new`].
pub fn build_block_hamiltonian<T: Real>(params: &ModelParams<T>, phi: T) -> BlockHamiltonian<T> {
    BlockHamiltonian::new(params, phi)
}

/// Diagonal of the photon-number operator `a†a` on the invariant subspace.
pub fn number_operator_block<T: Real>(params: &ModelParams<T>) -> [T; BLOCK_DIM] {
    let n = T::lit(f64::from(params.n_photon));
    [n, n, n + T::one(), n + T::one()]
}

/// ⟨a†a⟩ for block amplitudes.
pub fn number_expectation<T: Real>(params: &ModelParams<T>, amplitudes: &[Complex<T>; BLOCK_DIM]) -> T {
    number_operator_block(params).iter().zip(amplitudes).fold(T::zero(), |acc, (n, c)| acc + *n * c.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn lambda_n_values() {
        assert_eq!(ModelParams::new(0.0, 0.0, 0.5, 0.0, 0.0, 0).lambda_n(), 0.5);
        assert_eq!(ModelParams::new(0.0, 0.0, 1.0, 0.0, 0.0, 3).lambda_n(), 2.0);
        // 0.7·√2
        let l: f64 = ModelParams::new(0.0, 0.0, 0.7, 0.0, 0.0, 1).lambda_n();
        assert!((l - 0.989_949_493_661_166_6).abs() < 1e-15);
    }

    #[test]
    fn zero_params_give_zero_matrix() {
        let h = BlockHamiltonian::new(&ModelParams::new(0.0, 0.0, 0.0, 0.0, 0.0, 0), 0.0);
        assert!(h.entries.iter().flatten().all(|z| z.is_zero()));
    }

    #[test]
    fn sigma_z_only() {
        let h = BlockHamiltonian::new(&ModelParams::new(1.0, 0.0, 0.0, 0.0, 0.0, 0), 0.0);
        let diag: Vec<f64> = (0..4).map(|i| h.entries[i][i].re).collect();
        assert_eq!(diag, vec![0.5, 0.5, -0.5, -0.5]);
    }

    #[test]
    fn reference_point_entries() {
        let phi = PI / 3.0;
        let h = BlockHamiltonian::new(&ModelParams::reference(), phi);
        let expect = Complex::from_polar(0.35, -phi);
        assert!((h.entries[0][1] - expect).norm() < 1e-15);
        assert!((h.entries[2][3] - expect).norm() < 1e-15);
        assert_eq!(h.entries[0][2], Complex::new(0.5, 0.0));
        assert_eq!(h.entries[1][3], Complex::new(0.5, 0.0));
        assert!((h.entries[0][0].re - 0.8).abs() < 1e-15);
        assert!(h.is_hermitian());
    }

    #[test]
    fn entry_moduli_do_not_depend_on_azimuth() {
        let p = ModelParams::<f64>::reference();
        let a = BlockHamiltonian::new(&p, 0.0);
        let b = BlockHamiltonian::new(&p, 2.3);
        for r in 0..4 {
            for c in 0..4 {
                assert!((a.entries[r][c].norm() - b.entries[r][c].norm()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn number_operator() {
        let mut p = ModelParams::<f64>::reference();
        assert_eq!(number_operator_block(&p), [0.0, 0.0, 1.0, 1.0]);
        p.n_photon = 2;
        assert_eq!(number_operator_block(&p), [2.0, 2.0, 3.0, 3.0]);
        p.n_photon = 1;
        let zero = Complex::zero();
        let state = [zero, zero, Complex::new(1.0, 0.0), zero];
        assert_eq!(number_expectation(&p, &state), 2.0);
    }

    #[test]
    fn rejects_non_finite() {
        let mut p = ModelParams::<f64>::reference();
        p.nu = f64::NAN;
        assert!(matches!(p.validate(), Err(Error::InvalidParams(_))));
    }
}
