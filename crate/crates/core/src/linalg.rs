//! Small dense complex linear algebra: square matrices, inner products and a
//! cyclic Jacobi eigensolver for Hermitian matrices.
//!
//! The matrices in this crate never exceed a few dozen rows, so everything is
//! stored row-major in a flat `Vec` and diagonalized with Jacobi rotations,
//! which keep eigenvectors orthonormal to working precision.

use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![Complex::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex::new(d, T::zero());
        }
        m
    }

    /// Builds a matrix from row slices. Panics if the rows are ragged.
    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            assert_eq!(row.len(), dim, "matrix rows must be square");
            data.extend_from_slice(row);
        }
        Self { dim, data }
    }

    /// Outer product `|v⟩⟨v|`.
    pub fn projector(v: &[Complex<T>]) -> Self {
        let dim = v.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(i, j)] = self[(j, i)].conj();
            }
        }
        m
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    m[(i, j)] += a * other[(k, j)];
                }
            }
        }
        m
    }

    pub fn apply(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                self.data[i * self.dim..(i + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .fold(Complex::zero(), |acc, (&a, &x)| acc + a * x)
            })
            .collect()
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).fold(Complex::zero(), |acc, i| acc + self[(i, i)])
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in 0..=i {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// ⟨v|M|v⟩ for Hermitian `M`, returned as its real part.
    pub fn expectation(&self, v: &[Complex<T>]) -> T {
        inner(v, &self.apply(v)).re
    }

    fn frobenius_sq(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    fn off_diagonal_sq(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j {
                    acc += self[(i, j)].norm_sqr();
                }
            }
        }
        acc
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.dim + j]
    }
}

/// ⟨a|b⟩, antilinear in the first argument.
pub fn inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(Complex::zero(), |acc, (x, y)| acc + x.conj() * y)
}

pub fn norm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T> {
    pub values: Vec<T>,
    /// `vectors[k]` is the normalized eigenvector of `values[k]`.
    pub vectors: Vec<Vec<Complex<T>>>,
}

const MAX_SWEEPS: usize = 64;

/// Diagonalizes a Hermitian matrix with cyclic complex Jacobi rotations.
///
/// Only the Hermitian part of `m` is meaningful; the strictly lower triangle is
/// assumed to be the conjugate of the upper one.
pub fn eigh<T: Real>(m: &CMatrix<T>) -> HermitianEigen<T> {
    let n = m.dim();
    let mut a = m.clone();
    for i in 0..n {
        a[(i, i)].im = T::zero();
    }
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius_sq();
    let threshold = scale * T::epsilon() * T::epsilon();

    for _ in 0..MAX_SWEEPS {
        if a.off_diagonal_sq() <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = order.iter().map(|&k| (0..n).map(|i| v[(i, k)]).collect()).collect();
    HermitianEigen { values, vectors }
}

/// One Jacobi rotation annihilating the `(p, q)` entry.
fn rotate<T: Real>(a: &mut CMatrix<T>, v: &mut CMatrix<T>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == T::zero() {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // A unit phase turns the pivot real; a real rotation then zeroes it.
    let unit = apq / r;
    let two = T::lit(2.0);
    let theta = (two * r).atan2(aqq - app) / two;
    let (s, c) = theta.sin_cos();
    let cs = Complex::new(c, T::zero());
    let ss = Complex::new(s, T::zero());
    let w = unit.conj();
    // U = [[c, s], [-s w, c w]] on the (p, q) plane.
    let upp = cs;
    let upq = ss;
    let uqp = -ss * w;
    let uqq = cs * w;

    let n = a.dim();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * upp + akq * uqp;
        a[(k, q)] = akp * upq + akq * uqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = upp.conj() * apk + uqp.conj() * aqk;
        a[(q, k)] = upq.conj() * apk + uqq.conj() * aqk;
    }
    a[(p, q)] = Complex::zero();
    a[(q, p)] = Complex::zero();
    a[(p, p)].im = T::zero();
    a[(q, q)].im = T::zero();

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * upp + vkq * uqp;
        v[(k, q)] = vkp * upq + vkq * uqq;
    }
}

/// `exp(-i t M)` for Hermitian `M`, through its spectral decomposition.
pub fn unitary_exp<T: Real>(m: &CMatrix<T>, t: T) -> CMatrix<T> {
    let eig = eigh(m);
    let n = m.dim();
    let mut out = CMatrix::zeros(n);
    for (lambda, vec) in eig.values.iter().zip(&eig.vectors) {
        let phase = crate::scalar::cis(-t * *lambda);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += phase * vec[i] * vec[j].conj();
            }
        }
    }
    out
}
