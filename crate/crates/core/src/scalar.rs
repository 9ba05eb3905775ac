//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar the model is computed in: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// A tolerance stated for double precision, floored at a small multiple of
    /// this type's machine epsilon so that single precision stays usable.
    #[inline]
    fn tol(x: f64) -> Self {
        Self::lit(x).max(Self::epsilon() * Self::lit(32.0))
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Reduces an angle into `(-π, π]`.
pub fn wrap_angle<T: Real>(x: T) -> T {
    let two_pi = T::TAU();
    let mut y = x - two_pi * (x / two_pi).round();
    if y <= -T::PI() {
        y += two_pi;
    } else if y > T::PI() {
        y -= two_pi;
    }
    y
}

/// Distance between two angles on the circle, in `[0, π]`.
pub fn angle_distance<T: Real>(a: T, b: T) -> T {
    wrap_angle(a - b).abs()
}

#[inline]
pub(crate) fn cis<T: Real>(angle: T) -> Complex<T> {
    Complex::new(angle.cos(), angle.sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn wrap_lands_in_half_open_interval() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(4.0 * PI)).abs() < 1e-12);
        assert!((wrap_angle(-0.5) + 0.5).abs() < 1e-15);
        assert!((wrap_angle(7.0_f32) - (7.0 - 2.0 * std::f32::consts::PI)).abs() < 1e-6);
    }

    #[test]
    fn f32_tolerances_are_floored() {
        assert_eq!(f64::tol(1e-12), 1e-12);
        assert!(f32::tol(1e-12) > 1e-6);
    }
}
