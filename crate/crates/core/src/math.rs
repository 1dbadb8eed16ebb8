//! Float math shim so the crate builds without `std`.
//!
//! With `std` enabled the inherent `f64` methods win method resolution and this
//! module is inert. Without `std`, the extension trait routes the same names
//! through `libm`.

#![allow(dead_code)]

#[cfg(not(feature = "std"))]
pub(crate) trait FloatExt: Sized {
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn asin(self) -> Self;
    fn acos(self) -> Self;
    fn atan(self) -> Self;
    fn atan2(self, other: Self) -> Self;
    fn sqrt(self) -> Self;
    fn hypot(self, other: Self) -> Self;
    fn abs(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn powf(self, e: Self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn floor(self) -> Self;
    fn ceil(self) -> Self;
    fn round(self) -> Self;
    fn signum(self) -> Self;
    fn rem_euclid(self, rhs: Self) -> Self;
    fn copysign(self, sign: Self) -> Self;
    fn sin_cos(self) -> (Self, Self);
    fn to_radians(self) -> Self;
    fn to_degrees(self) -> Self;
}

#[cfg(not(feature = "std"))]
impl FloatExt for f64 {
    fn sin(self) -> f64 {
        libm::sin(self)
    }
    fn cos(self) -> f64 {
        libm::cos(self)
    }
    fn tan(self) -> f64 {
        libm::tan(self)
    }
    fn asin(self) -> f64 {
        libm::asin(self)
    }
    fn acos(self) -> f64 {
        libm::acos(self)
    }
    fn atan(self) -> f64 {
        libm::atan(self)
    }
    fn atan2(self, other: f64) -> f64 {
        libm::atan2(self, other)
    }
    fn sqrt(self) -> f64 {
        libm::sqrt(self)
    }
    fn hypot(self, other: f64) -> f64 {
        libm::hypot(self, other)
    }
    fn abs(self) -> f64 {
        libm::fabs(self)
    }
    fn powi(self, n: i32) -> f64 {
        libm::pow(self, n as f64)
    }
    fn powf(self, e: f64) -> f64 {
        libm::pow(self, e)
    }
    fn exp(self) -> f64 {
        libm::exp(self)
    }
    fn ln(self) -> f64 {
        libm::log(self)
    }
    fn floor(self) -> f64 {
        libm::floor(self)
    }
    fn ceil(self) -> f64 {
        libm::ceil(self)
    }
    fn round(self) -> f64 {
        libm::round(self)
    }
    fn signum(self) -> f64 {
        if self.is_nan() {
            f64::NAN
        } else if self == 0.0 {
            self.copysign(1.0)
        } else {
            1.0f64.copysign(self)
        }
    }
    fn rem_euclid(self, rhs: f64) -> f64 {
        let r = self % rhs;
        if r < 0.0 {
            r + rhs.abs()
        } else {
            r
        }
    }
    fn copysign(self, sign: f64) -> f64 {
        libm::copysign(self, sign)
    }
    fn sin_cos(self) -> (f64, f64) {
        (libm::sin(self), libm::cos(self))
    }
    fn to_radians(self) -> f64 {
        self * (core::f64::consts::PI / 180.0)
    }
    fn to_degrees(self) -> f64 {
        self * (180.0 / core::f64::consts::PI)
    }
}

// Modules that call float methods do `use crate::math::*;`, which is empty
// under `std` and brings `FloatExt` into scope otherwise.
