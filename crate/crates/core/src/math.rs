// Thin wrappers so the rest of the crate reads the same with or without std.

use core::f64::consts::PI;
use num_complex::Complex64;

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}
#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}
#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
#[inline]
pub fn asin(x: f64) -> f64 {
    libm::asin(x)
}
#[inline]
pub fn acos(x: f64) -> f64 {
    libm::acos(x)
}
#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}
#[inline]
pub fn log10(x: f64) -> f64 {
    libm::log10(x)
}
#[inline]
pub fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}
#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}
#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}
#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}
#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

#[inline]
pub fn cis(phase: f64) -> Complex64 {
    let (s, c) = libm::sincos(phase);
    Complex64::new(c, s)
}

/// Reduce an angle to (-pi, pi].
pub fn wrap_pi(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut r = x - two_pi * floor(x / two_pi);
    if r > PI {
        r -= two_pi;
    }
    r
}

#[cfg(test)]
pub fn sinc_pi(x: f64) -> f64 {
    // sin(x)/x with the removable point handled.
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        sin(x) / x
    }
}
