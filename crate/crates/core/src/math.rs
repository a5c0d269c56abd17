//! Float intrinsics that `core` does not provide.
//!
//! The crate builds without `std` (enable the `libm` feature instead); this
//! shim routes the handful of transcendental functions either to the inherent
//! `std` methods or to `libm`. Call sites use the ordinary method syntax in
//! both modes.

#![allow(dead_code)]

pub(crate) trait FloatShim {
    fn sqrt(self) -> f64;
    fn powf(self, p: f64) -> f64;
    fn powi(self, p: i32) -> f64;
    fn exp(self) -> f64;
    fn ln(self) -> f64;
    fn sin(self) -> f64;
    fn cos(self) -> f64;
    fn floor(self) -> f64;
    fn ceil(self) -> f64;
    fn round(self) -> f64;
}

#[cfg(feature = "std")]
impl FloatShim for f64 {
    fn sqrt(self) -> f64 {
        f64::sqrt(self)
    }
    fn powf(self, p: f64) -> f64 {
        f64::powf(self, p)
    }
    fn powi(self, p: i32) -> f64 {
        f64::powi(self, p)
    }
    fn exp(self) -> f64 {
        f64::exp(self)
    }
    fn ln(self) -> f64 {
        f64::ln(self)
    }
    fn sin(self) -> f64 {
        f64::sin(self)
    }
    fn cos(self) -> f64 {
        f64::cos(self)
    }
    fn floor(self) -> f64 {
        f64::floor(self)
    }
    fn ceil(self) -> f64 {
        f64::ceil(self)
    }
    fn round(self) -> f64 {
        f64::round(self)
    }
}

#[cfg(not(feature = "std"))]
impl FloatShim for f64 {
    fn sqrt(self) -> f64 {
        libm::sqrt(self)
    }
    fn powf(self, p: f64) -> f64 {
        libm::pow(self, p)
    }
    fn powi(self, p: i32) -> f64 {
        libm::pow(self, p as f64)
    }
    fn exp(self) -> f64 {
        libm::exp(self)
    }
    fn ln(self) -> f64 {
        libm::log(self)
    }
    fn sin(self) -> f64 {
        libm::sin(self)
    }
    fn cos(self) -> f64 {
        libm::cos(self)
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
}
