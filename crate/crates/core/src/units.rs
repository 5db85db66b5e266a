//! Unit conversions. Linear frequencies in MHz map to angular frequencies in
//! rad/µs by a factor 2π, which keeps products with times in µs
//! dimensionless.

use std::f64::consts::PI;

pub const TWO_PI: f64 = 2.0 * PI;

/// Linear frequency in MHz to angular frequency in rad/µs.
#[inline]
pub fn angular(mhz: f64) -> f64 {
    TWO_PI * mhz
}

#[inline]
pub fn linear(rad_per_us: f64) -> f64 {
    rad_per_us / TWO_PI
}

#[inline]
pub fn ghz_to_mhz(ghz: f64) -> f64 {
    ghz * 1e3
}

#[inline]
pub fn us_to_ns(us: f64) -> f64 {
    us * 1e3
}

#[inline]
pub fn ns_to_us(ns: f64) -> f64 {
    ns * 1e-3
}

/// Rabi amplitude scale factor for a power change in dB (amplitude ∝ √P).
#[inline]
pub fn db_amplitude_factor(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}
