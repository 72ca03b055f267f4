//! Conversions between SI values and the display units used by the CLI (μs, MHz).

use core::f64::consts::PI;

pub const SECONDS_PER_MICROSECOND: f64 = 1e-6;

pub fn us(value: f64) -> f64 {
    value * SECONDS_PER_MICROSECOND
}

pub fn to_us(seconds: f64) -> f64 {
    seconds / SECONDS_PER_MICROSECOND
}

/// Angular frequency (rad/s) of an ordinary frequency given in MHz.
pub fn angular_from_mhz(mhz: f64) -> f64 {
    2.0 * PI * mhz * 1e6
}

/// Ordinary frequency in MHz of an angular frequency in rad/s.
pub fn mhz_from_angular(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e6)
}

/// Angular frequency expressed in rad/μs.
pub fn rad_per_us(omega: f64) -> f64 {
    omega * SECONDS_PER_MICROSECOND
}
