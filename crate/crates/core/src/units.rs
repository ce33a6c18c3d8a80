//! Unit conversions. Internally every rate and detuning is an angular
//! frequency in rad/s; everything crossing an I/O boundary is in Hz.

use core::f64::consts::PI;

pub const TWO_PI: f64 = 2.0 * PI;

/// Hz → rad/s.
#[inline]
pub fn hz_to_rad(f: f64) -> f64 {
    TWO_PI * f
}

/// rad/s → Hz.
#[inline]
pub fn rad_to_hz(w: f64) -> f64 {
    w / TWO_PI
}

/// `2π × value_mhz × 10⁶`, the form rates are usually quoted in.
#[inline]
pub fn two_pi_mhz(value_mhz: f64) -> f64 {
    hz_to_rad(value_mhz * 1e6)
}

/// Total excited-state decay rate of the NV zero-phonon transition, rad/s.
pub const NV_GAMMA_TOTAL: f64 = TWO_PI * 13.4e6;
