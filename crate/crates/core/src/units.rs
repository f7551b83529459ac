//! Unit conventions: wavelengths in µm internally (nm at the public edges of
//! the solvers), temperatures in °C, angular frequencies in rad/s.

use std::f64::consts::PI;

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub const FS_PER_S: f64 = 1e15;

#[inline]
pub fn nm_to_um(nm: f64) -> f64 {
    nm / 1000.0
}

#[inline]
pub fn um_to_nm(um: f64) -> f64 {
    um * 1000.0
}

/// Angular frequency (rad/s) of light with vacuum wavelength `nm`.
#[inline]
pub fn omega_from_nm(nm: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / (nm * 1e-9)
}

/// Vacuum wavelength (nm) of light with angular frequency `omega`.
#[inline]
pub fn nm_from_omega(omega: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / omega * 1e9
}
