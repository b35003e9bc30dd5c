//! Physical constants (CODATA 2018, SI) and the conversions used at the
//! boundary between molecular input and the dimensionless state.

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0; // m/s
pub const HBAR: f64 = 1.054_571_817e-34; // J s
pub const AMU: f64 = 1.660_539_066_60e-27; // kg
pub const ANGSTROM: f64 = 1e-10; // m
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19; // C
pub const FEMTOSECOND: f64 = 1e-15; // s

/// Wavenumber in cm^-1 to angular frequency in rad/s.
pub fn wavenumber_to_angular(wavenumber: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT * 100.0 * wavenumber
}

/// Mass-weighted length `sqrt(amu) * Angstrom` to `sqrt(kg) * m`.
pub fn mass_weighted_length_to_si(x: f64) -> f64 {
    x * AMU.sqrt() * ANGSTROM
}
