//! Coherent pre-excitation of ground-state modes by a resonant field.
//!
//! A field `E(t) = E0 exp(-i w0 t) + c.c.` coupled to the nuclear dipole
//! `sum_i q_i x_i`, with `x_i = sum_j d_ij (a_j + a_j^dagger)`, acts on the mode
//! resonant with `w0` as the displacement
//! `beta_k = -(i/hbar) sum_i q_i d_ik . E0 (t1 - t0)`. Off-resonant modes are
//! left untouched and the time-ordering phase is dropped.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, SymplecticMap};
use crate::units;

/// Resonant drive of one mode.
#[derive(Clone, Debug, PartialEq)]
pub struct DriveSpec {
    /// Nuclear charges in units of the elementary charge.
    pub charges: Vec<f64>,
    /// `coeffs[atom][mode]`: position expansion vector `d_ij` in metres.
    pub coeffs: Vec<Vec<[f64; 3]>>,
    /// Complex field amplitude `E0` in V/m.
    pub field: [C64; 3],
    /// `t1 - t0` in seconds.
    pub duration: f64,
    /// Resonant mode (0-based).
    pub target_mode: usize,
}

impl DriveSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err(Error::Config(format!(
                "drive duration must be finite and non-negative, got {}",
                self.duration
            )));
        }
        if self.coeffs.len() != self.charges.len() {
            return Err(Error::mismatch("drive coefficient atoms", self.charges.len(), self.coeffs.len()));
        }
        let num_modes = self.coeffs.first().map_or(0, Vec::len);
        if let Some(row) = self.coeffs.iter().find(|r| r.len() != num_modes) {
            return Err(Error::mismatch("drive coefficient modes", num_modes, row.len()));
        }
        if self.target_mode >= num_modes {
            return Err(Error::ModeOutOfRange {
                index: self.target_mode,
                num_modes,
            });
        }
        Ok(())
    }
}

/// Displacement imprinted on the target mode.
pub fn drive_displacement(spec: &DriveSpec) -> Result<C64> {
    spec.validate()?;
    let k = spec.target_mode;
    let coupling: C64 = spec
        .charges
        .iter()
        .zip(&spec.coeffs)
        .map(|(&q, row)| {
            let d = row[k];
            let dot: C64 = (0..3).map(|x| spec.field[x] * d[x]).sum();
            dot * (q * units::ELEMENTARY_CHARGE)
        })
        .sum();
    Ok(-C64::i() * coupling * (spec.duration / units::HBAR))
}

/// Displaces mode `mode` (0-based) by `beta`, leaving the others untouched.
pub fn pre_excite(state: &GaussianState, mode: usize, beta: C64) -> Result<GaussianState> {
    let m = state.num_modes();
    if mode >= m {
        return Err(Error::ModeOutOfRange { index: mode, num_modes: m });
    }
    let mut shift = vec![C64::new(0.0, 0.0); m];
    shift[mode] = beta;
    state.apply(&SymplecticMap::displace(shift)?)
}
