//! Harmonic time evolution in the final-state normal modes followed by a
//! change to a localized-mode basis.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::{unitarity_deviation, CMatrix, GaussianState, SymplecticMap, UNITARITY_TOL};
use crate::sampler::{joint_probability_table, Distribution};
use crate::units;

/// Normal-to-localized basis change `U_l` and the final-state frequencies
/// (cm^-1) that drive the evolution.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalizationMap {
    u_local: CMatrix,
    freq: Vec<f64>,
}

impl LocalizationMap {
    pub fn new(u_local: CMatrix, freq: Vec<f64>) -> Result<Self> {
        let m = freq.len();
        if u_local.shape() != (m, m) {
            return Err(Error::mismatch("localization matrix", m, u_local.nrows()));
        }
        let deviation = unitarity_deviation(&u_local);
        if !(deviation <= UNITARITY_TOL) {
            return Err(Error::NotUnitary {
                what: "localization matrix".into(),
                deviation,
            });
        }
        if let Some((index, &value)) = freq.iter().enumerate().find(|(_, w)| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::NonPositiveFrequency {
                which: "final",
                index,
                value,
            });
        }
        Ok(LocalizationMap { u_local, freq })
    }

    /// Normal modes kept as they are.
    pub fn identity(freq: Vec<f64>) -> Result<Self> {
        let m = freq.len();
        Self::new(CMatrix::identity(m, m), freq)
    }

    pub fn u_local(&self) -> &CMatrix {
        &self.u_local
    }

    pub fn freq(&self) -> &[f64] {
        &self.freq
    }

    pub fn num_modes(&self) -> usize {
        self.freq.len()
    }
}

fn check_time(t_fs: f64) -> Result<()> {
    if !(t_fs >= 0.0 && t_fs.is_finite()) {
        return Err(Error::Config(format!("time must be finite and non-negative, got {t_fs}")));
    }
    Ok(())
}

/// Free evolution `exp(-i H t)` in the normal-mode frame; `a_j` picks up
/// `exp(-i omega_j t)`. The zero-point energy only contributes a global phase.
pub fn propagate_normal_modes(state: &GaussianState, freq: &[f64], t_fs: f64) -> Result<GaussianState> {
    check_time(t_fs)?;
    if freq.len() != state.num_modes() {
        return Err(Error::mismatch("frequencies", state.num_modes(), freq.len()));
    }
    let t = t_fs * units::FEMTOSECOND;
    let theta = freq.iter().map(|&w| units::wavenumber_to_angular(w) * t).collect();
    state.apply(&SymplecticMap::phase(theta)?)
}

/// State at time `t_fs` (femtoseconds), expressed in the localized modes.
pub fn evolve(state: &GaussianState, loc: &LocalizationMap, t_fs: f64) -> Result<GaussianState> {
    if loc.num_modes() != state.num_modes() {
        return Err(Error::mismatch("localization modes", state.num_modes(), loc.num_modes()));
    }
    let evolved = propagate_normal_modes(state, &loc.freq, t_fs)?;
    evolved.apply(&SymplecticMap::rotation(loc.u_local.clone())?)
}

/// Single-mode distribution of localized mode `mode` (0-based) at each time.
pub fn time_series(
    state: &GaussianState,
    loc: &LocalizationMap,
    times_fs: &[f64],
    mode: usize,
    cutoff: usize,
) -> Result<Vec<Distribution>> {
    times_fs
        .par_iter()
        .map(|&t| joint_probability_table(&evolve(state, loc, t)?, &[mode], cutoff))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{displaced_squeezed, CMatrix};
    use crate::sampler::single_mode_marginals;
    use num_complex::Complex64 as C64;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn mixer() -> CMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        CMatrix::from_row_slice(2, 2, &[c(h), c(h), c(h), c(-h)])
    }

    #[test]
    fn zero_time_identity_map_is_identity() {
        let s = displaced_squeezed(&[0.3, 0.1], &[C64::new(0.4, 0.2), c(-0.6)]).unwrap();
        let loc = LocalizationMap::identity(vec![1000.0, 1500.0]).unwrap();
        let out = evolve(&s, &loc, 0.0).unwrap();
        assert!((out.cov() - s.cov()).camax() < 1e-12);
        assert!((out.mean() - s.mean()).camax() < 1e-12);
    }

    #[test]
    fn coherent_distribution_is_stationary() {
        let s = GaussianState::coherent(&[C64::new(0.8, 0.3)]).unwrap();
        let loc = LocalizationMap::identity(vec![1234.0]).unwrap();
        let series = time_series(&s, &loc, &[0.0, 7.0, 33.0, 90.0], 0, 8).unwrap();
        for d in &series {
            for n in 0..=8 {
                assert!((d.probability(&[n]) - series[0].probability(&[n])).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn vacuum_series_is_flat() {
        let v = GaussianState::vacuum(2).unwrap();
        let loc = LocalizationMap::new(mixer(), vec![900.0, 1100.0]).unwrap();
        for d in time_series(&v, &loc, &[0.0, 50.0], 1, 4).unwrap() {
            assert_eq!(d.probability(&[0]), 1.0);
        }
    }

    #[test]
    fn zero_time_matches_static_marginal() {
        let s = displaced_squeezed(&[0.2, 0.4], &[c(0.5), c(0.1)]).unwrap();
        let loc = LocalizationMap::new(mixer(), vec![900.0, 1100.0]).unwrap();
        let series = time_series(&s, &loc, &[0.0], 0, 6).unwrap();
        let direct = single_mode_marginals(&s.apply(&SymplecticMap::rotation(mixer()).unwrap()).unwrap(), 6).unwrap();
        assert_eq!(series[0].probabilities, direct[0].probabilities);
    }

    #[test]
    fn semigroup_in_normal_frame() {
        let s = displaced_squeezed(&[0.3, -0.2], &[C64::new(0.4, 0.2), c(-0.6)]).unwrap();
        let freq = vec![800.0, 1700.0];
        let loc = LocalizationMap::new(mixer(), freq.clone()).unwrap();
        let split = propagate_normal_modes(&propagate_normal_modes(&s, &freq, 13.0).unwrap(), &freq, 29.0).unwrap();
        let split = split.apply(&SymplecticMap::rotation(mixer()).unwrap()).unwrap();
        let once = evolve(&s, &loc, 42.0).unwrap();
        assert!((split.cov() - once.cov()).camax() < 1e-10);
        assert!((split.mean() - once.mean()).camax() < 1e-10);
    }

    #[test]
    fn rejects_bad_input() {
        let bad = CMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(0.0), c(1.0)]);
        assert!(matches!(
            LocalizationMap::new(bad, vec![1.0, 1.0]),
            Err(Error::NotUnitary { .. })
        ));
        let loc = LocalizationMap::identity(vec![1.0, 1.0]).unwrap();
        let v = GaussianState::vacuum(3).unwrap();
        assert!(matches!(evolve(&v, &loc, 1.0), Err(Error::DimensionMismatch { .. })));
        let v = GaussianState::vacuum(2).unwrap();
        assert!(evolve(&v, &loc, -1.0).is_err());
    }
}
