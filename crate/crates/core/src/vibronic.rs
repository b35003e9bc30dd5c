//! From molecular normal modes to the parameters of the Doktorov operator.
//!
//! Normal coordinates of the two electronic states are related by
//! `q' = U_D q + d` with `U_D = L_f^T L_i` and
//! `d = L_f^T m^(1/2) (x_i - x_f)`. With `Omega = diag(sqrt(omega))` the
//! matrix `J = Omega' U_D Omega^-1` is decomposed as `U_L diag(sigma) U_R`
//! and the displacement is `beta = Omega' d / sqrt(2 hbar)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::units;

/// Orthonormality tolerance for mass-weighted normal-mode columns.
pub const ORTHONORMAL_TOL: f64 = 1e-6;
/// Orthogonality tolerance for `U_L`, `U_R`.
pub const ORTHOGONAL_TOL: f64 = 1e-8;

/// Normal-mode data of the initial and final electronic states.
///
/// Units: masses in amu, geometries in Angstrom (length `3N`, atom-major
/// `x1 y1 z1 x2 ...`), mode matrices `3N x M` mass-weighted and
/// orthonormal, frequencies in cm^-1.
#[derive(Clone, Debug, PartialEq)]
pub struct MoleculeData {
    pub masses: Vec<f64>,
    pub geom_initial: Vec<f64>,
    pub geom_final: Vec<f64>,
    pub modes_initial: DMatrix<f64>,
    pub modes_final: DMatrix<f64>,
    pub freq_initial: Vec<f64>,
    pub freq_final: Vec<f64>,
}

/// Duschinsky-level description of a transition: `U_D` (`M x M`), `d` in
/// `sqrt(amu) * Angstrom`, and frequencies in cm^-1.
#[derive(Clone, Debug, PartialEq)]
pub struct DuschinskyData {
    pub duschinsky: DMatrix<f64>,
    pub displacement: DVector<f64>,
    pub freq_initial: Vec<f64>,
    pub freq_final: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DoktorovParams {
    pub u_left: DMatrix<f64>,
    /// Singular values, descending.
    pub sigma: Vec<f64>,
    pub u_right: DMatrix<f64>,
    /// Dimensionless displacement.
    pub beta: Vec<f64>,
    /// Final-state frequencies (cm^-1), kept for time evolution.
    pub freq_final: Vec<f64>,
}

impl DoktorovParams {
    /// The do-nothing transition on `m` modes with the given frequencies.
    pub fn identity(freq_final: Vec<f64>) -> Self {
        let m = freq_final.len();
        DoktorovParams {
            u_left: DMatrix::identity(m, m),
            sigma: vec![1.0; m],
            u_right: DMatrix::identity(m, m),
            beta: vec![0.0; m],
            freq_final,
        }
    }

    pub fn num_modes(&self) -> usize {
        self.sigma.len()
    }

    /// `U_L diag(sigma) U_R`.
    pub fn reconstruct_j(&self) -> DMatrix<f64> {
        &self.u_left * DMatrix::from_diagonal(&DVector::from_vec(self.sigma.clone())) * &self.u_right
    }

    /// Checks shapes, orthogonality of the rotations and positivity of `sigma`.
    pub fn validate(&self) -> Result<()> {
        let m = self.sigma.len();
        if m == 0 {
            return Err(Error::ZeroModes);
        }
        for (what, u) in [("U_L", &self.u_left), ("U_R", &self.u_right)] {
            if u.shape() != (m, m) {
                return Err(Error::mismatch(what, m, u.nrows()));
            }
            let deviation = orthogonality_deviation(u);
            if !(deviation <= ORTHOGONAL_TOL) {
                return Err(Error::NotUnitary {
                    what: what.into(),
                    deviation,
                });
            }
        }
        if self.beta.len() != m {
            return Err(Error::mismatch("beta", m, self.beta.len()));
        }
        if self.freq_final.len() != m {
            return Err(Error::mismatch("freq_final", m, self.freq_final.len()));
        }
        check_frequencies("final", &self.freq_final)?;
        if let Some(&s) = self.sigma.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::Config(format!("singular values must be positive, got {s}")));
        }
        if self.beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite {
                what: "beta".into(),
            });
        }
        Ok(())
    }
}

fn orthogonality_deviation(u: &DMatrix<f64>) -> f64 {
    let n = u.nrows();
    (u * u.transpose() - DMatrix::identity(n, n)).amax()
}

fn check_frequencies(which: &'static str, freq: &[f64]) -> Result<()> {
    for (index, &value) in freq.iter().enumerate() {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::NonPositiveFrequency {
                which,
                index,
                value,
            });
        }
    }
    Ok(())
}

impl MoleculeData {
    pub fn num_atoms(&self) -> usize {
        self.masses.len()
    }

    pub fn num_modes(&self) -> usize {
        self.freq_initial.len()
    }

    fn check_shapes(&self) -> Result<()> {
        let n3 = 3 * self.num_atoms();
        let m = self.num_modes();
        if self.geom_initial.len() != n3 {
            return Err(Error::mismatch("geom_initial", n3, self.geom_initial.len()));
        }
        if self.geom_final.len() != n3 {
            return Err(Error::mismatch("geom_final", n3, self.geom_final.len()));
        }
        if self.freq_final.len() != m {
            return Err(Error::mismatch("freq_final", m, self.freq_final.len()));
        }
        for (what, l) in [("modes_initial", &self.modes_initial), ("modes_final", &self.modes_final)] {
            if l.nrows() != n3 {
                return Err(Error::mismatch(format!("{what} rows"), n3, l.nrows()));
            }
            if l.ncols() != m {
                return Err(Error::mismatch(format!("{what} columns"), m, l.ncols()));
            }
        }
        for (atom, &mass) in self.masses.iter().enumerate() {
            if !(mass > 0.0 && mass.is_finite()) {
                return Err(Error::NonPositiveMass { atom, mass });
            }
        }
        Ok(())
    }

    /// Full validation: shapes, masses, `M <= 3N - 5`, positive frequencies
    /// and orthonormal mode columns.
    pub fn validate(&self) -> Result<()> {
        self.check_shapes()?;
        let m = self.num_modes();
        if m == 0 {
            return Err(Error::ZeroModes);
        }
        let max = 3 * self.num_atoms() as i64 - 5;
        if m as i64 > max {
            return Err(Error::TooManyModes {
                num_modes: m,
                atoms: self.num_atoms(),
                max,
            });
        }
        check_frequencies("initial", &self.freq_initial)?;
        check_frequencies("final", &self.freq_final)?;
        for (which, l) in [("initial", &self.modes_initial), ("final", &self.modes_final)] {
            let deviation = (l.transpose() * l - DMatrix::identity(m, m)).amax();
            if !(deviation <= ORTHONORMAL_TOL) {
                return Err(Error::ModesNotOrthonormal { which, deviation });
            }
        }
        Ok(())
    }

    /// Reduces the molecule to its Duschinsky-level description.
    pub fn to_duschinsky(&self) -> Result<DuschinskyData> {
        self.validate()?;
        Ok(DuschinskyData {
            duschinsky: duschinsky(self)?,
            displacement: displacement_vector(self)?,
            freq_initial: self.freq_initial.clone(),
            freq_final: self.freq_final.clone(),
        })
    }
}

/// `U_D = L_f^T L_i`.
pub fn duschinsky(mol: &MoleculeData) -> Result<DMatrix<f64>> {
    let (li, lf) = (&mol.modes_initial, &mol.modes_final);
    if li.shape() != lf.shape() {
        return Err(Error::mismatch("mode matrix rows", lf.nrows(), li.nrows()));
    }
    Ok(lf.transpose() * li)
}

/// `d = L_f^T m^(1/2) (x_i - x_f)` in `sqrt(amu) * Angstrom`.
pub fn displacement_vector(mol: &MoleculeData) -> Result<DVector<f64>> {
    mol.check_shapes()?;
    let shift = DVector::from_iterator(
        mol.geom_initial.len(),
        mol.geom_initial
            .iter()
            .zip(&mol.geom_final)
            .enumerate()
            .map(|(k, (xi, xf))| mol.masses[k / 3].sqrt() * (xi - xf)),
    );
    Ok(mol.modes_final.transpose() * shift)
}

/// Doktorov parameters of a full molecular description.
pub fn doktorov_params(mol: &MoleculeData) -> Result<DoktorovParams> {
    doktorov_from_duschinsky(&mol.to_duschinsky()?)
}

/// Doktorov parameters from `U_D`, `d` and the two frequency sets.
pub fn doktorov_from_duschinsky(data: &DuschinskyData) -> Result<DoktorovParams> {
    let m = data.freq_initial.len();
    if m == 0 {
        return Err(Error::ZeroModes);
    }
    if data.freq_final.len() != m {
        return Err(Error::mismatch("freq_final", m, data.freq_final.len()));
    }
    if data.duschinsky.shape() != (m, m) {
        return Err(Error::mismatch("Duschinsky matrix", m, data.duschinsky.nrows()));
    }
    if data.displacement.len() != m {
        return Err(Error::mismatch("displacement", m, data.displacement.len()));
    }
    check_frequencies("initial", &data.freq_initial)?;
    check_frequencies("final", &data.freq_final)?;

    // Frequency ratios are unit-free, so J can stay in cm^-1.
    let j = DMatrix::from_fn(m, m, |r, c| {
        data.freq_final[r].sqrt() * data.duschinsky[(r, c)] / data.freq_initial[c].sqrt()
    });
    let (u_left, sigma, u_right) = ordered_svd(&j)?;

    let beta = data
        .freq_final
        .iter()
        .zip(data.displacement.iter())
        .map(|(&w, &d)| {
            let omega = units::wavenumber_to_angular(w);
            omega.sqrt() * units::mass_weighted_length_to_si(d) / (2.0 * units::HBAR).sqrt()
        })
        .collect();

    Ok(DoktorovParams {
        u_left,
        sigma,
        u_right,
        beta,
        freq_final: data.freq_final.clone(),
    })
}

/// `J = U diag(s) W^T` with `s` descending, each column of `U` having its
/// first largest-magnitude entry positive; returns `(U, s, W^T)`.
pub fn ordered_svd(j: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let m = j.nrows();
    let svd = j.clone().try_svd(true, true, f64::EPSILON, 10_000).ok_or(Error::SvdFailed)?;
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::SvdFailed),
    };
    let s = svd.singular_values;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));

    let mut u_left = DMatrix::zeros(m, m);
    let mut u_right = DMatrix::zeros(m, m);
    let mut sigma = Vec::with_capacity(m);
    for (k, &src) in order.iter().enumerate() {
        let col = u.column(src);
        let pivot = (0..m).fold(0, |best, i| {
            if col[i].abs() > col[best].abs() + 1e-12 {
                i
            } else {
                best
            }
        });
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        u_left.set_column(k, &(col * sign));
        u_right.set_row(k, &(vt.row(src) * sign));
        sigma.push(s[src]);
    }
    Ok((u_left, sigma, u_right))
}
