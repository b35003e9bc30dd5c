//! Gaussian states in the complex (ladder-operator) representation and the
//! symplectic maps acting on them.
//!
//! A state of `M` modes is a mean vector `alpha_j = <a_j>` together with the
//! `2M x 2M` covariance `V_ij = <{d xi_i, d xi_j^dagger}>/2` of the operator
//! vector `xi = (a_1 .. a_M, a_1^dagger .. a_M^dagger)`. The vacuum has
//! `V = I/2`. All maps are applied in the Heisenberg picture: a unitary `U`
//! with `U^dagger xi U = S xi + c` sends `<xi> -> S <xi> + c` and
//! `V -> S V S^dagger`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::vibronic::DoktorovParams;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Tolerance for unitarity of user-supplied interferometers.
pub const UNITARITY_TOL: f64 = 1e-8;
/// Tolerance for the Hermitian / block-conjugate structure of `V`.
pub const STRUCTURE_TOL: f64 = 1e-10;

const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState {
    mean: CVector,
    cov: CMatrix,
}

impl GaussianState {
    /// Builds a state from a mean vector and covariance, checking the
    /// Hermitian and block-conjugate structure and the uncertainty relation
    /// `V + Z/2 >= 0` with `Z = diag(I, -I)`.
    pub fn new(mean: CVector, cov: CMatrix) -> Result<Self> {
        let m = mean.len();
        if m == 0 {
            return Err(Error::ZeroModes);
        }
        if cov.nrows() != 2 * m || cov.ncols() != 2 * m {
            return Err(Error::mismatch("covariance size", 2 * m, cov.nrows()));
        }
        if mean.iter().chain(cov.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite {
                what: "state entries".into(),
            });
        }
        let state = GaussianState { mean, cov };
        let deviation = state.structure_deviation();
        let scale = state.cov.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if deviation > STRUCTURE_TOL * scale {
            return Err(Error::InvalidCovariance { deviation });
        }
        let mut shifted = state.cov.clone();
        for j in 0..2 * m {
            shifted[(j, j)] += if j < m { 0.5 } else { -0.5 };
        }
        let shifted = (&shifted + shifted.adjoint()).scale(0.5);
        let lowest = shifted.symmetric_eigenvalues().min();
        if lowest < -STRUCTURE_TOL * scale || state.q_matrix().cholesky().is_none() {
            return Err(Error::UnphysicalState);
        }
        Ok(state)
    }

    pub fn vacuum(num_modes: usize) -> Result<Self> {
        if num_modes == 0 {
            return Err(Error::ZeroModes);
        }
        Ok(GaussianState {
            mean: CVector::zeros(num_modes),
            cov: CMatrix::identity(2 * num_modes, 2 * num_modes).scale(0.5),
        })
    }

    /// Product of coherent states with the given amplitudes.
    pub fn coherent(amplitudes: &[C64]) -> Result<Self> {
        let vac = Self::vacuum(amplitudes.len())?;
        Ok(GaussianState {
            mean: CVector::from_column_slice(amplitudes),
            cov: vac.cov,
        })
    }

    pub fn num_modes(&self) -> usize {
        self.mean.len()
    }

    /// Complex amplitudes `<a_j>`.
    pub fn mean(&self) -> &CVector {
        &self.mean
    }

    pub fn cov(&self) -> &CMatrix {
        &self.cov
    }

    /// `Q = V + I/2`, the covariance of the Husimi function.
    pub fn q_matrix(&self) -> CMatrix {
        let n = self.cov.nrows();
        &self.cov + CMatrix::identity(n, n).scale(0.5)
    }

    /// Extended mean `(alpha, alpha*)`.
    pub fn extended_mean(&self) -> CVector {
        let m = self.num_modes();
        CVector::from_fn(2 * m, |i, _| {
            if i < m {
                self.mean[i]
            } else {
                self.mean[i - m].conj()
            }
        })
    }

    /// Largest deviation from `V = V^dagger` and `V = X V* X`.
    pub fn structure_deviation(&self) -> f64 {
        let m = self.num_modes();
        let n = 2 * m;
        let swap = |i: usize| if i < m { i + m } else { i - m };
        let mut dev = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let v = self.cov[(i, j)];
                dev = dev.max((v - self.cov[(j, i)].conj()).norm());
                dev = dev.max((v - self.cov[(swap(i), swap(j))].conj()).norm());
            }
        }
        dev
    }

    /// `<a_j^dagger a_j>` for every mode.
    pub fn mean_photon_numbers(&self) -> Vec<f64> {
        (0..self.num_modes())
            .map(|j| self.cov[(j, j)].re - 0.5 + self.mean[j].norm_sqr())
            .collect()
    }

    pub fn total_mean_photons(&self) -> f64 {
        self.mean_photon_numbers().iter().sum()
    }

    /// Restricts the state to `modes` (0-based, in the given order).
    pub fn reduce(&self, modes: &[usize]) -> Result<Self> {
        let m = self.num_modes();
        check_mode_set(modes, m)?;
        let k = modes.len();
        let rows: Vec<usize> = modes.iter().copied().chain(modes.iter().map(|&i| i + m)).collect();
        let cov = CMatrix::from_fn(2 * k, 2 * k, |i, j| self.cov[(rows[i], rows[j])]);
        let mean = CVector::from_fn(k, |i, _| self.mean[modes[i]]);
        Ok(GaussianState { mean, cov })
    }

    pub fn apply(&self, map: &SymplecticMap) -> Result<Self> {
        apply(self, map)
    }
}

pub(crate) fn check_mode_set(modes: &[usize], num_modes: usize) -> Result<()> {
    if modes.is_empty() {
        return Err(Error::ZeroModes);
    }
    let mut seen = vec![false; num_modes];
    for &i in modes {
        if i >= num_modes {
            return Err(Error::ModeOutOfRange { index: i, num_modes });
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::DuplicateMode { index: i });
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub enum MapKind {
    /// Passive interferometer `a -> U a`.
    Rotation(CMatrix),
    /// Single-mode squeezers `a_j -> cosh(r_j) a_j - sinh(r_j) a_j^dagger`.
    Squeeze(Vec<f64>),
    /// Displacement `a -> a + beta`.
    Displace(Vec<C64>),
    /// Free phase evolution `a_j -> exp(-i theta_j) a_j`.
    Phase(Vec<f64>),
}

/// A Gaussian unitary, validated on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticMap(MapKind);

impl SymplecticMap {
    pub fn rotation(u: CMatrix) -> Result<Self> {
        if u.nrows() != u.ncols() {
            return Err(Error::NotSquare {
                rows: u.nrows(),
                cols: u.ncols(),
            });
        }
        let deviation = unitarity_deviation(&u);
        if !(deviation <= UNITARITY_TOL) {
            return Err(Error::NotUnitary {
                what: "rotation".into(),
                deviation,
            });
        }
        Ok(SymplecticMap(MapKind::Rotation(u)))
    }

    pub fn real_rotation(u: &DMatrix<f64>) -> Result<Self> {
        Self::rotation(u.map(|x| C64::new(x, 0.0)))
    }

    pub fn squeeze(r: Vec<f64>) -> Result<Self> {
        if r.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                what: "squeezing parameters".into(),
            });
        }
        Ok(SymplecticMap(MapKind::Squeeze(r)))
    }

    pub fn displace(beta: Vec<C64>) -> Result<Self> {
        if beta.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite {
                what: "displacement".into(),
            });
        }
        Ok(SymplecticMap(MapKind::Displace(beta)))
    }

    pub fn phase(theta: Vec<f64>) -> Result<Self> {
        if theta.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                what: "phases".into(),
            });
        }
        Ok(SymplecticMap(MapKind::Phase(theta)))
    }

    pub fn kind(&self) -> &MapKind {
        &self.0
    }

    pub fn num_modes(&self) -> usize {
        match &self.0 {
            MapKind::Rotation(u) => u.nrows(),
            MapKind::Squeeze(r) => r.len(),
            MapKind::Displace(b) => b.len(),
            MapKind::Phase(t) => t.len(),
        }
    }
}

pub(crate) fn unitarity_deviation(u: &CMatrix) -> f64 {
    let n = u.nrows();
    (u * u.adjoint() - CMatrix::identity(n, n)).camax()
}

/// `blockdiag(U, U*)`.
fn passive_symplectic(u: &CMatrix) -> CMatrix {
    let m = u.nrows();
    let mut s = CMatrix::zeros(2 * m, 2 * m);
    s.view_mut((0, 0), (m, m)).copy_from(u);
    s.view_mut((m, m), (m, m)).copy_from(&u.map(|z| z.conj()));
    s
}

fn transform(state: &GaussianState, s: &CMatrix) -> GaussianState {
    let m = state.num_modes();
    let ext = s * state.extended_mean();
    GaussianState {
        mean: ext.rows(0, m).into_owned(),
        cov: s * &state.cov * s.adjoint(),
    }
}

/// Heisenberg action of `map` on `state`.
pub fn apply(state: &GaussianState, map: &SymplecticMap) -> Result<GaussianState> {
    let m = state.num_modes();
    if map.num_modes() != m {
        return Err(Error::mismatch("map modes", m, map.num_modes()));
    }
    Ok(match map.kind() {
        MapKind::Rotation(u) => transform(state, &passive_symplectic(u)),
        MapKind::Phase(theta) => {
            let u = CMatrix::from_diagonal(&CVector::from_iterator(
                m,
                theta.iter().map(|&t| C64::from_polar(1.0, -t)),
            ));
            transform(state, &passive_symplectic(&u))
        }
        MapKind::Squeeze(r) => {
            let mut s = CMatrix::zeros(2 * m, 2 * m);
            for (j, &rj) in r.iter().enumerate() {
                let (c, sh) = (ONE * rj.cosh(), ONE * rj.sinh());
                s[(j, j)] = c;
                s[(j + m, j + m)] = c;
                s[(j, j + m)] = -sh;
                s[(j + m, j)] = -sh;
            }
            transform(state, &s)
        }
        MapKind::Displace(beta) => {
            let mut out = state.clone();
            for (a, b) in out.mean.iter_mut().zip(beta) {
                *a += b;
            }
            out
        }
    })
}

/// Prepares `U_Dok |state>` with `U_Dok = D(beta) R(U_L) S R(U_R)`.
///
/// The squeezer realizes `a -> cosh(ln s) a + sinh(ln s) a^dagger`, i.e. the
/// standard squeeze with parameter `r = -ln s`; this is the orientation in
/// which a narrower final-state oscillator (`s > 1`) sees the initial ground
/// state as stretched along the displacement direction.
pub fn apply_doktorov(state: &GaussianState, params: &DoktorovParams) -> Result<GaussianState> {
    let m = state.num_modes();
    if params.num_modes() != m {
        return Err(Error::mismatch("Doktorov modes", m, params.num_modes()));
    }
    let r: Vec<f64> = params.sigma.iter().map(|s| -s.ln()).collect();
    let beta: Vec<C64> = params.beta.iter().map(|&b| C64::new(b, 0.0)).collect();
    let s = state.apply(&SymplecticMap::real_rotation(&params.u_right)?)?;
    let s = s.apply(&SymplecticMap::squeeze(r)?)?;
    let s = s.apply(&SymplecticMap::real_rotation(&params.u_left)?)?;
    s.apply(&SymplecticMap::displace(beta)?)
}

/// Shorthand for real squeezing and complex displacement of a vacuum, mostly
/// handy in tests and examples.
pub fn displaced_squeezed(r: &[f64], beta: &[C64]) -> Result<GaussianState> {
    let s = GaussianState::vacuum(r.len())?.apply(&SymplecticMap::squeeze(r.to_vec())?)?;
    s.apply(&SymplecticMap::displace(beta.to_vec())?)
}

/// Two-mode squeezed vacuum with `<n_1> = <n_2> = sinh^2 r`.
pub fn two_mode_squeezed_vacuum(r: f64) -> Result<GaussianState> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bs = CMatrix::from_row_slice(2, 2, &[ONE * h, ONE * h, ONE * h, -ONE * h]);
    GaussianState::vacuum(2)?
        .apply(&SymplecticMap::squeeze(vec![r, -r])?)?
        .apply(&SymplecticMap::rotation(bs)?)
}
