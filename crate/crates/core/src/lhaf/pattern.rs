use std::sync::OnceLock;

use num_complex::Complex64 as C64;

use super::loop_hafnian_repeated;
use crate::error::{Error, Result};
use crate::gaussian::{CMatrix, CVector, GaussianState};

/// Largest total photon number accepted by [`pattern_probability`].
pub const MAX_TOTAL_PHOTONS: usize = 40;

/// Imaginary residue tolerated before it is discarded.
pub const IMAG_TOL: f64 = 1e-10;
/// Slack allowed above 1 (and below 0) from rounding.
pub const RANGE_TOL: f64 = 1e-9;

fn factorials() -> &'static [f64; MAX_TOTAL_PHOTONS + 1] {
    static TABLE: OnceLock<[f64; MAX_TOTAL_PHOTONS + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        // exact through 22!, then one rounding per step (relative error < 1e-14 at 40!)
        let mut t = [1.0; MAX_TOTAL_PHOTONS + 1];
        for n in 1..=MAX_TOTAL_PHOTONS {
            t[n] = t[n - 1] * n as f64;
        }
        t
    })
}

/// The matrix `A = X (I - Q^-1)` of a state together with the loop weights
/// and the pattern selecting its rows.
#[derive(Clone, Debug)]
pub struct PatternMatrix {
    pub a: CMatrix,
    pub gamma: CVector,
    pub pattern: Vec<usize>,
}

impl PatternMatrix {
    /// Row indices of the pattern submatrix: mode `i` repeated `m_i` times,
    /// then `i + M` repeated `m_i` times.
    pub fn indices(&self) -> Vec<usize> {
        let m = self.pattern.len();
        let mut idx: Vec<usize> = self
            .pattern
            .iter()
            .enumerate()
            .flat_map(|(i, &k)| std::iter::repeat_n(i, k))
            .collect();
        let conj: Vec<usize> = idx.iter().map(|i| i + m).collect();
        idx.extend(conj);
        idx
    }

    /// Explicit `2N x 2N` submatrix, `N = sum m_i`, with loop weights on the
    /// diagonal.
    pub fn expand(&self) -> CMatrix {
        let idx = self.indices();
        let n = idx.len();
        CMatrix::from_fn(n, n, |r, c| {
            if r == c {
                self.gamma[idx[r]]
            } else {
                self.a[(idx[r], idx[c])]
            }
        })
    }
}

/// Per-state quantities shared by every pattern: `A`, the loop vector and
/// the scalar prefactor. `Q` is factored once (Cholesky), which yields both
/// `det Q` and `Q^-1`.
#[derive(Clone, Debug)]
pub struct PreparedState {
    num_modes: usize,
    a: CMatrix,
    gamma: CVector,
    prefactor: f64,
}

impl PreparedState {
    pub fn new(state: &GaussianState) -> Result<Self> {
        let m = state.num_modes();
        let chol = state.q_matrix().cholesky().ok_or(Error::UnphysicalState)?;
        let det_q: f64 = chol.l_dirty().diagonal().iter().map(|z| z.norm_sqr()).product();
        let q_inv = chol.inverse();
        let alpha = state.extended_mean();

        let n = 2 * m;
        let mut a = -q_inv.clone();
        for i in 0..n {
            a[(i, i)] += 1.0;
        }
        // left multiplication by X swaps the two halves of the rows
        let a = CMatrix::from_fn(n, n, |i, j| a[((i + m) % n, j)]);
        let gamma = (&q_inv * &alpha).map(|z| z.conj());
        let quad = alpha.dotc(&(&q_inv * &alpha)).re;
        let prefactor = (-0.5 * quad).exp() / det_q.sqrt();
        Ok(PreparedState {
            num_modes: m,
            a,
            gamma,
            prefactor,
        })
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    /// `exp(-alpha'^dagger Q^-1 alpha' / 2) / sqrt(det Q)`, the vacuum probability.
    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    pub fn gamma(&self) -> &CVector {
        &self.gamma
    }

    fn check_pattern(&self, pattern: &[usize]) -> Result<()> {
        if pattern.len() != self.num_modes {
            return Err(Error::mismatch("pattern length", self.num_modes, pattern.len()));
        }
        let total: usize = pattern.iter().sum();
        if total > MAX_TOTAL_PHOTONS {
            return Err(Error::PatternTooLarge {
                total,
                max: MAX_TOTAL_PHOTONS,
            });
        }
        Ok(())
    }

    pub fn pattern_matrix(&self, pattern: &[usize]) -> Result<PatternMatrix> {
        self.check_pattern(pattern)?;
        Ok(PatternMatrix {
            a: self.a.clone(),
            gamma: self.gamma.clone(),
            pattern: pattern.to_vec(),
        })
    }

    /// Probability of observing `pattern` (one count per mode).
    pub fn probability(&self, pattern: &[usize]) -> Result<f64> {
        self.check_pattern(pattern)?;
        let gamma: Vec<C64> = self.gamma.iter().copied().collect();
        let lhaf = loop_hafnian_repeated(&self.a, &gamma, pattern);
        let fact = factorials();
        let denom: f64 = pattern.iter().map(|&k| fact[k]).product();
        let value = lhaf * (self.prefactor / denom);
        if value.im.abs() > IMAG_TOL {
            return Err(Error::ImaginaryResidue {
                residue: value.im.abs(),
            });
        }
        if !(-RANGE_TOL..=1.0 + RANGE_TOL).contains(&value.re) {
            return Err(Error::ProbabilityOutOfRange { value: value.re });
        }
        Ok(value.re)
    }
}

/// Expanded pattern submatrix of `state` for `pattern`.
pub fn build_pattern_matrix(state: &GaussianState, pattern: &[usize]) -> Result<CMatrix> {
    Ok(PreparedState::new(state)?.pattern_matrix(pattern)?.expand())
}

/// Probability of observing `pattern` on `state`.
///
/// Prepares the state on every call; hold a [`PreparedState`] when
/// evaluating many patterns of the same state.
pub fn pattern_probability(state: &GaussianState, pattern: &[usize]) -> Result<f64> {
    PreparedState::new(state)?.probability(pattern)
}
