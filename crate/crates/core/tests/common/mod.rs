//! Independent oracles shared by the integration tests and the acceptance
//! suite. Nothing here calls into the crate's numerics.
#![allow(dead_code)]

use nalgebra::DMatrix;
use vibex::{MoleculeData, Complex64 as C64};

// CODATA 2018, written out again on purpose
const C_LIGHT: f64 = 299_792_458.0;
const HBAR: f64 = 1.054_571_817e-34;
const AMU: f64 = 1.660_539_066_60e-27;
const ANGSTROM: f64 = 1e-10;

/// Converts `sqrt(amu) * Angstrom` to a length `q` such that an oscillator of
/// wavenumber `w` (cm^-1) has ground state `exp(-w q^2 / 2)`.
pub fn scaled_length(d: f64) -> f64 {
    d * AMU.sqrt() * ANGSTROM * (2.0 * std::f64::consts::PI * C_LIGHT * 100.0 / HBAR).sqrt()
}

/// Normalized Hermite functions `phi_0..phi_nmax` at `x`.
pub fn hermite_functions(nmax: usize, x: f64) -> Vec<f64> {
    let mut phi = vec![0.0; nmax + 1];
    phi[0] = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    if nmax >= 1 {
        phi[1] = std::f64::consts::SQRT_2 * x * phi[0];
    }
    for n in 1..nmax {
        let k = n as f64;
        phi[n + 1] = (2.0 / (k + 1.0)).sqrt() * x * phi[n] - (k / (k + 1.0)).sqrt() * phi[n - 1];
    }
    phi
}

/// `|<n'|0>|^2` for a 1D oscillator of wavenumber `w` relaxing to one of
/// wavenumber `wp` whose minimum sits `shift` (sqrt(amu) Angstrom) away, by
/// trapezoidal quadrature.
pub fn franck_condon_1d(w: f64, wp: f64, shift: f64, nmax: usize) -> Vec<f64> {
    let s = scaled_length(shift);
    // integrate in y = sqrt(wp) q
    let (lo, hi, steps) = (-14.0, 14.0, 4000);
    let h = (hi - lo) / steps as f64;
    let mut amp = vec![0.0; nmax + 1];
    for k in 0..=steps {
        let y = lo + h * k as f64;
        let q = y / wp.sqrt() - s;
        let ground = (w / std::f64::consts::PI).powf(0.25) * (-0.5 * w * q * q).exp();
        let weight = if k == 0 || k == steps { 0.5 } else { 1.0 } * h * wp.powf(-0.25);
        for (a, phi) in amp.iter_mut().zip(hermite_functions(nmax, y)) {
            *a += weight * phi * ground;
        }
    }
    amp.iter().map(|a| a * a).collect()
}

/// 2D Duschinsky overlap `|<n1 n2|0>|^2`, with `q_f = U_D q_i + d`.
pub fn franck_condon_2d(
    w: [f64; 2],
    wp: [f64; 2],
    ud: &DMatrix<f64>,
    d: [f64; 2],
    nmax: usize,
) -> DMatrix<f64> {
    let ds = [scaled_length(d[0]), scaled_length(d[1])];
    let (lo, hi, steps) = (-11.0, 11.0, 440);
    let h = (hi - lo) / steps as f64;
    let grid: Vec<(f64, Vec<f64>)> = (0..=steps)
        .map(|k| {
            let y = lo + h * k as f64;
            (y, hermite_functions(nmax, y))
        })
        .collect();
    let norm = (w[0] * w[1]).powf(0.25) / std::f64::consts::PI.sqrt() * (wp[0] * wp[1]).powf(-0.25);
    let mut amp = DMatrix::<f64>::zeros(nmax + 1, nmax + 1);
    for (a, (y1, phi1)) in grid.iter().enumerate() {
        for (b, (y2, phi2)) in grid.iter().enumerate() {
            let qf = [y1 / wp[0].sqrt() - ds[0], y2 / wp[1].sqrt() - ds[1]];
            let qi = [
                ud[(0, 0)] * qf[0] + ud[(1, 0)] * qf[1],
                ud[(0, 1)] * qf[0] + ud[(1, 1)] * qf[1],
            ];
            let ground = norm * (-0.5 * (w[0] * qi[0] * qi[0] + w[1] * qi[1] * qi[1])).exp();
            if ground < 1e-300 {
                continue;
            }
            let edge = |i: usize| if i == 0 || i == steps { 0.5 } else { 1.0 };
            let weight = edge(a) * edge(b) * h * h * ground;
            for n1 in 0..=nmax {
                for n2 in 0..=nmax - n1 {
                    amp[(n1, n2)] += weight * phi1[n1] * phi2[n2];
                }
            }
        }
    }
    amp.map(|x| x * x)
}

/// Diatomic along x: atom 2 moves by `stretch` Angstrom.
pub fn diatomic(m1: f64, m2: f64, w: f64, wp: f64, stretch: f64) -> MoleculeData {
    let total = m1 + m2;
    let v = [-(m2 / total).sqrt(), 0.0, 0.0, (m1 / total).sqrt(), 0.0, 0.0];
    let modes = DMatrix::from_column_slice(6, 1, &v);
    MoleculeData {
        masses: vec![m1, m2],
        geom_initial: vec![0.0, 0.0, 0.0, 1.1, 0.0, 0.0],
        geom_final: vec![0.0, 0.0, 0.0, 1.1 + stretch, 0.0, 0.0],
        modes_initial: modes.clone(),
        modes_final: modes,
        freq_initial: vec![w],
        freq_final: vec![wp],
    }
}

/// `sqrt(mu) * stretch`, the mass-weighted length of a diatomic stretch.
pub fn diatomic_shift(m1: f64, m2: f64, stretch: f64) -> f64 {
    (m1 * m2 / (m1 + m2)).sqrt() * stretch
}

pub fn poisson(mean: f64, n: usize) -> f64 {
    let mut p = (-mean).exp();
    for k in 1..=n {
        p *= mean / k as f64;
    }
    p
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
