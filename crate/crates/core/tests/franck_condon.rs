//! Vibronic pipeline against Franck-Condon factors from direct quadrature
//! of harmonic-oscillator wavefunctions.

mod common;

use common::{diatomic, diatomic_shift, franck_condon_1d, franck_condon_2d, poisson};
use nalgebra::{DMatrix, DVector};
use vibex::vibronic::doktorov_from_duschinsky;
use vibex::{apply_doktorov, doktorov_params, DuschinskyData, GaussianState, PreparedState};

fn pipeline(params: &vibex::DoktorovParams) -> PreparedState {
    let vac = GaussianState::vacuum(params.num_modes()).unwrap();
    PreparedState::new(&apply_doktorov(&vac, params).unwrap()).unwrap()
}

#[test]
fn oracle_reproduces_closed_forms() {
    for ratio in [0.25, 1.0, 4.0] {
        let p = franck_condon_1d(1000.0, 1000.0 * ratio, 0.0, 2);
        let exact = 2.0 * ratio.sqrt() / (1.0 + ratio);
        assert!((p[0] - exact).abs() < 1e-13, "{ratio}: {} vs {exact}", p[0]);
        assert!(p[1] < 1e-25);
    }
}

#[test]
fn diatomic_profiles_match_quadrature() {
    for (w, wp) in [(1000.0, 1000.0), (1200.0, 900.0), (800.0, 1500.0), (1000.0, 250.0), (400.0, 1600.0)] {
        for stretch in [0.0, 0.04, -0.08] {
            let (m1, m2) = (12.0, 16.0);
            let params = doktorov_params(&diatomic(m1, m2, w, wp, stretch)).unwrap();
            let prepared = pipeline(&params);
            let oracle = franck_condon_1d(w, wp, diatomic_shift(m1, m2, stretch), 12);
            for (n, expected) in oracle.iter().enumerate() {
                let got = prepared.probability(&[n]).unwrap();
                assert!(
                    (got - expected).abs() < 1e-9,
                    "w={w} wp={wp} stretch={stretch} n={n}: {got} vs {expected}"
                );
            }
        }
    }
}

#[test]
fn equal_frequencies_give_poisson() {
    let (m1, m2) = (1.008, 35.0);
    let params = doktorov_params(&diatomic(m1, m2, 2900.0, 2900.0, 0.12)).unwrap();
    let mean = params.beta[0] * params.beta[0];
    assert!(mean > 0.1);
    let prepared = pipeline(&params);
    for n in 0..=10 {
        assert!((prepared.probability(&[n]).unwrap() - poisson(mean, n)).abs() < 1e-13);
    }
}

fn rotation(theta: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()])
}

#[test]
fn duschinsky_mixing_matches_2d_quadrature() {
    let cases = [
        ([1000.0, 1500.0], [900.0, 1700.0], 0.4, [0.05, -0.08]),
        ([700.0, 1300.0], [1100.0, 600.0], -1.1, [0.0, 0.1]),
        ([1000.0, 1000.0], [1000.0, 1000.0], 0.7, [0.0, 0.0]),
    ];
    for (w, wp, theta, d) in cases {
        let ud = rotation(theta);
        let data = DuschinskyData {
            duschinsky: ud.clone(),
            displacement: DVector::from_column_slice(&d),
            freq_initial: w.to_vec(),
            freq_final: wp.to_vec(),
        };
        let prepared = pipeline(&doktorov_from_duschinsky(&data).unwrap());
        let oracle = franck_condon_2d(w, wp, &ud, d, 5);
        for n1 in 0..=5 {
            for n2 in 0..=5 - n1 {
                let got = prepared.probability(&[n1, n2]).unwrap();
                let expected = oracle[(n1, n2)];
                assert!(
                    (got - expected).abs() < 1e-9,
                    "theta={theta} ({n1},{n2}): {got} vs {expected}"
                );
            }
        }
    }
}
