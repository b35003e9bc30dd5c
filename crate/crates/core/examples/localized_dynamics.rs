//! Energy flowing between two local oscillators built from a pair of normal
//! modes with different frequencies.

use vibex::gaussian::CMatrix;
use vibex::{evolve, Complex64, GaussianState, LocalizationMap};

fn main() -> vibex::Result<()> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let c = |x: f64| Complex64::new(x, 0.0);
    let loc = LocalizationMap::new(CMatrix::from_row_slice(2, 2, &[c(h), c(h), c(h), c(-h)]), vec![1000.0, 1500.0])?;
    let state = GaussianState::coherent(&[c(1.0), c(1.0)])?;

    println!("  t/fs   <n_1>   <n_2>");
    for step in 0..=20 {
        let t = 5.0 * step as f64;
        let n = evolve(&state, &loc, t)?.mean_photon_numbers();
        println!("{t:6.1}  {:.4}  {:.4}", n[0], n[1]);
    }
    Ok(())
}
