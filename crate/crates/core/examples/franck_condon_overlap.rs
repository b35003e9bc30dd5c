//! Vibronic progression of a one-mode transition with a frequency change and a
//! shift. The printed profile is the Franck-Condon factor `|<n'|0>|^2`.

use nalgebra::{DMatrix, DVector};
use vibex::vibronic::doktorov_from_duschinsky;
use vibex::{apply_doktorov, DuschinskyData, GaussianState, PreparedState};

fn main() -> vibex::Result<()> {
    let (w, wp) = (1500.0, 1100.0);
    let data = DuschinskyData {
        duschinsky: DMatrix::identity(1, 1),
        displacement: DVector::from_element(1, 0.12),
        freq_initial: vec![w],
        freq_final: vec![wp],
    };
    let params = doktorov_from_duschinsky(&data)?;
    let state = apply_doktorov(&GaussianState::vacuum(1)?, &params)?;
    let prepared = PreparedState::new(&state)?;

    println!("0-0 overlap without shift would be {:.6}", 2.0 * (w * wp).sqrt() / (w + wp));
    let mut total = 0.0;
    for n in 0..=12 {
        let p = prepared.probability(&[n])?;
        total += p;
        println!("{n:>3} {p:.8} {}", "#".repeat((p * 60.0).round() as usize));
    }
    println!("sum over n <= 12: {total:.10}");
    Ok(())
}
