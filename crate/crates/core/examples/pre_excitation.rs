//! A resonant field drives one ground-state mode before the transition. The
//! drive displacement moves weight into higher vibrational levels of the final
//! state.

use nalgebra::{DMatrix, DVector};
use vibex::vibronic::doktorov_from_duschinsky;
use vibex::{
    apply_doktorov, drive_displacement, pre_excite, single_mode_marginals, Complex64, DriveSpec,
    DuschinskyData, GaussianState,
};

fn main() -> vibex::Result<()> {
    let data = DuschinskyData {
        duschinsky: DMatrix::identity(2, 2),
        displacement: DVector::from_vec(vec![0.1, 0.0]),
        freq_initial: vec![1200.0, 2000.0],
        freq_final: vec![1100.0, 1900.0],
    };
    let params = doktorov_from_duschinsky(&data)?;

    let drive = DriveSpec {
        charges: vec![0.4, -0.4],
        coeffs: vec![vec![[2e-12, 0.0, 0.0], [0.0, 1e-12, 0.0]], vec![[-2e-12, 0.0, 0.0], [0.0, -1e-12, 0.0]]],
        field: [Complex64::new(5e8, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
        duration: 2e-13,
        target_mode: 0,
    };
    let beta = drive_displacement(&drive)?;
    println!("drive displacement beta = {beta:.4}, |beta|^2 = {:.4}", beta.norm_sqr());

    let vacuum = GaussianState::vacuum(2)?;
    for (label, start) in [("cold", vacuum.clone()), ("driven", pre_excite(&vacuum, 0, beta)?)] {
        let m = single_mode_marginals(&apply_doktorov(&start, &params)?, 6)?;
        let shown: Vec<String> = m[0].probabilities.iter().map(|p| format!("{p:.4}")).collect();
        println!("{label:>6}: mode 1 {}", shown.join(" "));
    }
    Ok(())
}
