//! Doktorov parameters of a bent triatomic whose final-state modes are a
//! rotated copy of the initial ones.

use nalgebra::DMatrix;
use vibex::{doktorov_params, MoleculeData};

fn main() -> vibex::Result<()> {
    // three orthonormal mass-weighted displacement patterns
    let li = DMatrix::from_fn(9, 9, |i, j| ((i * 7 + j * 3) as f64).sin() + if i == j { 3.0 } else { 0.0 })
        .qr()
        .q()
        .columns(0, 3)
        .into_owned();
    let t = 0.3_f64;
    let rot = DMatrix::from_row_slice(3, 3, &[t.cos(), -t.sin(), 0.0, t.sin(), t.cos(), 0.0, 0.0, 0.0, 1.0]);
    let mol = MoleculeData {
        masses: vec![16.0, 1.008, 1.008],
        geom_initial: vec![0.0, 0.0, 0.0, 0.96, 0.0, 0.0, -0.24, 0.93, 0.0],
        geom_final: vec![0.0, 0.02, 0.0, 1.01, 0.0, 0.0, -0.26, 0.99, 0.0],
        modes_final: &li * rot,
        modes_initial: li,
        freq_initial: vec![1600.0, 3650.0, 3750.0],
        freq_final: vec![1400.0, 3300.0, 3500.0],
    };
    let p = doktorov_params(&mol)?;
    println!("sigma = {:.6?}", p.sigma);
    println!("beta  = {:.6?}", p.beta);
    println!("U_L   = {:.6}", p.u_left);
    println!("U_R   = {:.6}", p.u_right);
    println!("J     = {:.6}", p.reconstruct_j());
    Ok(())
}
