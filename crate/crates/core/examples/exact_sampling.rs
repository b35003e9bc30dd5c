//! Exact photon-number samples from a two-mode post-transition state, with the
//! empirical frequency of the commonest patterns next to their probabilities.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use vibex::vibronic::doktorov_from_duschinsky;
use vibex::{apply_doktorov, pattern_probability, sample, DuschinskyData, GaussianState, SamplerConfig};

fn main() -> vibex::Result<()> {
    let t = 0.4_f64;
    let data = DuschinskyData {
        duschinsky: DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]),
        displacement: DVector::from_vec(vec![0.15, -0.08]),
        freq_initial: vec![900.0, 1700.0],
        freq_final: vec![800.0, 1500.0],
    };
    let params = doktorov_from_duschinsky(&data)?;
    let state = apply_doktorov(&GaussianState::vacuum(2)?, &params)?;

    let cfg = SamplerConfig {
        num_samples: 20_000,
        seed: 7,
        ..SamplerConfig::default()
    };
    let run = sample(&state, &cfg)?;
    let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
    for s in &run.samples {
        *counts.entry(s.clone()).or_default() += 1;
    }
    let mut top: Vec<_> = counts.into_iter().collect();
    top.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    println!("pattern   empirical  exact");
    for (pattern, n) in top.into_iter().take(8) {
        let exact = pattern_probability(&state, &pattern)?;
        println!("{pattern:?}  {:.4}     {exact:.4}", n as f64 / cfg.num_samples as f64);
    }
    println!("largest mass dropped by the cutoff: {:.1e}", run.max_truncated_mass);
    Ok(())
}
