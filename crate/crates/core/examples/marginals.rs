//! Single-mode marginals of a three-mode state and the joint distribution of
//! two of its modes.

use vibex::gaussian::displaced_squeezed;
use vibex::{joint_probability_table, single_mode_marginals, Complex64};

fn main() -> vibex::Result<()> {
    let state = displaced_squeezed(
        &[0.3, 0.0, -0.2],
        &[Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.8), Complex64::new(0.0, 0.0)],
    )?;
    for (k, m) in single_mode_marginals(&state, 8)?.iter().enumerate() {
        let shown: Vec<String> = m.probabilities.iter().map(|p| format!("{p:.4}")).collect();
        println!("mode {}: {} (coverage {:.8})", k + 1, shown.join(" "), m.coverage());
    }

    let joint = joint_probability_table(&state, &[0, 1], 4)?;
    println!("\njoint of modes 1 and 2, rows n1, columns n2:");
    for n1 in 0..=4 {
        let row: Vec<String> = (0..=4).map(|n2| format!("{:.4}", joint.probability(&[n1, n2]))).collect();
        println!("{}", row.join(" "));
    }
    println!("mean counts {:.4?}", joint.means());
    Ok(())
}
