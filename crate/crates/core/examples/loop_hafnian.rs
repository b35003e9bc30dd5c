//! Loop hafnian of a small symmetric matrix, checked against enumeration.

use vibex::gaussian::CMatrix;
use vibex::{loop_hafnian, loop_hafnian_reference, Complex64};

fn main() -> vibex::Result<()> {
    let n = 6;
    let a = CMatrix::from_fn(n, n, |i, j| {
        let (lo, hi) = (i.min(j) as f64, i.max(j) as f64);
        Complex64::new(1.0 / (1.0 + lo + hi), 0.1 * (hi - lo))
    });
    let fast = loop_hafnian(&a)?;
    let slow = loop_hafnian_reference(&a)?;
    println!("lhaf (power traces)  = {fast:.12}");
    println!("lhaf (matchings)     = {slow:.12}");
    println!("relative difference  = {:.2e}", (fast - slow).norm() / slow.norm());

    let ones = CMatrix::from_element(4, 4, Complex64::new(1.0, 0.0));
    println!("lhaf(all-ones 4x4)   = {}", loop_hafnian(&ones)?.re);
    Ok(())
}
