//! The summation lemma on a polynomial and Laplace's method on a double well.

use std::sync::Arc;

use dgp::asymptotics::{laplace_log_min, laplace_log_quadrature, lemma_sum, LemmaInput, Profile};

fn main() -> dgp::Result<()> {
    let f0 = |z: f64| z * z;
    let f0p = |z: f64| 2.0 * z;
    let zero = |_: f64| 0.0;
    let input = LemmaInput { f0: &f0, f0_prime: &f0p, f1: &zero, f2: &zero };
    for v in [4.0, 10.0, 100.0] {
        let direct: f64 = (0..v as u32).map(|l| f0(f64::from(l) / v) / v).sum();
        println!("sum of (l/V)^2 / V for l < V, V = {v}: lemma {:.12}, direct {direct:.12}", lemma_sum(&input, 1.0, v)?);
    }

    // (1/V) ln ∫_0^x exp(-V f) for f = cosh(2(y - 1)), a well at y = 1
    let well = Profile::new(
        Arc::new(|y: f64| (2.0 * (y - 1.0)).cosh()),
        Arc::new(|y: f64| 2.0 * (2.0 * (y - 1.0)).sinh()),
        Arc::new(|y: f64| 4.0 * (2.0 * (y - 1.0)).cosh()),
        2.0,
    );
    for x in [0.5, 0.98, 1.0, 1.05, 1.5] {
        let v = 200.0;
        println!(
            "x = {x}: Laplace {:.8}, quadrature {:.8}",
            laplace_log_min(&well, v, x)?,
            laplace_log_quadrature(&well, v, x)?
        );
    }
    Ok(())
}
