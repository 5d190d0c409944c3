//! Enthalpic and entropic parts of the binomial model's stationary potential.

use dgp::analysis::vanthoff_decompose;
use dgp::presets;

fn main() -> dgp::Result<()> {
    let v = 100.0;
    let xs: Vec<f64> = (1..10).map(|k| k as f64 / 10.0).collect();
    let curves = vanthoff_decompose(&presets::binomial(1.0, 1.0, 1.0), v, &xs)?;
    println!("{:>5} {:>12} {:>12} {:>12}", "x", "phi0~", "phi1~", "Phi");
    for r in curves.rows() {
        println!("{:>5.2} {:>12.6} {:>12.6} {:>12.6}", r.x, r.phi0_tilde, r.phi1_tilde, r.big_phi);
    }
    Ok(())
}
