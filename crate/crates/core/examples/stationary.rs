//! Exact stationary law of the Schlögl model: two peaks, one at each stable state.

use dgp::exact::{exact_potential, stationary_distribution};
use dgp::presets;

fn main() -> dgp::Result<()> {
    let model = presets::schlogl_shallow();
    let v = 60.0;
    let dist = stationary_distribution(&model, v, None)?;
    println!("states 0..={}, tail mass {:.2e}", dist.n_max, dist.tail_mass);
    println!("mean {:.3}, variance {:.3}, mode {}", dist.mean(), dist.variance(), dist.mode());

    let phi = exact_potential(&dist)?;
    for n in (0..=dist.n_max as usize).step_by(10) {
        let bar = "#".repeat((dist.probability(n as u64) * 400.0).round() as usize);
        println!("x = {:5.3}  Phi = {:8.5}  {bar}", phi.x[n], phi.phi[n]);
    }
    Ok(())
}
