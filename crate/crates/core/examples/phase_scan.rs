//! Folds and the Maxwell point of the Schlögl family, and the transcritical
//! point of the Keizer model.

use dgp::analysis::{linspace, phase_transition_scan, scan_bifurcations, ModelFamily};
use dgp::presets;

fn main() -> dgp::Result<()> {
    let schlogl = ModelFamily::from_scan(&presets::schlogl_shallow())?;
    let grid = linspace(0.5, 1.5, 101);
    for e in scan_bifurcations(&schlogl, &grid, (0.0, 3.0))? {
        println!("{:?} at {} = {:.6}, x = {:.4}", e.kind, schlogl.parameter_name(), e.parameter_value, e.location);
    }
    for t in phase_transition_scan(&schlogl, &grid, (0.0, 3.0))?.transitions {
        println!("Maxwell point at {:.6}: minima x = {:.4} and {:.4}", t.mu, t.x.0, t.x.1);
    }

    let keizer = ModelFamily::from_fn("k1", |k1| Ok(presets::keizer(k1, 1.0, 1.0)));
    for e in scan_bifurcations(&keizer, &linspace(0.5, 1.5, 41), (-0.5, 2.0))? {
        println!("Keizer: {:?} at k1 = {:.6}", e.kind, e.parameter_value);
    }
    Ok(())
}
