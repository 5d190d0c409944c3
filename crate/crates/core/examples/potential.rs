//! Leading and first-order potentials against the exact `-(1/V) ln p` for a
//! Poisson birth-death process, at increasing system sizes.

use dgp::asymptotics::PotentialGrid;
use dgp::exact::stationary_distribution;
use dgp::model::build_expansion;
use dgp::presets;

fn main() -> dgp::Result<()> {
    let model = presets::poisson(1.0, 2.0);
    let grid = PotentialGrid::new(&build_expansion(&model)?, 2.0)?;
    let (x, x_ref) = (1.0, 0.5);
    println!("{:>8} {:>14} {:>14} {:>14}", "V", "exact", "phi0", "phi0+phi1/V");
    for v in [10.0, 40.0, 160.0, 640.0] {
        // keep n = xV inside the table even where its mass is below the automatic cutoff
        let dist = stationary_distribution(&model, v, Some((1.5 * x * v) as u64))?;
        let exact = -(dist.log_probability((x * v) as u64) - dist.log_probability((x_ref * v) as u64)) / v;
        let lead = grid.phi0(x)? - grid.phi0(x_ref)?;
        let full = grid.big_phi(x, v)? - grid.big_phi(x_ref, v)?;
        println!("{v:>8} {exact:>14.8} {lead:>14.8} {full:>14.8}");
    }
    Ok(())
}
