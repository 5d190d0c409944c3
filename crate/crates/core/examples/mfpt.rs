//! Escape time over the barrier of the deep Schlögl model, four ways.

use dgp::asymptotics::{kramers_time, mfpt_asymptotic, PotentialGrid};
use dgp::exact::mfpt_exact_right;
use dgp::model::build_expansion;
use dgp::presets;
use dgp::simulate::mc_mfpt;

fn main() -> dgp::Result<()> {
    let model = presets::schlogl_deep();
    let exp = build_expansion(&model)?;
    let grid = PotentialGrid::new(&exp, 5.5)?;
    // basins at x = 1 and 5, barrier at 3
    for v in [20.0, 60.0, 200.0] {
        let (n_from, n_to) = ((1.0 * v) as u64, (5.0 * v) as u64);
        let exact = mfpt_exact_right(&model, v, n_from, n_to)?;
        let integral = mfpt_asymptotic(&exp, &grid, v, 1.0, 5.0)?;
        let k = kramers_time(&exp, &grid, v, 1.0, 3.0)?;
        println!(
            "V = {v:>5}: exact {exact:.4e}  integral {integral:.4e}  Kramers {:.4e} (phi0 only {:.4e}, {:?})",
            k.time, k.time_leading_only, k.bistability_class
        );
    }
    let v = 20.0;
    let mc = mc_mfpt(&model, v, 20, 100, 2000, 1)?;
    println!("V = {v:>5}: Monte Carlo {:.4e} ± {:.1e} over {} replicas", mc.mean, mc.stderr, mc.replicas);
    Ok(())
}
