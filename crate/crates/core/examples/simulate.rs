//! A Gillespie path through the bistable Schlögl model and its time-averaged occupancy.

use dgp::presets;
use dgp::simulate::{ssa_trajectory, Stop};

fn main() -> dgp::Result<()> {
    let model = presets::schlogl_shallow();
    let v = 40.0;
    let tr = ssa_trajectory(&model, v, 20, Stop::TMax(500.0), 42)?;
    println!("{} events up to t = {}", tr.states.len(), tr.t_end);
    let occ = tr.occupancy();
    for (n, chunk) in occ.chunks(5).enumerate() {
        let share: f64 = chunk.iter().sum::<f64>() / tr.t_end;
        println!("n {:>3}-{:<3} {}", 5 * n, 5 * n + chunk.len() - 1, "#".repeat((share * 200.0).round() as usize));
    }
    Ok(())
}
