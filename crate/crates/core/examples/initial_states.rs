//! Tilted product states cos θ|↑⟩ + sin θ|↓⟩ in the full basis.

use std::f64::consts::PI;

use nhdtc::dynamics::{evolve_trace, init_theta};
use nhdtc::model::DriveParams;

fn main() -> nhdtc::Result<()> {
    let l = 8;
    for (name, params) in [
        ("H  ε = 0.3", DriveParams::hermitian(l, 0.3)),
        ("NH ε = 0.2", DriveParams::non_reciprocal(l, 0.2)),
    ] {
        for theta in [0.0, PI / 16.0, PI / 8.0] {
            let trace = evolve_trace(&params, &init_theta(l, theta)?, 30)?;
            let norm = trace.normalized_total();
            let samples: Vec<String> = [1, 10, 20, 30].iter().map(|&n| format!("{:+.3}", norm[n])).collect();
            println!(
                "{name}, θ = {theta:.3}: I(n)/I(0) at n = 1, 10, 20, 30: {}",
                samples.join(" ")
            );
        }
    }
    Ok(())
}
