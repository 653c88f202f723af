//! Perfect swap pulses: the imbalance flips sign every period, forever.

use nhdtc::dynamics::{evolve_trace, init_polarized};
use nhdtc::model::DriveParams;

fn main() -> nhdtc::Result<()> {
    let l = 4;
    let trace = evolve_trace(&DriveParams::new(l, 0.0, 0.0), &init_polarized(l)?, 10)?;
    for (n, v) in trace.total.iter().enumerate() {
        println!("n = {n:2}  I = {v:+.15}");
    }
    println!("sign alternates for {} of 10 periods", trace.alternating_prefix());
    Ok(())
}
