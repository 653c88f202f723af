//! Melting of the subharmonic response: KL divergence from the ideal
//! spectrum and the variance peak of per-site π amplitudes.

use nhdtc::diagnostics::melt_scan;
use nhdtc::model::{DriveParams, Protocol};

fn main() -> nhdtc::Result<()> {
    let grid: Vec<f64> = (1..=80).map(|i| 0.01 * i as f64).collect();
    for protocol in [Protocol::Hermitian, Protocol::NonReciprocal] {
        for l in [6, 7, 8] {
            let scan = melt_scan(&DriveParams::new(l, 0.0, 0.0), protocol, &grid, 100)?;
            let kl: Vec<String> = [9, 29, 49]
                .iter()
                .map(|&i| format!("KL(ε={:.2}) = {:.3}", scan.eps[i], scan.kl_total(i)))
                .collect();
            println!("{:>2} L = {l}: ε_c = {:.3}; {}", protocol.label(), scan.eps_c, kl.join(", "));
        }
    }
    Ok(())
}
