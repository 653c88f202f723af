//! Unequal imperfections (ε, −(1+γ)ε): the scaling exponent β(γ).

use nhdtc::fitting::gamma_sweep;

fn main() -> nhdtc::Result<()> {
    let rows = gamma_sweep(&[0.0, 0.05, 0.1, 0.15, 0.2], &[0.25, 0.3, 0.35, 0.4, 0.45], &[4, 5, 6, 7, 8])?;
    for row in rows {
        println!("γ = {:.2}: β = {:.3} ± {:.3}", row.gamma, row.beta.rate, row.beta.rate_stderr);
    }
    Ok(())
}
