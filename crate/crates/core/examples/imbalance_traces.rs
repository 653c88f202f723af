//! Imbalance traces for coherent `(ε, ε)` and incoherent `(ε, −ε)` pulse
//! errors at L = 8.

use nhdtc::basis::BasisDescriptor;
use nhdtc::dynamics::{evolve_trace, StateVector};
use nhdtc::model::Protocol;

fn main() -> nhdtc::Result<()> {
    let l = 8;
    let state = StateVector::polarized(BasisDescriptor::pair_sector(l)?);
    for protocol in [Protocol::Hermitian, Protocol::NonReciprocal] {
        for eps in [0.1, 0.2, 0.3] {
            let trace = evolve_trace(&protocol.params(l, eps), &state, 100)?;
            let tail: Vec<String> = trace.total[95..].iter().map(|v| format!("{v:+.3}")).collect();
            println!(
                "{:>2} ε = {eps:.1}: alternates {:3}/100 periods, I(95..100) = {}",
                protocol.label(),
                trace.alternating_prefix(),
                tail.join(" ")
            );
        }
    }
    Ok(())
}
