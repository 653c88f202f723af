//! The period-doubling envelope changes sign after τ = π/(2δE).

use nhdtc::basis::BasisDescriptor;
use nhdtc::diagnostics::{first_envelope_zero, ENVELOPE_HALF_WIDTH};
use nhdtc::dynamics::{evolve_trace, StateVector};
use nhdtc::model::DriveParams;
use nhdtc::spectral::{gap_deviation, return_probability_check, PairingOptions};

fn main() -> nhdtc::Result<()> {
    for l in [4, 5, 6] {
        let desc = BasisDescriptor::pair_sector(l)?;
        let params = DriveParams::hermitian(l, 0.2);
        let pair = gap_deviation(&params, &desc, &PairingOptions::default())?;
        let tau = pair.lifetime();
        let state = StateVector::polarized(desc);
        let trace = evolve_trace(&params, &state, (1.2 * tau) as usize + 2 * ENVELOPE_HALF_WIDTH)?;
        let zero = first_envelope_zero(&trace, ENVELOPE_HALF_WIDTH);
        let ret = return_probability_check(&params, &state)?;
        println!(
            "L = {l}: δE = {:.3e}, τ = {tau:.1}, envelope zero {}, two-period return {:.4} (cos²δE {:.4}, leaked weight {:.3})",
            pair.deviation,
            zero.map_or("none".into(), |z| format!("{z:.1}")),
            ret.p_stay,
            ret.predicted_stay,
            ret.leaked_weight
        );
    }
    Ok(())
}
