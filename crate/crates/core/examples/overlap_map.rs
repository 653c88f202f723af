//! Overlap of the polarized state with the biorthogonal Floquet
//! eigenstates: the weight concentrates on a π-paired doublet.

use nhdtc::basis::BasisDescriptor;
use nhdtc::dynamics::StateVector;
use nhdtc::model::{build_floquet, OperatorForm, Protocol};
use nhdtc::spectral::{eigendecompose, find_pi_pair, overlap_weights};

fn main() -> nhdtc::Result<()> {
    let l = 6;
    let desc = BasisDescriptor::pair_sector(l)?;
    let psi = StateVector::polarized(desc);
    for protocol in [Protocol::Hermitian, Protocol::NonReciprocal] {
        for eps in [0.05, 0.2, 0.35] {
            let u = build_floquet(&protocol.params(l, eps), &desc, OperatorForm::DenseMatrix)?;
            let spec = eigendecompose(&u)?;
            let weights = overlap_weights(&spec, &psi)?;
            let mut heavy: Vec<(f64, f64)> = spec
                .energies
                .iter()
                .zip(&weights)
                .map(|(e, w)| (w.norm(), e.phase))
                .collect();
            heavy.sort_by(|a, b| b.0.total_cmp(&a.0));
            let top: Vec<String> = heavy[..4].iter().map(|(w, e)| format!("{w:.3}@{e:+.3}")).collect();
            let pair = find_pi_pair(&spec, &psi);
            println!(
                "{:>2} ε = {eps:.2}: heaviest |A_k|@E_k {}; pair weight {}",
                protocol.label(),
                top.join(" "),
                pair.map_or("below floor".into(), |p| format!("{:.4}", p.dominant_weight()))
            );
        }
    }
    Ok(())
}
