//! PT and parity certificates, with the three parity choices compared.

use nhdtc::model::DriveParams;
use nhdtc::symmetry::{pt_report_with, ParityVariant};

fn main() -> nhdtc::Result<()> {
    let params = DriveParams::non_reciprocal(3, 0.3);
    for variant in ParityVariant::ALL {
        let r = pt_report_with(&params, variant)?;
        println!(
            "{variant:>16}: ‖PT H_z − H_z PT‖ {:.1e}, ‖PT H_I − H_I PT‖ {:.1e}",
            r.pt_ising, r.pt_hopping
        );
    }
    print!("{}", pt_report_with(&params, ParityVariant::default())?.to_text());
    Ok(())
}
