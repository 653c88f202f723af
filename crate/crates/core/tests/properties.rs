use nhdtc::basis::{decode, encode, pair_sector_embed, pair_sector_project, BasisDescriptor, ConfigIndex};
use nhdtc::diagnostics::fourier;
use nhdtc::dynamics::{evolve_trace, ImbalanceTrace, StateVector};
use nhdtc::fitting::{fit_exponential_decay, fit_log_exponent};
use nhdtc::linalg::CMatrix;
use nhdtc::model::{build_floquet, pair_gate, DriveParams, OperatorForm, Protocol};
use nhdtc::runner::ExperimentConfig;
use proptest::prelude::*;

fn eps() -> impl Strategy<Value = f64> {
    -0.9..0.9f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn encode_decode_round_trip(l in 1usize..=10, raw in any::<u64>()) {
        let idx = (raw as usize) & ((1usize << (2 * l)) - 1);
        let spins = decode(ConfigIndex(idx), l).unwrap();
        prop_assert_eq!(encode(&spins, l).unwrap(), ConfigIndex(idx));
    }

    #[test]
    fn pair_sector_embedding_inverts(l in 1usize..=10, raw in any::<u64>()) {
        let r = (raw as usize) & ((1usize << l) - 1);
        let full = pair_sector_embed(r, l).unwrap();
        prop_assert_eq!(pair_sector_project(full, l), Some(r));
    }

    #[test]
    fn gate_is_unitary_exactly_when_reciprocal(ea in eps(), eb in eps()) {
        let defect = |a: f64, b: f64| {
            let g = pair_gate(&DriveParams::new(1, a, b)).matrix;
            let m = CMatrix::from_fn(4, 4, |i, j| g[i][j]);
            m.matmul(&m.adjoint()).max_abs_diff(&CMatrix::identity(4))
        };
        prop_assert!(defect(ea, ea) < 1e-12);
        if (ea - eb).abs() > 0.05 {
            prop_assert!(defect(ea, eb) > 1e-6);
        }
    }

    #[test]
    fn gate_sequence_matches_dense(l in 1usize..=3, ea in eps(), eb in eps()) {
        let params = DriveParams::new(l, ea, eb);
        let desc = BasisDescriptor::full(l).unwrap();
        let a = build_floquet(&params, &desc, OperatorForm::GateSequence).unwrap().to_dense();
        let b = build_floquet(&params, &desc, OperatorForm::DenseMatrix).unwrap();
        prop_assert!(a.max_abs_diff(b.dense().unwrap()) < 1e-10);
    }

    #[test]
    fn hermitian_drive_preserves_raw_norm(l in 2usize..=6, e in 0.0..0.6f64) {
        let desc = BasisDescriptor::pair_sector(l).unwrap();
        let u = build_floquet(&DriveParams::hermitian(l, e), &desc, OperatorForm::GateSequence).unwrap();
        let mut s = StateVector::polarized(desc).with_policy(nhdtc::dynamics::NormPolicy::Raw);
        for n in 1..=20 {
            s.step(&u, n).unwrap();
        }
        prop_assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn imbalance_is_bounded(l in 2usize..=6, e in 0.0..0.6f64, nh in any::<bool>()) {
        let protocol = if nh { Protocol::NonReciprocal } else { Protocol::Hermitian };
        let desc = BasisDescriptor::pair_sector(l).unwrap();
        let tr = evolve_trace(&protocol.params(l, e), &StateVector::polarized(desc), 40).unwrap();
        prop_assert!(tr.total.iter().all(|v| v.abs() <= 1.0 + 1e-12));
    }

    #[test]
    fn parseval_and_linearity(values in prop::collection::vec(-1.0..1.0f64, 2..40), c in -3.0..3.0f64) {
        let n = values.len() / 2 * 2;
        let make = |scale: f64| ImbalanceTrace {
            n_periods: n,
            per_site: values[..n].iter().map(|&v| vec![v * scale]).collect(),
            total: values[..n].iter().map(|&v| v * scale).collect(),
        };
        let f = fourier(&make(1.0)).unwrap();
        let lhs: f64 = f.amplitudes.iter().map(|a| a * a).sum();
        let rhs: f64 = values[..n].iter().map(|v| v * v).sum::<f64>() / n as f64;
        prop_assert!((lhs - rhs).abs() < 1e-10);
        let g = fourier(&make(c)).unwrap();
        for (a, b) in f.amplitudes.iter().zip(&g.amplitudes) {
            prop_assert!((b - c.abs() * a).abs() < 1e-10);
        }
    }

    #[test]
    fn fits_ignore_point_order(alpha in 0.1..3.0f64, c in -2.0..2.0f64, noise in prop::collection::vec(-0.05..0.05f64, 5), rot in 0usize..5) {
        let pts: Vec<(f64, f64)> = (0..5)
            .map(|i| {
                let l = 4.0 + i as f64;
                (l, (c - alpha * l + noise[i]).exp())
            })
            .collect();
        let mut shuffled = pts.clone();
        shuffled.rotate_left(rot);
        shuffled.swap(0, 4);
        let a = fit_exponential_decay(&pts).unwrap();
        let b = fit_exponential_decay(&shuffled).unwrap();
        prop_assert_eq!(a.rate, b.rate);
        prop_assert_eq!(a.residuals.len(), pts.len());
        prop_assert!((0.0..=1.0).contains(&a.r_squared));

        let eps_pts: Vec<(f64, f64)> = (0..5).map(|i| (0.2 + 0.05 * i as f64, alpha + noise[i])).collect();
        let mut rev = eps_pts.clone();
        rev.reverse();
        prop_assert_eq!(fit_log_exponent(&eps_pts).unwrap().rate, fit_log_exponent(&rev).unwrap().rate);
    }

    #[test]
    fn config_round_trips(
        eps_grid in prop::collection::vec(-1.0..1.0f64, 1..8),
        gamma in 0.0..0.3f64,
        l in 1usize..12,
        n in 1usize..500,
    ) {
        let cfg = ExperimentConfig {
            eps: eps_grid,
            protocols: vec![Protocol::Hermitian, Protocol::Skewed { gamma }],
            l,
            n_periods: n,
            ..ExperimentConfig::default()
        };
        prop_assert_eq!(ExperimentConfig::from_text(&cfg.to_text()).unwrap(), cfg);
    }
}
