//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Failing criteria are reported, not hidden; the process exits nonzero on
//! any failure only when `NHDTC_STRICT=1` is set, so the ordinary test run
//! stays usable while the report keeps the verdicts visible.

mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{floquet_from_hamiltonian, max_abs_diff_vec, pair_gate_oracle};
use nhdtc::basis::BasisDescriptor;
use nhdtc::diagnostics::{first_envelope_zero, melt_scan, ENVELOPE_HALF_WIDTH};
use nhdtc::dynamics::{evolve_trace, init_polarized, init_theta, StateVector};
use nhdtc::fitting::{alpha_scan, beta_fit, gamma_sweep, AlphaPoint};
use nhdtc::model::{build_floquet, pair_gate, DriveParams, OperatorForm, Protocol};
use nhdtc::spectral::{eigendecompose, gap_deviation, PairingOptions};
use nhdtc::symmetry::pt_report;
use nhdtc::Result;

const PROTOCOLS: [Protocol; 2] = [Protocol::Hermitian, Protocol::NonReciprocal];
const FIT_EPS: [f64; 5] = [0.25, 0.3, 0.35, 0.4, 0.45];
const FIT_SIZES: [usize; 5] = [4, 5, 6, 7, 8];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Result<Verdict> {
    Ok(Verdict { pass, detail: detail.into() })
}

fn ideal_dtc() -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    for l in [2, 4, 8] {
        let trace = evolve_trace(&DriveParams::new(l, 0.0, 0.0), &init_polarized(l)?, 100)?;
        for (n, v) in trace.total.iter().enumerate() {
            worst = worst.max((v - if n % 2 == 0 { 1.0 } else { -1.0 }).abs());
        }
    }
    verdict(worst < 1e-12, format!("max |I(nT) − (−1)^n| = {worst:.1e} (L = 2, 4, 8; full basis)"))
}

fn spectrum_realness() -> Result<Verdict> {
    let (mut imag, mut resid): (f64, f64) = (0.0, 0.0);
    for desc in [BasisDescriptor::pair_sector(6)?, BasisDescriptor::full(4)?] {
        for protocol in PROTOCOLS {
            for i in 0..=5 {
                let params = protocol.params(desc.l(), 0.1 * i as f64);
                let u = build_floquet(&params, &desc, OperatorForm::DenseMatrix)?;
                let spec = eigendecompose(&u)?;
                imag = imag.max(spec.max_decay());
                resid = resid
                    .max(spec.biorthogonality_residual())
                    .max(spec.completeness_residual())
                    .max(spec.reconstruction_residual(u.dense().expect("dense")));
            }
        }
    }
    verdict(
        imag < 1e-8 && resid < 1e-7,
        format!("max |Im E| = {imag:.1e} (< 1e-8), worst residual = {resid:.1e} (< 1e-7)"),
    )
}

fn pi_pairing() -> Result<Verdict> {
    let desc = BasisDescriptor::pair_sector(6)?;
    let (mut min_w, mut max_de) = (f64::INFINITY, 0.0f64);
    for protocol in PROTOCOLS {
        for i in 0..=4 {
            let pair = gap_deviation(&protocol.params(6, 0.025 * i as f64), &desc, &PairingOptions::default())?;
            min_w = min_w.min(pair.dominant_weight());
            max_de = max_de.max(pair.deviation);
        }
    }
    verdict(
        min_w > 0.9 && max_de < 0.05,
        format!("ε ∈ [0, 0.1], L = 6: min pair weight {min_w:.4} (> 0.9), max δE {max_de:.1e} (< 0.05)"),
    )
}

fn alphas(points: &[AlphaPoint]) -> Vec<f64> {
    points.iter().map(AlphaPoint::alpha).collect()
}

fn scaling_exponents() -> Result<Verdict> {
    let h = alpha_scan(Protocol::Hermitian, &FIT_EPS, &FIT_SIZES)?;
    let nh = alpha_scan(Protocol::NonReciprocal, &FIT_EPS, &FIT_SIZES)?;
    let (bh, bnh) = (beta_fit(&h)?, beta_fit(&nh)?);
    let (ah, anh) = (alphas(&h), alphas(&nh));
    let ratios: Vec<f64> = anh.iter().zip(&ah).map(|(n, h)| n / h).collect();
    let beta_h_ok = (bh.rate - 1.033).abs() <= 0.15;
    let beta_nh_ok = (bnh.rate - 2.089).abs() <= 0.25;
    let ratio_ok = ratios.iter().all(|r| (1.6..=2.4).contains(r));
    let min_r2 = h.iter().chain(&nh).map(|a| a.fit.r_squared).fold(1.0, f64::min);
    let fallback = ah.iter().chain(&anh).all(|a| *a > 0.0)
        && anh.iter().zip(&ah).all(|(n, h)| n > h)
        && min_r2 > 0.9;
    let numbers = format!(
        "β^H = {:.3} ({}), β^NH = {:.3} ({}), α^NH/α^H ∈ [{:.2}, {:.2}] ({}), min R² = {:.5}",
        bh.rate,
        if beta_h_ok { "ok" } else { "outside 1.033 ± 0.15" },
        bnh.rate,
        if beta_nh_ok { "ok" } else { "outside 2.089 ± 0.25" },
        ratios.iter().copied().fold(f64::INFINITY, f64::min),
        ratios.iter().copied().fold(0.0, f64::max),
        if ratio_ok { "ok" } else { "outside [1.6, 2.4]" },
        min_r2,
    );
    if beta_h_ok && beta_nh_ok && ratio_ok {
        verdict(true, numbers)
    } else {
        verdict(
            fallback,
            format!(
                "{numbers}; central values missed, fallback property criterion {}",
                if fallback { "holds" } else { "fails" }
            ),
        )
    }
}

fn lifetime_law() -> Result<Verdict> {
    let mut parts = Vec::new();
    let mut pass = true;
    for l in [5, 6] {
        let desc = BasisDescriptor::pair_sector(l)?;
        let params = DriveParams::hermitian(l, 0.2);
        let tau = gap_deviation(&params, &desc, &PairingOptions::default())?.lifetime();
        let n = (1.2 * tau) as usize + 2 * ENVELOPE_HALF_WIDTH;
        let trace = evolve_trace(&params, &StateVector::polarized(desc), n)?;
        let zero = first_envelope_zero(&trace, ENVELOPE_HALF_WIDTH);
        let ok = zero.is_some_and(|z| (z - tau).abs() <= 2.0);
        pass &= ok;
        parts.push(match zero {
            Some(z) => format!("L = {l}: τ = {tau:.1}, envelope zero at {z:.1}"),
            None => format!("L = {l}: τ = {tau:.1}, no envelope zero within {n} periods"),
        });
    }
    verdict(pass, format!("{} (tolerance ±2 periods)", parts.join("; ")))
}

fn melting() -> Result<Verdict> {
    let grid: Vec<f64> = (1..=80).map(|i| 0.01 * i as f64).collect();
    let template = DriveParams::new(8, 0.0, 0.0);
    let h = melt_scan(&template, Protocol::Hermitian, &grid, 100)?.eps_c;
    let nh = melt_scan(&template, Protocol::NonReciprocal, &grid, 100)?.eps_c;
    let h_ok = (h - 0.33).abs() <= 0.05;
    let nh_ok = (nh - 0.52).abs() <= 0.05;
    verdict(
        h_ok && nh_ok && nh > h,
        format!(
            "L = 8: ε_c^H = {h:.4} ({}), ε_c^NH = {nh:.4} ({}), ε_c^NH > ε_c^H: {}",
            if h_ok { "ok" } else { "outside 0.33 ± 0.05" },
            if nh_ok { "ok" } else { "outside 0.52 ± 0.05" },
            nh > h
        ),
    )
}

fn gamma_generalization() -> Result<Verdict> {
    let rows = gamma_sweep(&[0.0, 0.1, 0.2], &FIT_EPS, &FIT_SIZES)?;
    let betas: Vec<(f64, f64)> = rows.iter().map(|r| (r.beta.rate, r.beta.rate_stderr)).collect();
    let last = betas[2].0;
    let monotone = betas.windows(2).all(|w| w[1].0 <= w[0].0 + w[0].1 + w[1].1);
    verdict(
        (last - 1.803).abs() <= 0.25 && monotone,
        format!(
            "β(0) = {:.3}, β(0.1) = {:.3}, β(0.2) = {:.3} (target 1.803 ± 0.25), nonincreasing: {monotone}",
            betas[0].0, betas[1].0, last
        ),
    )
}

fn symmetry_certificates() -> Result<Verdict> {
    let (mut pt, mut parity, mut square): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for l in 1..=4 {
        for protocol in PROTOCOLS {
            for i in 0..=5 {
                let r = pt_report(&protocol.params(l, 0.1 * i as f64))?;
                pt = pt.max(r.pt_ising).max(r.pt_hopping);
                parity = parity.max(r.parity_floquet);
                square = square.max(r.parity_square);
            }
        }
    }
    verdict(
        pt < 1e-10 && parity < 1e-10 && square == 0.0,
        format!("L ≤ 4: PT commutators {pt:.1e}, ‖[P, U_F]‖ {parity:.1e}, ‖P² − I‖ = {square}"),
    )
}

fn oracle_equivalence() -> Result<Verdict> {
    let pairs = [(0.0, 0.0), (0.3, 0.3), (0.3, -0.3), (0.2, -0.44), (-1.5, 0.5)];
    let mut gate: f64 = 0.0;
    let mut dense: f64 = 0.0;
    for (ea, eb) in pairs {
        let g = pair_gate(&DriveParams::new(1, ea, eb)).matrix;
        let o = pair_gate_oracle(&DriveParams::new(1, ea, eb));
        for r in 0..4 {
            for c in 0..4 {
                gate = gate.max((g[r][c] - o[r][c]).norm());
            }
        }
        for l in 1..=3 {
            let params = DriveParams::new(l, ea, eb);
            let desc = BasisDescriptor::full(l)?;
            let seq = build_floquet(&params, &desc, OperatorForm::GateSequence)?.to_dense();
            let d = build_floquet(&params, &desc, OperatorForm::DenseMatrix)?;
            dense = dense
                .max(seq.max_abs_diff(d.dense().expect("dense")))
                .max(seq.max_abs_diff(&floquet_from_hamiltonian(&params)));
        }
    }
    let mut sector: f64 = 0.0;
    for l in 2..=4 {
        for (ea, eb) in [(0.2, 0.2), (0.2, -0.2)] {
            let params = DriveParams::new(l, ea, eb);
            let a = evolve_trace(&params, &StateVector::polarized(BasisDescriptor::pair_sector(l)?), 50)?;
            let b = evolve_trace(&params, &init_polarized(l)?, 50)?;
            sector = sector.max(max_abs_diff_vec(&a.total, &b.total));
            let full = eigendecompose(&build_floquet(&params, &BasisDescriptor::full(l)?, OperatorForm::DenseMatrix)?)?;
            let red = eigendecompose(&build_floquet(
                &params,
                &BasisDescriptor::pair_sector(l)?,
                OperatorForm::DenseMatrix,
            )?)?;
            for lam in &red.eigenvalues {
                let d = full.eigenvalues.iter().map(|mu| (lam - mu).norm()).fold(f64::INFINITY, f64::min);
                sector = sector.max(d);
            }
        }
    }
    let worst = gate.max(dense).max(sector);
    verdict(
        worst < 1e-10,
        format!("pair gate vs expm {gate:.1e}, gates vs dense vs expm {dense:.1e}, full vs sector {sector:.1e}"),
    )
}

fn theta_robustness() -> Result<Verdict> {
    let thetas = [0.0, PI / 16.0, PI / 8.0];
    let run = |params: &DriveParams| -> Result<Vec<(usize, f64)>> {
        thetas
            .iter()
            .map(|&th| {
                let tr = evolve_trace(params, &init_theta(8, th)?, 30)?;
                let env = tr
                    .normalized_total()
                    .iter()
                    .enumerate()
                    .map(|(n, v)| if n % 2 == 0 { *v } else { -v })
                    .fold(f64::INFINITY, f64::min);
                Ok((tr.alternating_prefix(), env))
            })
            .collect()
    };
    let nh = run(&DriveParams::non_reciprocal(8, 0.2))?;
    let h = run(&DriveParams::hermitian(8, 0.3))?;
    let nh_persists = nh.iter().all(|r| r.0 == 30);
    let h_fails = h.iter().any(|r| r.0 < 30);
    let show = |rows: &[(usize, f64)]| {
        rows.iter()
            .map(|(a, e)| format!("{a}/30 (min envelope {e:.2})"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    verdict(
        nh_persists && h_fails,
        format!(
            "θ = 0, π/16, π/8 at L = 8; NH ε=0.2 alternation: {}; H ε=0.3 alternation: {}",
            show(&nh),
            show(&h)
        ),
    )
}

type Criterion = (&'static str, Duration, fn() -> Result<Verdict>);

fn main() {
    let criteria: [Criterion; 10] = [
        ("ideal DTC", Duration::from_secs(1), ideal_dtc),
        ("spectrum realness + biorthogonality", Duration::from_secs(10), spectrum_realness),
        ("π-pairing", Duration::from_secs(10), pi_pairing),
        ("scaling exponents", Duration::from_secs(300), scaling_exponents),
        ("lifetime law", Duration::from_secs(30), lifetime_law),
        ("melting transition", Duration::from_secs(600), melting),
        ("γ-generalization", Duration::from_secs(600), gamma_generalization),
        ("symmetry certificates", Duration::from_secs(10), symmetry_certificates),
        ("oracle equivalence", Duration::from_secs(10), oracle_equivalence),
        ("θ-state robustness trend", Duration::from_secs(30), theta_robustness),
    ];
    let mut failures = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check));
        let elapsed = start.elapsed();
        let (pass, detail) = match outcome {
            Ok(Ok(v)) => (v.pass && elapsed <= *budget, v.detail),
            Ok(Err(e)) => (false, format!("error: {e}")),
            Err(_) => (false, "panicked".to_string()),
        };
        let timing = format!("{:.2} s of {} s", elapsed.as_secs_f64(), budget.as_secs());
        println!(
            "{} [{:>2}] {name}: {detail} [{timing}{}]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            if elapsed > *budget { ", over budget" } else { "" }
        );
        failures += usize::from(!pass);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failures, criteria.len());
    if failures > 0 && std::env::var("NHDTC_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
