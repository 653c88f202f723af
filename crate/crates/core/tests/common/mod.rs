//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use nhdtc::basis::BasisDescriptor;
use nhdtc::linalg::{CMatrix, C64};
use nhdtc::model::{hopping_hamiltonian, ising_hamiltonian, DriveParams};

/// `exp(a)` by scaling and squaring around a 30-term Taylor series.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.rows();
    let norm: f64 = (0..n)
        .map(|i| (0..n).map(|j| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = a.scale(C64::from(0.5f64.powi(squarings as i32)));
    let mut result = CMatrix::identity(n);
    let mut term = CMatrix::identity(n);
    for k in 1..=30 {
        term = term.matmul(&scaled).scale(C64::from(1.0 / k as f64));
        result = add(&result, &term);
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    result
}

pub fn add(a: &CMatrix, b: &CMatrix) -> CMatrix {
    CMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)] + b[(i, j)])
}

/// Hopping-phase scale: the rung rotation angle in units of `H_I / (J_z π/2)`.
pub fn hopping_scale(params: &DriveParams) -> f64 {
    params.swap_phase_base * 2.0 * params.t2 / (PI / 2.0)
}

/// `U_F = exp(−i c H_I) exp(−i t1 H_z)` in the full basis, built from the
/// Hamiltonians with a generic matrix exponential.
pub fn floquet_from_hamiltonian(params: &DriveParams) -> CMatrix {
    let desc = BasisDescriptor::full(params.l).unwrap();
    let hi = hopping_hamiltonian(params, &desc).unwrap();
    let hz = ising_hamiltonian(params, &desc);
    let minus_i = C64::new(0.0, -1.0);
    let hop = expm(&hi.scale(minus_i * hopping_scale(params)));
    let kick = expm(&hz.scale(minus_i * params.t1));
    hop.matmul(&kick)
}

/// Single-rung gate from the `L = 1` hopping Hamiltonian, reordered to
/// `(↑↑, ↑↓, ↓↑, ↓↓)`. Full-basis index is `a + 2b` with 1 = up.
pub fn pair_gate_oracle(params: &DriveParams) -> [[C64; 4]; 4] {
    let one = DriveParams { l: 1, ..*params };
    let desc = BasisDescriptor::full(1).unwrap();
    let hi = hopping_hamiltonian(&one, &desc).unwrap();
    let u = expm(&hi.scale(C64::new(0.0, -hopping_scale(params))));
    let order = [3usize, 1, 2, 0];
    let mut out = [[C64::new(0.0, 0.0); 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            out[r][c] = u[(order[r], order[c])];
        }
    }
    out
}

pub fn max_abs_diff_vec(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
