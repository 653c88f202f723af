//! Biorthogonal Floquet spectrum of a (generally non-unitary) operator.
//!
//! The dense operator is split into the connected components of its
//! nonzero pattern; each block is diagonalized separately, so exactly
//! conserved quantities never mix eigenvectors of different sectors even
//! when their eigenvalues coincide. Inside a block, right eigenvectors of
//! numerically coincident eigenvalues are orthonormalized and left
//! eigenvectors are taken as the rows of the inverse eigenvector matrix,
//! which makes `⟨Φ_l^L|Φ_k^R⟩ = δ_lk` hold inside degenerate clusters too.

use std::f64::consts::PI;

use faer::linalg::solvers::DenseSolveCore;

use crate::dynamics::StateVector;
use crate::error::{Error, Result};
use crate::linalg::{inner, norm, CMatrix, C64, ONE, ZERO};
use crate::model::{build_floquet_with_limits, DriveParams, FloquetOperator, Limits, OperatorForm};
use crate::basis::BasisDescriptor;

/// Quasienergy `E` of an eigenvalue `λ = |λ| e^{−iE}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuasiEnergy {
    /// `−arg λ`, folded into `(−π, π]`.
    pub phase: f64,
    /// `−ln |λ|`; zero for a real quasienergy.
    pub decay: f64,
}

impl QuasiEnergy {
    pub fn from_eigenvalue(lambda: C64) -> Self {
        let mut phase = -lambda.arg();
        if phase <= -PI {
            phase += 2.0 * PI;
        }
        Self {
            phase,
            decay: -lambda.norm().ln(),
        }
    }

    pub fn eigenvalue(&self) -> C64 {
        C64::from_polar((-self.decay).exp(), -self.phase)
    }
}

/// Circular distance of two phases, reduced to `[0, π]`.
pub fn circular_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralOptions {
    /// Largest tolerated eigenvalue condition number `‖R_k‖·‖L_k‖`.
    pub condition_threshold: f64,
    /// Relative tolerance (times block dimension) for grouping eigenvalues.
    pub cluster_tolerance: f64,
    pub limits: Limits,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            condition_threshold: 1e8,
            cluster_tolerance: 1e-8,
            limits: Limits::default(),
        }
    }
}

/// Eigenpairs with biorthonormal right and left vectors stored as columns.
#[derive(Clone, Debug)]
pub struct BiorthogonalSpectrum {
    pub desc: BasisDescriptor,
    pub energies: Vec<QuasiEnergy>,
    pub eigenvalues: Vec<C64>,
    pub right: CMatrix,
    pub left: CMatrix,
    /// Largest `‖R_k‖·‖L_k‖` over the spectrum.
    pub condition: f64,
}

impl BiorthogonalSpectrum {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn max_decay(&self) -> f64 {
        self.energies.iter().map(|e| e.decay.abs()).fold(0.0, f64::max)
    }

    /// `max |⟨Φ_l^L|Φ_k^R⟩ − δ_lk|`.
    pub fn biorthogonality_residual(&self) -> f64 {
        self.left
            .adjoint()
            .matmul(&self.right)
            .max_abs_diff(&CMatrix::identity(self.dim()))
    }

    /// `max |Σ_k |Φ_k^R⟩⟨Φ_k^L| − 1|`.
    pub fn completeness_residual(&self) -> f64 {
        self.right
            .matmul(&self.left.adjoint())
            .max_abs_diff(&CMatrix::identity(self.dim()))
    }

    /// `max |Σ_k λ_k |Φ_k^R⟩⟨Φ_k^L| − U|`.
    pub fn reconstruction_residual(&self, u: &CMatrix) -> f64 {
        self.reconstruct().max_abs_diff(u)
    }

    pub fn reconstruct(&self) -> CMatrix {
        let scaled = self.right.matmul(&CMatrix::diagonal(&self.eigenvalues));
        scaled.matmul(&self.left.adjoint())
    }

    /// `max_k ‖Φ_k^R − Φ_k^L‖`.
    pub fn left_right_distance(&self) -> f64 {
        self.right.max_abs_diff(&self.left)
    }

    pub fn right_vector(&self, k: usize) -> Vec<C64> {
        self.right.column(k)
    }

    pub fn left_vector(&self, k: usize) -> Vec<C64> {
        self.left.column(k)
    }
}

pub fn eigendecompose(u: &FloquetOperator) -> Result<BiorthogonalSpectrum> {
    eigendecompose_with(u, &SpectralOptions::default())
}

pub fn eigendecompose_with(u: &FloquetOperator, opts: &SpectralOptions) -> Result<BiorthogonalSpectrum> {
    let dim = u.desc().dim();
    if dim > opts.limits.dense_dim {
        return Err(Error::Resource {
            what: "dense eigensolve",
            required: dim,
            limit: opts.limits.dense_dim,
        });
    }
    let owned;
    let matrix = match u.dense() {
        Some(m) => m,
        None => {
            owned = u.to_dense();
            &owned
        }
    };
    let mut spec = decompose_matrix(matrix, opts)?;
    spec.desc = *u.desc();
    Ok(spec)
}

/// Decomposes an arbitrary square matrix; the descriptor is filled in by the caller.
fn decompose_matrix(m: &CMatrix, opts: &SpectralOptions) -> Result<BiorthogonalSpectrum> {
    let dim = m.rows();
    let mut pairs: Vec<(C64, Vec<(usize, C64)>, Vec<(usize, C64)>)> = Vec::with_capacity(dim);
    for block in connected_blocks(m) {
        decompose_block(m, &block, opts, &mut pairs)?;
    }
    pairs.sort_by(|a, b| {
        let ea = QuasiEnergy::from_eigenvalue(a.0);
        let eb = QuasiEnergy::from_eigenvalue(b.0);
        ea.phase
            .total_cmp(&eb.phase)
            .then(ea.decay.total_cmp(&eb.decay))
            .then(a.1[0].0.cmp(&b.1[0].0))
    });
    let mut right = CMatrix::zeros(dim, dim);
    let mut left = CMatrix::zeros(dim, dim);
    let mut eigenvalues = Vec::with_capacity(dim);
    let mut condition: f64 = 0.0;
    for (k, (lambda, r, l)) in pairs.into_iter().enumerate() {
        let nr: f64 = r.iter().map(|(_, z)| z.norm_sqr()).sum::<f64>().sqrt();
        let nl: f64 = l.iter().map(|(_, z)| z.norm_sqr()).sum::<f64>().sqrt();
        condition = condition.max(nr * nl);
        for (i, z) in r {
            right[(i, k)] = z;
        }
        for (i, z) in l {
            left[(i, k)] = z;
        }
        eigenvalues.push(lambda);
    }
    if !(condition <= opts.condition_threshold) {
        return Err(Error::NearDefective {
            condition,
            threshold: opts.condition_threshold,
        });
    }
    Ok(BiorthogonalSpectrum {
        desc: BasisDescriptor::pair_sector(1).expect("placeholder descriptor"),
        energies: eigenvalues.iter().map(|l| QuasiEnergy::from_eigenvalue(*l)).collect(),
        eigenvalues,
        right,
        left,
        condition,
    })
}

/// Connected components of the graph with an edge `i ~ k` whenever
/// `m[i][k] ≠ 0` or `m[k][i] ≠ 0`; each component sorted ascending.
pub fn connected_blocks(m: &CMatrix) -> Vec<Vec<usize>> {
    let n = m.rows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for k in 0..n {
            if m[(i, k)] != ZERO {
                let (ri, rk) = (find(&mut parent, i), find(&mut parent, k));
                if ri != rk {
                    parent[ri.max(rk)] = ri.min(rk);
                }
            }
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[slot[r]].push(i);
    }
    blocks
}

type SparseVec = Vec<(usize, C64)>;

fn decompose_block(
    m: &CMatrix,
    block: &[usize],
    opts: &SpectralOptions,
    out: &mut Vec<(C64, SparseVec, SparseVec)>,
) -> Result<()> {
    let n = block.len();
    let sub = CMatrix::from_fn(n, n, |i, k| m[(block[i], block[k])]);
    let (values, mut vectors) = if n == 1 {
        (vec![sub[(0, 0)]], CMatrix::identity(1))
    } else {
        let evd = sub
            .to_faer()
            .eigen()
            .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
        let s = evd.S().column_vector();
        let values: Vec<C64> = (0..n).map(|i| s[i]).collect();
        (values, CMatrix::from_faer(evd.U()))
    };

    let tol = opts.cluster_tolerance * n as f64;
    for cluster in eigenvalue_clusters(&values, tol) {
        orthonormalize_columns(&mut vectors, &cluster);
    }

    // orthonormalizing a cluster is only valid if the cluster spans an
    // eigenspace; a defective block shows up as a large residual here
    let scale = sub.max_abs().max(1.0);
    let applied = sub.matmul(&vectors);
    for k in 0..n {
        let residual = (0..n)
            .map(|i| (applied[(i, k)] - values[k] * vectors[(i, k)]).norm())
            .fold(0.0, f64::max);
        if !(residual <= 1e-8 * scale * n as f64) {
            return Err(Error::NearDefective {
                condition: f64::INFINITY,
                threshold: opts.condition_threshold,
            });
        }
    }

    let inv = CMatrix::from_faer(vectors.to_faer().partial_piv_lu().inverse().as_ref());
    // columns of (V⁻¹)† are the left eigenvectors
    let left = inv.adjoint();

    for k in 0..n {
        let mut r = vectors.column(k);
        let mut l = left.column(k);
        // ⟨L|R⟩ is 1 by construction; balance the norms and fix the phase
        // so that the largest component of R is real positive.
        let s = (norm(&l) / norm(&r)).sqrt();
        let pivot = r
            .iter()
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or(ONE);
        let phase = pivot.conj() / pivot.norm();
        r.iter_mut().for_each(|z| *z *= phase * s);
        l.iter_mut().for_each(|z| *z *= phase / s);
        let to_sparse = |v: Vec<C64>| -> SparseVec {
            block.iter().copied().zip(v).collect()
        };
        out.push((values[k], to_sparse(r), to_sparse(l)));
    }
    Ok(())
}

/// Single-linkage groups of eigenvalue indices closer than `tol`.
fn eigenvalue_clusters(values: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut assigned = vec![false; n];
    let mut clusters = Vec::new();
    for start in 0..n {
        if assigned[start] {
            continue;
        }
        assigned[start] = true;
        let mut cluster = vec![start];
        let mut cursor = 0;
        while cursor < cluster.len() {
            let current = values[cluster[cursor]];
            for k in 0..n {
                if !assigned[k] && (values[k] - current).norm() < tol {
                    assigned[k] = true;
                    cluster.push(k);
                }
            }
            cursor += 1;
        }
        cluster.sort_unstable();
        clusters.push(cluster);
    }
    clusters
}

/// Modified Gram–Schmidt over the given columns (unit-normalizes singletons).
fn orthonormalize_columns(v: &mut CMatrix, cols: &[usize]) {
    let mut done: Vec<Vec<C64>> = Vec::with_capacity(cols.len());
    for &c in cols {
        let mut x = v.column(c);
        for _ in 0..2 {
            for q in &done {
                let proj = inner(q, &x);
                x.iter_mut().zip(q).for_each(|(xi, qi)| *xi -= proj * qi);
            }
        }
        let nx = norm(&x);
        if nx > 0.0 {
            x.iter_mut().for_each(|z| *z /= nx);
        }
        v.set_column(c, &x);
        done.push(x);
    }
}

/// Largest distance between an eigenvalue of `U` and the conjugate of its
/// greedily matched eigenvalue of `U†`, with both spectra computed
/// independently.
pub fn adjoint_eigenvalue_mismatch(u: &CMatrix) -> Result<f64> {
    let ev = |m: &CMatrix| -> Result<Vec<C64>> {
        m.to_faer()
            .eigenvalues()
            .map_err(|e| Error::Eigensolver(format!("{e:?}")))
    };
    let direct = ev(u)?;
    let mut adjoint: Vec<Option<C64>> = ev(&u.adjoint())?.into_iter().map(Some).collect();
    let mut worst: f64 = 0.0;
    for lambda in direct {
        let (best, dist) = adjoint
            .iter()
            .enumerate()
            .filter_map(|(i, m)| m.map(|mu| (i, (mu.conj() - lambda).norm())))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or_else(|| Error::Eigensolver("adjoint spectrum exhausted".into()))?;
        adjoint[best] = None;
        worst = worst.max(dist);
    }
    Ok(worst)
}

/// Weights `A_k = ⟨ref|Φ_k^R⟩⟨Φ_k^L|ref⟩`.
pub fn overlap_weights(spec: &BiorthogonalSpectrum, reference: &StateVector) -> Result<Vec<C64>> {
    if reference.desc != spec.desc {
        return Err(Error::Dimension {
            expected: spec.desc.dim(),
            got: reference.desc.dim(),
        });
    }
    let psi = &reference.amps;
    let n = spec.dim();
    let mut weights = vec![ZERO; n];
    for (i, p) in psi.iter().enumerate() {
        if *p == ZERO {
            continue;
        }
        for k in 0..n {
            weights[k] += p.conj() * spec.right[(i, k)];
        }
    }
    let mut left_proj = vec![ZERO; n];
    for (i, p) in psi.iter().enumerate() {
        if *p == ZERO {
            continue;
        }
        for k in 0..n {
            left_proj[k] += spec.left[(i, k)].conj() * p;
        }
    }
    weights.iter_mut().zip(&left_proj).for_each(|(w, l)| *w *= l);
    Ok(weights)
}

/// The dominant π-paired eigenstates of a reference state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PiPair {
    pub k_plus: usize,
    pub k_minus: usize,
    pub weight_plus: C64,
    pub weight_minus: C64,
    /// Circular quasienergy gap `ΔE ∈ [0, π]`.
    pub gap: f64,
    /// `δE = |π − ΔE|`.
    pub deviation: f64,
}

impl PiPair {
    pub fn dominant_weight(&self) -> f64 {
        self.weight_plus.norm() + self.weight_minus.norm()
    }

    /// Periods after which the state has moved to its inversion partner,
    /// `τ = π / (2 δE)`.
    pub fn lifetime(&self) -> f64 {
        PI / (2.0 * self.deviation)
    }
}

/// Pair search settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairingOptions {
    /// Minimum `|A_+| + |A_−|` for the pairing to be meaningful.
    pub dominance_floor: f64,
    /// Allowed `|ΔE − π|` for candidate pairs.
    pub gap_window: f64,
    /// How many of the heaviest eigenstates are searched.
    pub candidates: usize,
}

impl Default for PairingOptions {
    fn default() -> Self {
        Self {
            dominance_floor: 0.5,
            gap_window: 0.5,
            candidates: 16,
        }
    }
}

impl PairingOptions {
    /// Settings for `δE(L)` scans: deep in the fit window the polarized
    /// state spreads over many eigenstates, so only a token floor is kept.
    pub fn scaling() -> Self {
        Self {
            dominance_floor: 0.05,
            ..Self::default()
        }
    }
}

pub fn find_pi_pair(spec: &BiorthogonalSpectrum, reference: &StateVector) -> Result<PiPair> {
    find_pi_pair_with(spec, reference, &PairingOptions::default())
}

pub fn find_pi_pair_with(
    spec: &BiorthogonalSpectrum,
    reference: &StateVector,
    opts: &PairingOptions,
) -> Result<PiPair> {
    let weights = overlap_weights(spec, reference)?;
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[b].norm().total_cmp(&weights[a].norm()).then(a.cmp(&b)));
    order.truncate(opts.candidates.max(2));

    let mut best: Option<(f64, usize, usize)> = None;
    for (x, &k1) in order.iter().enumerate() {
        for &k2 in &order[x + 1..] {
            let gap = circular_gap(spec.energies[k1].phase, spec.energies[k2].phase);
            if (gap - PI).abs() > opts.gap_window {
                continue;
            }
            let total = weights[k1].norm() + weights[k2].norm();
            if best.map_or(true, |(b, _, _)| total > b + 1e-12) {
                best = Some((total, k1, k2));
            }
        }
    }
    let top_two = order.iter().take(2).map(|&k| weights[k].norm()).sum::<f64>();
    let (total, k1, k2) = best.ok_or(Error::WeakPairing {
        dominant: top_two,
        floor: opts.dominance_floor,
    })?;
    if total < opts.dominance_floor {
        return Err(Error::WeakPairing {
            dominant: total,
            floor: opts.dominance_floor,
        });
    }
    let gap = circular_gap(spec.energies[k1].phase, spec.energies[k2].phase);
    Ok(PiPair {
        k_plus: k1,
        k_minus: k2,
        weight_plus: weights[k1],
        weight_minus: weights[k2],
        gap,
        deviation: (PI - gap).abs(),
    })
}

/// Two-period return and transfer probabilities, measured and predicted.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReturnProbability {
    /// `|⟨ref|U_F²|ref⟩|²` from the biorthogonal expansion.
    pub p_stay: f64,
    /// `|⟨ref̃|U_F²|ref⟩|²` from the biorthogonal expansion.
    pub p_swap: f64,
    /// The same two quantities from direct operator application.
    pub p_stay_direct: f64,
    pub p_swap_direct: f64,
    /// `cos²(δE)` and `sin²(δE)` of the dominant pair.
    pub predicted_stay: f64,
    pub predicted_swap: f64,
    /// `1 − (|A_+| + |A_−|)`: weight outside the dominant pair.
    pub leaked_weight: f64,
    pub pair: PiPair,
}

pub fn return_probability_check(params: &DriveParams, reference: &StateVector) -> Result<ReturnProbability> {
    let u = build_floquet_with_limits(params, &reference.desc, OperatorForm::DenseMatrix, &Limits::default())?;
    let spec = eigendecompose(&u)?;
    let pair = find_pi_pair(&spec, reference)?;
    let partner = reference.inverted();

    // ⟨a|U²|ref⟩ = Σ_l λ_l² ⟨a|Φ_l^R⟩⟨Φ_l^L|ref⟩
    let expand = |bra: &StateVector| -> C64 {
        (0..spec.dim())
            .map(|l| {
                let r = spec.right_vector(l);
                let lv = spec.left_vector(l);
                spec.eigenvalues[l].powi(2) * inner(&bra.amps, &r) * inner(&lv, &reference.amps)
            })
            .sum()
    };
    let mut evolved = reference.amps.clone();
    u.apply(&mut evolved);
    u.apply(&mut evolved);

    Ok(ReturnProbability {
        p_stay: expand(reference).norm_sqr(),
        p_swap: expand(&partner).norm_sqr(),
        p_stay_direct: inner(&reference.amps, &evolved).norm_sqr(),
        p_swap_direct: inner(&partner.amps, &evolved).norm_sqr(),
        predicted_stay: pair.deviation.cos().powi(2),
        predicted_swap: pair.deviation.sin().powi(2),
        leaked_weight: 1.0 - pair.dominant_weight(),
        pair,
    })
}

/// Builds the dense operator in `desc`, decomposes it and finds the π pair
/// of the polarized state.
pub fn gap_deviation(params: &DriveParams, desc: &BasisDescriptor, pairing: &PairingOptions) -> Result<PiPair> {
    let u = build_floquet_with_limits(params, desc, OperatorForm::DenseMatrix, &Limits::default())?;
    let spec = eigendecompose(&u)?;
    find_pi_pair_with(&spec, &StateVector::polarized(*desc), pairing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_floquet;

    fn dense(p: &DriveParams, desc: &BasisDescriptor) -> FloquetOperator {
        build_floquet(p, desc, OperatorForm::DenseMatrix).unwrap()
    }

    #[test]
    fn quasienergy_branch() {
        let e = QuasiEnergy::from_eigenvalue(C64::new(-1.0, 0.0));
        assert_eq!(e.phase, PI);
        let e = QuasiEnergy::from_eigenvalue(C64::new(-1.0, -0.0));
        assert_eq!(e.phase, PI);
        let e = QuasiEnergy::from_eigenvalue(C64::from_polar(2.0, -0.3));
        assert!((e.phase - 0.3).abs() < 1e-15);
        assert!((e.decay + 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn circular_gap_reduction() {
        assert!((circular_gap(3.0, -3.0) - (2.0 * PI - 6.0)).abs() < 1e-15);
        assert!((circular_gap(0.1, 0.1 + PI) - PI).abs() < 1e-15);
        assert_eq!(circular_gap(1.0, 1.0), 0.0);
    }

    #[test]
    fn blocks_follow_nonzero_pattern() {
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 2)] = ONE;
        m[(3, 1)] = ONE;
        assert_eq!(connected_blocks(&m), vec![vec![0, 2], vec![1, 3]]);
    }

    #[test]
    fn invariants_hold_non_reciprocal() {
        let desc = BasisDescriptor::pair_sector(4).unwrap();
        let u = dense(&DriveParams::non_reciprocal(4, 0.3), &desc);
        let spec = eigendecompose(&u).unwrap();
        assert!(spec.max_decay() < 1e-8, "decay {}", spec.max_decay());
        assert!(spec.biorthogonality_residual() < 1e-8);
        assert!(spec.completeness_residual() < 1e-7);
        assert!(spec.reconstruction_residual(u.dense().unwrap()) < 1e-7);
    }

    #[test]
    fn reciprocal_left_equals_right() {
        let desc = BasisDescriptor::pair_sector(4).unwrap();
        for eps in [0.0, 0.2] {
            let spec = eigendecompose(&dense(&DriveParams::hermitian(4, eps), &desc)).unwrap();
            assert!(spec.left_right_distance() < 1e-8);
        }
    }

    #[test]
    fn full_basis_reconstruction_l3() {
        let desc = BasisDescriptor::full(3).unwrap();
        let u = dense(&DriveParams::new(3, 0.2, -0.35), &desc);
        let spec = eigendecompose(&u).unwrap();
        assert!(spec.reconstruction_residual(u.dense().unwrap()) < 1e-7);
        assert!(spec.biorthogonality_residual() < 1e-8);
    }

    #[test]
    fn ideal_weights_are_two_halves() {
        let desc = BasisDescriptor::pair_sector(4).unwrap();
        let spec = eigendecompose(&dense(&DriveParams::new(4, 0.0, 0.0), &desc)).unwrap();
        let w = overlap_weights(&spec, &StateVector::polarized(desc)).unwrap();
        let mut nonzero: Vec<C64> = w.into_iter().filter(|z| z.norm() > 1e-12).collect();
        assert_eq!(nonzero.len(), 2);
        nonzero.iter_mut().for_each(|z| assert!((*z - 0.5).norm() < 1e-12));
        let pair = find_pi_pair(&spec, &StateVector::polarized(desc)).unwrap();
        assert!(pair.deviation < 1e-14);
    }

    #[test]
    fn weights_sum_to_one() {
        let desc = BasisDescriptor::pair_sector(4).unwrap();
        let spec = eigendecompose(&dense(&DriveParams::new(4, 0.2, -0.2), &desc)).unwrap();
        let total: C64 = overlap_weights(&spec, &StateVector::polarized(desc)).unwrap().iter().sum();
        assert!((total - ONE).norm() < 1e-8);
    }

    #[test]
    fn cat_states_select_single_eigenstate() {
        let desc = BasisDescriptor::pair_sector(6).unwrap();
        for p in [DriveParams::hermitian(6, 0.05), DriveParams::non_reciprocal(6, 0.05)] {
            let spec = eigendecompose(&dense(&p, &desc)).unwrap();
            for sign in [1.0, -1.0] {
                let w = overlap_weights(&spec, &StateVector::cat(desc, sign)).unwrap();
                let max = w.iter().map(|z| z.norm()).fold(0.0, f64::max);
                assert!(max > 0.9, "max cat weight {max}");
            }
        }
    }

    #[test]
    fn weak_pairing_reported() {
        let desc = BasisDescriptor::pair_sector(5).unwrap();
        let spec = eigendecompose(&dense(&DriveParams::hermitian(5, 0.2), &desc)).unwrap();
        let opts = PairingOptions { dominance_floor: 1.5, ..PairingOptions::default() };
        assert!(matches!(
            find_pi_pair_with(&spec, &StateVector::polarized(desc), &opts),
            Err(Error::WeakPairing { .. })
        ));
    }

    #[test]
    fn ideal_return_probabilities() {
        let desc = BasisDescriptor::pair_sector(4).unwrap();
        let r = return_probability_check(&DriveParams::new(4, 0.0, 0.0), &StateVector::polarized(desc)).unwrap();
        assert!((r.p_stay - 1.0).abs() < 1e-12);
        assert!(r.p_swap < 1e-12);
        assert!((r.p_stay_direct - 1.0).abs() < 1e-12);
    }

    #[test]
    fn adjoint_spectrum_matches() {
        let desc = BasisDescriptor::pair_sector(5).unwrap();
        let u = dense(&DriveParams::non_reciprocal(5, 0.3), &desc);
        assert!(adjoint_eigenvalue_mismatch(u.dense().unwrap()).unwrap() < 1e-10);
    }

    #[test]
    fn dense_guard_applies_to_eigensolve() {
        let desc = BasisDescriptor::pair_sector(5).unwrap();
        let u = build_floquet(&DriveParams::new(5, 0.1, 0.1), &desc, OperatorForm::GateSequence).unwrap();
        let opts = SpectralOptions { limits: Limits { dense_dim: 16, ..Limits::default() }, ..SpectralOptions::default() };
        assert!(matches!(eigendecompose_with(&u, &opts), Err(Error::Resource { .. })));
    }

    #[test]
    fn defective_matrix_is_rejected() {
        // a Jordan block has no eigenbasis
        let mut m = CMatrix::identity(2);
        m[(0, 1)] = ONE;
        let opts = SpectralOptions::default();
        assert!(matches!(decompose_matrix(&m, &opts), Err(Error::NearDefective { .. }) | Err(Error::Eigensolver(_))));
    }
}
