//! Parity, time reversal and the PT / unbroken-phase certificates.
//!
//! Operators act on the full basis of both chains. Two parities matter:
//! site reflection `j ↔ L−1−j` inside each chain, which commutes with the
//! Floquet operator for every `(ε_a, ε_b)`, and inversion of the two-leg
//! ladder (reflection combined with `a ↔ b`), which is the parity that makes
//! the non-reciprocal Hamiltonian PT-invariant.

use std::fmt;
use std::str::FromStr;

use crate::basis::{BasisDescriptor, BasisKind};
use crate::linalg::{CMatrix, C64, I, ONE, ZERO};
use crate::model::{build_floquet, hopping_hamiltonian, ising_hamiltonian, DriveParams, OperatorForm};
use crate::spectral::eigendecompose;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum ParityVariant {
    /// `j ↔ L−1−j` within each chain.
    SiteReflection,
    /// `a_j ↔ b_j`.
    ChainSwap,
    /// `a_j ↔ b_{L−1−j}`: point inversion of the ladder.
    #[default]
    LadderInversion,
}

impl ParityVariant {
    pub const ALL: [ParityVariant; 3] = [
        ParityVariant::SiteReflection,
        ParityVariant::ChainSwap,
        ParityVariant::LadderInversion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ParityVariant::SiteReflection => "site-reflection",
            ParityVariant::ChainSwap => "chain-swap",
            ParityVariant::LadderInversion => "ladder-inversion",
        }
    }

    /// Image of a full-basis index.
    pub fn map_index(self, index: usize, l: usize) -> usize {
        let mut out = 0;
        for j in 0..l {
            let a = (index >> j) & 1;
            let b = (index >> (l + j)) & 1;
            let (ta, tb) = match self {
                ParityVariant::SiteReflection => (l - 1 - j, l + (l - 1 - j)),
                ParityVariant::ChainSwap => (l + j, j),
                ParityVariant::LadderInversion => (l + (l - 1 - j), l - 1 - j),
            };
            out |= a << ta | b << tb;
        }
        out
    }
}

impl fmt::Display for ParityVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for ParityVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ParityVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown parity variant `{s}`")))
    }
}

fn full_dim(l: usize) -> Result<usize> {
    if l == 0 {
        return Err(Error::InvalidParam("L must be positive".into()));
    }
    Ok(BasisDescriptor::new(l, BasisKind::Full)?.dim())
}

/// Site-reflection parity as a permutation matrix.
pub fn build_parity(l: usize) -> Result<CMatrix> {
    build_parity_variant(l, ParityVariant::SiteReflection)
}

pub fn build_parity_variant(l: usize, variant: ParityVariant) -> Result<CMatrix> {
    let dim = full_dim(l)?;
    let mut p = CMatrix::zeros(dim, dim);
    for k in 0..dim {
        p[(variant.map_index(k, l), k)] = ONE;
    }
    Ok(p)
}

/// `W K`: a unitary `W` following complex conjugation `K` when flagged.
#[derive(Clone, Debug, PartialEq)]
pub struct AntiUnitaryOp {
    pub w: CMatrix,
    pub conjugate: bool,
}

impl AntiUnitaryOp {
    pub fn apply(&self, amps: &[C64]) -> Vec<C64> {
        if self.conjugate {
            let c: Vec<C64> = amps.iter().map(|a| a.conj()).collect();
            self.w.mul_vec(&c)
        } else {
            self.w.mul_vec(amps)
        }
    }

    /// Matrix of the operator applied twice.
    pub fn square(&self) -> CMatrix {
        if self.conjugate {
            self.w.matmul(&self.w.conj())
        } else {
            self.w.matmul(&self.w)
        }
    }

    /// `A X A⁻¹` for a linear operator `X`.
    pub fn conjugate_operator(&self, x: &CMatrix) -> CMatrix {
        let inner = if self.conjugate { x.conj() } else { x.clone() };
        self.w.matmul(&inner).matmul(&self.w.adjoint())
    }

    /// Left-multiplication by a unitary.
    pub fn after(&self, u: &CMatrix) -> AntiUnitaryOp {
        AntiUnitaryOp {
            w: u.matmul(&self.w),
            conjugate: self.conjugate,
        }
    }

    pub fn unitarity_defect(&self) -> f64 {
        self.w.matmul(&self.w.adjoint()).max_abs_diff(&CMatrix::identity(self.w.rows()))
    }
}

/// `T = (⊗ σ^y) K` over all `2L` spins. With bit 1 = up,
/// `σ^y|↑⟩ = i|↓⟩` and `σ^y|↓⟩ = −i|↑⟩`.
pub fn build_time_reversal(l: usize) -> Result<AntiUnitaryOp> {
    let dim = full_dim(l)?;
    let mask = dim - 1;
    let mut w = CMatrix::zeros(dim, dim);
    for k in 0..dim {
        let ups = k.count_ones();
        let downs = 2 * l as u32 - ups;
        w[(k ^ mask, k)] = I.powu(ups) * (-I).powu(downs);
    }
    Ok(AntiUnitaryOp { w, conjugate: true })
}

/// Phase `c` with `T² = c·I`, or `None` if the square is not scalar.
pub fn square_phase(op: &AntiUnitaryOp) -> Option<C64> {
    let sq = op.square();
    let c = sq[(0, 0)];
    (sq.max_abs_diff(&CMatrix::identity(sq.rows()).scale(c)) < 1e-12).then_some(c)
}

/// `P T` for the given parity.
pub fn build_pt(l: usize, parity: ParityVariant) -> Result<AntiUnitaryOp> {
    Ok(build_time_reversal(l)?.after(&build_parity_variant(l, parity)?))
}

/// Total `S^z = Σ (σ^{az} + σ^{bz})/2` as a diagonal.
pub fn total_sz_diagonal(l: usize) -> Result<Vec<f64>> {
    let dim = full_dim(l)?;
    Ok((0..dim)
        .map(|k| k.count_ones() as f64 - l as f64)
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryReport {
    pub l: usize,
    pub eps_a: f64,
    pub eps_b: f64,
    /// Parity used inside `PT`.
    pub pt_parity: ParityVariant,
    pub pt_ising: f64,
    pub pt_hopping: f64,
    /// Phase of `(PT)²`.
    pub pt_square_phase: Option<C64>,
    /// `‖[P, U_F]‖` with site-reflection `P`.
    pub parity_floquet: f64,
    pub parity_square: f64,
    pub max_imag_energy: f64,
    pub magnetization_floquet: f64,
}

impl SymmetryReport {
    /// Largest of the quantities required to vanish.
    pub fn worst_commutator(&self) -> f64 {
        self.pt_ising
            .max(self.pt_hopping)
            .max(self.parity_floquet)
            .max(self.parity_square)
    }

    /// `key: value` lines.
    pub fn to_text(&self) -> String {
        let phase = match self.pt_square_phase {
            Some(c) => format!("{:.16e} {:+.16e}i", c.re, c.im),
            None => "not scalar".into(),
        };
        [
            format!("L: {}", self.l),
            format!("eps_a: {:.16e}", self.eps_a),
            format!("eps_b: {:.16e}", self.eps_b),
            format!("pt_parity: {}", self.pt_parity),
            format!("pt_commutator_ising: {:.16e}", self.pt_ising),
            format!("pt_commutator_hopping: {:.16e}", self.pt_hopping),
            format!("pt_square_phase: {phase}"),
            format!("parity_floquet_commutator: {:.16e}", self.parity_floquet),
            format!("parity_square_deviation: {:.16e}", self.parity_square),
            format!("max_imag_quasienergy: {:.16e}", self.max_imag_energy),
            format!("magnetization_floquet_commutator: {:.16e}", self.magnetization_floquet),
        ]
        .join("\n")
            + "\n"
    }
}

pub fn pt_report(params: &DriveParams) -> Result<SymmetryReport> {
    pt_report_with(params, ParityVariant::default())
}

pub fn pt_report_with(params: &DriveParams, pt_parity: ParityVariant) -> Result<SymmetryReport> {
    params.validate()?;
    let l = params.l;
    let desc = BasisDescriptor::full(l)?;
    let pt = build_pt(l, pt_parity)?;
    let hz = ising_hamiltonian(params, &desc);
    let hi = hopping_hamiltonian(params, &desc)?;
    let pt_ising = pt.conjugate_operator(&hz).max_abs_diff(&hz);
    let pt_hopping = pt.conjugate_operator(&hi).max_abs_diff(&hi);

    let u = build_floquet(params, &desc, OperatorForm::DenseMatrix)?;
    let uf = u.dense().expect("dense form requested");
    let p = build_parity(l)?;
    let parity_floquet = p.commutator(uf).max_abs();
    let parity_square = p.matmul(&p).max_abs_diff(&CMatrix::identity(p.rows()));

    let sz = total_sz_diagonal(l)?;
    let mut magnetization_floquet: f64 = 0.0;
    for i in 0..uf.rows() {
        for j in 0..uf.cols() {
            let v = uf[(i, j)];
            if v != ZERO {
                magnetization_floquet = magnetization_floquet.max(((sz[i] - sz[j]) * v).norm());
            }
        }
    }

    let spectrum = eigendecompose(&u)?;
    Ok(SymmetryReport {
        l,
        eps_a: params.eps_a,
        eps_b: params.eps_b,
        pt_parity,
        pt_ising,
        pt_hopping,
        pt_square_phase: square_phase(&pt),
        parity_floquet,
        parity_square,
        max_imag_energy: spectrum.max_decay(),
        magnetization_floquet,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{encode, ConfigIndex, Spin::*};

    fn sigma_z(l: usize, bit: usize) -> CMatrix {
        let dim = 1 << (2 * l);
        let diag: Vec<C64> = (0..dim)
            .map(|k| C64::from(if k >> bit & 1 == 1 { 1.0 } else { -1.0 }))
            .collect();
        CMatrix::diagonal(&diag)
    }

    #[test]
    fn reflection_example_at_two_sites() {
        let p = build_parity(2).unwrap();
        let ConfigIndex(from) = encode(&[Up, Down, Down, Up], 2).unwrap();
        let ConfigIndex(to) = encode(&[Down, Up, Up, Down], 2).unwrap();
        assert_eq!(p[(to, from)], ONE);
    }

    #[test]
    fn parities_are_involutions() {
        for l in 1..=4 {
            for v in ParityVariant::ALL {
                let p = build_parity_variant(l, v).unwrap();
                assert_eq!(p.matmul(&p), CMatrix::identity(p.rows()), "{v} L={l}");
            }
        }
    }

    #[test]
    fn time_reversal_single_rung() {
        let t = build_time_reversal(1).unwrap();
        let sy = [[ZERO, -I], [I, ZERO]];
        // bit 0 is a, bit 1 is b; index 1 = up. Row/col of σ^y use (↑, ↓).
        let slot = |bit: usize| 1 - bit;
        for r in 0..4 {
            for c in 0..4 {
                let expect = sy[slot(r & 1)][slot(c & 1)] * sy[slot(r >> 1)][slot(c >> 1)];
                assert_eq!(t.w[(r, c)], expect, "({r},{c})");
            }
        }
        assert!(t.unitarity_defect() < 1e-15);
    }

    #[test]
    fn time_reversal_twice_returns_state() {
        let t = build_time_reversal(2).unwrap();
        let phase = square_phase(&t).unwrap();
        for k in 0..16 {
            let mut e = vec![ZERO; 16];
            e[k] = ONE;
            let twice = t.apply(&t.apply(&e));
            for (i, v) in twice.iter().enumerate() {
                let want = if i == k { phase } else { ZERO };
                assert!((v - want).norm() < 1e-15);
            }
        }
        assert_eq!(phase, ONE);
    }

    #[test]
    fn pt_flips_and_reflects_sigma_z() {
        let l = 2;
        let pt = build_pt(l, ParityVariant::SiteReflection).unwrap();
        for chain in 0..2 {
            for j in 0..l {
                let z = sigma_z(l, chain * l + j);
                let image = sigma_z(l, chain * l + (l - 1 - j)).scale(-ONE);
                assert_eq!(pt.conjugate_operator(&z).max_abs_diff(&image), 0.0);
            }
        }
    }

    #[test]
    fn ladder_pt_certifies_non_reciprocal_point() {
        let r = pt_report(&DriveParams::non_reciprocal(3, 0.3)).unwrap();
        assert!(r.pt_ising < 1e-10 && r.pt_hopping < 1e-10, "{r:?}");
        assert!(r.parity_floquet < 1e-10);
        assert_eq!(r.parity_square, 0.0);
        assert!(r.max_imag_energy < 1e-8);
        assert_eq!(r.magnetization_floquet, 0.0);
    }

    #[test]
    fn site_reflection_pt_exchanges_hopping_amplitudes() {
        let params = DriveParams::non_reciprocal(3, 0.3);
        let r = pt_report_with(&params, ParityVariant::SiteReflection).unwrap();
        let ja = std::f64::consts::PI / 2.0 * 1.3;
        let jb = std::f64::consts::PI / 2.0 * 0.7;
        assert!((r.pt_hopping - (ja - jb)).abs() < 1e-12, "{}", r.pt_hopping);
        assert!(r.pt_ising < 1e-10);
        let herm = pt_report_with(&DriveParams::hermitian(3, 0.4), ParityVariant::SiteReflection).unwrap();
        assert!(herm.worst_commutator() < 1e-10);
    }

    #[test]
    fn report_text_has_one_line_per_field() {
        let r = pt_report(&DriveParams::hermitian(2, 0.1)).unwrap();
        let text = r.to_text();
        assert_eq!(text.lines().count(), 11);
        assert!(text.contains("pt_parity: ladder-inversion"));
    }

    #[test]
    fn parity_variant_parses() {
        for v in ParityVariant::ALL {
            assert_eq!(v.name().parse::<ParityVariant>().unwrap(), v);
        }
        assert!("mirror".parse::<ParityVariant>().is_err());
    }
}
