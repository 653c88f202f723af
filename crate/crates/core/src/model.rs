//! Two-chain Floquet protocol: an Ising phase kick on each chain followed
//! by rung-local (generally non-reciprocal) hopping gates.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::basis::{BasisDescriptor, BasisKind};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, I, ONE, ZERO};

/// Swap angle under which the ideal hopping gate is a perfect rung swap.
pub const CALIBRATED_SWAP_PHASE: f64 = PI / 2.0;

/// Swap angle obtained by reading `J = J_z π/2`, `t2 = 1/(2 J_z)` and the
/// `σ^±` normalization literally. The ideal gate is then only a half swap.
pub const LITERAL_SWAP_PHASE: f64 = PI / 4.0;

/// Physical parameters of one drive protocol.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveParams {
    pub l: usize,
    pub eps_a: f64,
    pub eps_b: f64,
    pub jz: f64,
    pub t1: f64,
    pub t2: f64,
    pub swap_phase_base: f64,
}

impl DriveParams {
    /// Default timing `t1 = t2 = 1/(2 J_z)` with `J_z = 1` and the
    /// calibrated swap angle.
    pub fn new(l: usize, eps_a: f64, eps_b: f64) -> Self {
        Self {
            l,
            eps_a,
            eps_b,
            jz: 1.0,
            t1: 0.5,
            t2: 0.5,
            swap_phase_base: CALIBRATED_SWAP_PHASE,
        }
    }

    /// Reciprocal imperfection `(ε, ε)`.
    pub fn hermitian(l: usize, eps: f64) -> Self {
        Self::new(l, eps, eps)
    }

    /// Non-reciprocal imperfection `(ε, −ε)`.
    pub fn non_reciprocal(l: usize, eps: f64) -> Self {
        Self::new(l, eps, -eps)
    }

    /// Asymmetric non-reciprocal imperfection `(ε, −(1+γ)ε)`.
    pub fn skewed(l: usize, eps: f64, gamma: f64) -> Self {
        Self::new(l, eps, -(1.0 + gamma) * eps)
    }

    pub fn with_l(mut self, l: usize) -> Self {
        self.l = l;
        self
    }

    pub fn period(&self) -> f64 {
        self.t1 + self.t2
    }

    pub fn is_reciprocal(&self) -> bool {
        self.eps_a == self.eps_b
    }

    /// Rotation angle of the hopping gate. Scales linearly with the hopping
    /// duration and equals `swap_phase_base` at the default `t2`.
    pub fn swap_angle(&self) -> f64 {
        self.swap_phase_base * 2.0 * self.jz * self.t2
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t1 > 0.0 && self.t2 > 0.0) {
            return Err(Error::InvalidParam(format!(
                "phase durations must be positive (t1 = {}, t2 = {})",
                self.t1, self.t2
            )));
        }
        if !(self.jz > 0.0) {
            return Err(Error::InvalidParam(format!("J_z must be positive, got {}", self.jz)));
        }
        if ![self.eps_a, self.eps_b, self.swap_phase_base].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParam("non-finite drive parameter".into()));
        }
        Ok(())
    }
}

/// Family of imperfection pairs `(ε_a, ε_b)` parametrized by a single `ε`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Protocol {
    /// `(ε, ε)`: reciprocal, unitary drive.
    Hermitian,
    /// `(ε, −ε)`.
    NonReciprocal,
    /// `(ε, −(1+γ)ε)`.
    Skewed { gamma: f64 },
}

impl Protocol {
    pub fn params(&self, l: usize, eps: f64) -> DriveParams {
        match *self {
            Protocol::Hermitian => DriveParams::hermitian(l, eps),
            Protocol::NonReciprocal => DriveParams::non_reciprocal(l, eps),
            Protocol::Skewed { gamma } => DriveParams::skewed(l, eps, gamma),
        }
    }

    /// Applies this protocol's imperfections to a template, keeping its
    /// timing and calibration.
    pub fn apply(&self, template: &DriveParams, l: usize, eps: f64) -> DriveParams {
        let base = self.params(l, eps);
        DriveParams {
            eps_a: base.eps_a,
            eps_b: base.eps_b,
            l,
            ..*template
        }
    }

    pub fn label(&self) -> String {
        match self {
            Protocol::Hermitian => "H".into(),
            Protocol::NonReciprocal => "NH".into(),
            Protocol::Skewed { gamma } => format!("NH_gamma{gamma}"),
        }
    }
}

/// 4×4 rung gate in the ordered basis `(↑↑, ↑↓, ↓↑, ↓↓)` of `(a_j, b_j)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairGate {
    pub matrix: [[C64; 4]; 4],
}

impl PairGate {
    /// The 2×2 block acting on `(↑↓, ↓↑)`.
    pub fn middle(&self) -> [[C64; 2]; 2] {
        [
            [self.matrix[1][1], self.matrix[1][2]],
            [self.matrix[2][1], self.matrix[2][2]],
        ]
    }

    fn from_middle(m: [[C64; 2]; 2]) -> Self {
        let mut matrix = [[ZERO; 4]; 4];
        matrix[0][0] = ONE;
        matrix[3][3] = ONE;
        matrix[1][1] = m[0][0];
        matrix[1][2] = m[0][1];
        matrix[2][1] = m[1][0];
        matrix[2][2] = m[1][1];
        Self { matrix }
    }

    /// Rung-state index `0..4` of `(a, b)` bits in `(↑↑, ↑↓, ↓↑, ↓↓)` order.
    pub(crate) fn slot(a_up: bool, b_up: bool) -> usize {
        match (a_up, b_up) {
            (true, true) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (false, false) => 3,
        }
    }
}

/// Closed-form `exp(−iθM)` with `M = [[0, 1+ε_a], [1+ε_b, 0]]`.
///
/// `M² = (1+ε_a)(1+ε_b)·1`, so the exponential is `c·1 − i s·θ·M` with
/// `(c, s) = (cos g, sin g / g)` for a nonnegative product and
/// `(cosh g, sinh g / g)` for a negative one, `g = θ·sqrt(|product|)`.
pub fn pair_gate(params: &DriveParams) -> PairGate {
    let theta = params.swap_angle();
    let fa = 1.0 + params.eps_a;
    let fb = 1.0 + params.eps_b;
    let product = fa * fb;
    let g = theta * product.abs().sqrt();
    let (c, sinc) = if product >= 0.0 {
        (g.cos(), sinc(g))
    } else {
        (g.cosh(), sinhc(g))
    };
    let off = -I * theta * sinc;
    PairGate::from_middle([[C64::from(c), off * fa], [off * fb, C64::from(c)]])
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0 + x.powi(4) / 120.0
    } else {
        x.sin() / x
    }
}

fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x * x / 6.0 + x.powi(4) / 120.0
    } else {
        x.sinh() / x
    }
}

/// Diagonal phase factors of the Ising kick, one per basis configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct IsingPhases {
    pub desc: BasisDescriptor,
    pub phases: Vec<C64>,
}

/// `Σ_μ Σ_j s_j^μ s_{j+1}^μ` with open boundaries.
pub fn ising_bond_sum(desc: &BasisDescriptor, index: usize) -> i32 {
    let l = desc.l();
    (0..l.saturating_sub(1))
        .map(|j| {
            desc.spin_a(index, j).sign() * desc.spin_a(index, j + 1).sign()
                + desc.spin_b(index, j).sign() * desc.spin_b(index, j + 1).sign()
        })
        .sum()
}

pub fn ising_phases(params: &DriveParams, desc: &BasisDescriptor) -> Result<IsingPhases> {
    if desc.l() != params.l {
        return Err(Error::Dimension {
            expected: params.l,
            got: desc.l(),
        });
    }
    let angle = params.jz * params.t1;
    let phases = (0..desc.dim())
        .map(|i| C64::from_polar(1.0, angle * ising_bond_sum(desc, i) as f64))
        .collect();
    Ok(IsingPhases { desc: *desc, phases })
}

/// Which representation [`build_floquet`] should produce.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorForm {
    GateSequence,
    DenseMatrix,
}

/// Resource guards for operator construction and evolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Largest dimension for dense assembly and dense eigensolves.
    pub dense_dim: usize,
    /// Largest state-vector dimension for gate-sequence evolution.
    pub state_dim: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            dense_dim: 8192,
            state_dim: 1 << 26,
        }
    }
}

/// Single-period evolution operator.
#[derive(Clone, Debug)]
pub enum FloquetOperator {
    GateSequence {
        phases: IsingPhases,
        gate: PairGate,
        /// Rungs the gate is placed on; always `0..L`.
        pairs: Vec<usize>,
    },
    Dense {
        desc: BasisDescriptor,
        matrix: CMatrix,
    },
}

impl FloquetOperator {
    pub fn desc(&self) -> &BasisDescriptor {
        match self {
            FloquetOperator::GateSequence { phases, .. } => &phases.desc,
            FloquetOperator::Dense { desc, .. } => desc,
        }
    }

    pub fn dense(&self) -> Option<&CMatrix> {
        match self {
            FloquetOperator::Dense { matrix, .. } => Some(matrix),
            FloquetOperator::GateSequence { .. } => None,
        }
    }

    /// Applies the operator in place: Ising phases first, then the rung gates.
    pub fn apply(&self, amps: &mut [C64]) {
        match self {
            FloquetOperator::GateSequence { phases, gate, pairs } => {
                for (a, p) in amps.iter_mut().zip(&phases.phases) {
                    *a *= p;
                }
                let desc = &phases.desc;
                for &j in pairs {
                    apply_pair_gate(desc, gate, j, amps);
                }
            }
            FloquetOperator::Dense { matrix, .. } => {
                let out = matrix.mul_vec(amps);
                amps.copy_from_slice(&out);
            }
        }
    }

    /// Dense matrix of this operator, assembled column by column.
    pub fn to_dense(&self) -> CMatrix {
        match self {
            FloquetOperator::Dense { matrix, .. } => matrix.clone(),
            FloquetOperator::GateSequence { .. } => {
                let dim = self.desc().dim();
                let columns: Vec<Vec<C64>> = (0..dim)
                    .into_par_iter()
                    .map(|k| {
                        let mut e = vec![ZERO; dim];
                        e[k] = ONE;
                        self.apply(&mut e);
                        e
                    })
                    .collect();
                CMatrix::from_columns(&columns)
            }
        }
    }
}

fn apply_pair_gate(desc: &BasisDescriptor, gate: &PairGate, j: usize, amps: &mut [C64]) {
    let [[m00, m01], [m10, m11]] = gate.middle();
    let (up_down_bit, down_up_bit) = match desc.kind() {
        // a_j up with b_j down  <->  a_j down with b_j up
        BasisKind::Full => (1usize << j, 1usize << (desc.l() + j)),
        BasisKind::PairSector => (1usize << j, 0),
    };
    let rung_mask = up_down_bit | down_up_bit;
    for i in 0..amps.len() {
        if i & rung_mask != up_down_bit {
            continue;
        }
        let partner = (i & !rung_mask) | down_up_bit;
        let ud = amps[i];
        let du = amps[partner];
        amps[i] = m00 * ud + m01 * du;
        amps[partner] = m10 * ud + m11 * du;
    }
}

/// Builds the Floquet operator in the requested basis and form.
pub fn build_floquet(
    params: &DriveParams,
    desc: &BasisDescriptor,
    form: OperatorForm,
) -> Result<FloquetOperator> {
    build_floquet_with_limits(params, desc, form, &Limits::default())
}

pub fn build_floquet_with_limits(
    params: &DriveParams,
    desc: &BasisDescriptor,
    form: OperatorForm,
    limits: &Limits,
) -> Result<FloquetOperator> {
    params.validate()?;
    if desc.dim() > limits.state_dim {
        return Err(Error::Resource {
            what: "state vector",
            required: desc.dim(),
            limit: limits.state_dim,
        });
    }
    let phases = ising_phases(params, desc)?;
    let gate = pair_gate(params);
    match form {
        OperatorForm::GateSequence => Ok(FloquetOperator::GateSequence {
            phases,
            gate,
            pairs: (0..desc.l()).collect(),
        }),
        OperatorForm::DenseMatrix => {
            if desc.dim() > limits.dense_dim {
                return Err(Error::Resource {
                    what: "dense operator",
                    required: desc.dim(),
                    limit: limits.dense_dim,
                });
            }
            Ok(FloquetOperator::Dense {
                desc: *desc,
                matrix: dense_product_form(desc, &phases, &gate),
            })
        }
    }
}

/// `U[i][k] = Π_j gate[rung_j(i)][rung_j(k)] · phase[k]`, evaluated entrywise
/// from the tensor-product structure rather than by applying gates.
fn dense_product_form(desc: &BasisDescriptor, phases: &IsingPhases, gate: &PairGate) -> CMatrix {
    let dim = desc.dim();
    let l = desc.l();
    let rung = |index: usize, j: usize| match desc.kind() {
        BasisKind::Full => PairGate::slot(index >> j & 1 == 1, index >> (l + j) & 1 == 1),
        BasisKind::PairSector => PairGate::slot(index >> j & 1 == 1, index >> j & 1 == 0),
    };
    let rows: Vec<Vec<C64>> = (0..dim)
        .into_par_iter()
        .map(|i| {
            (0..dim)
                .map(|k| {
                    let mut amp = phases.phases[k];
                    for j in 0..l {
                        amp *= gate.matrix[rung(i, j)][rung(k, j)];
                        if amp == ZERO {
                            break;
                        }
                    }
                    amp
                })
                .collect()
        })
        .collect();
    CMatrix::from_fn(dim, dim, |i, k| rows[i][k])
}

/// Dense `H_a + H_b = −J_z Σ_μ Σ_j σ_j^{μz} σ_{j+1}^{μz}` in the given basis.
pub fn ising_hamiltonian(params: &DriveParams, desc: &BasisDescriptor) -> CMatrix {
    let diag: Vec<C64> = (0..desc.dim())
        .map(|i| C64::from(-params.jz * ising_bond_sum(desc, i) as f64))
        .collect();
    CMatrix::diagonal(&diag)
}

/// Dense `H_I = Σ_j (J_a σ_j^{a+} σ_j^{b−} + J_b σ_j^{a−} σ_j^{b+})` in the
/// full basis, with `J_μ = J_z (π/2)(1 + ε_μ)`.
pub fn hopping_hamiltonian(params: &DriveParams, desc: &BasisDescriptor) -> Result<CMatrix> {
    if desc.kind() != BasisKind::Full {
        return Err(Error::InvalidParam("hopping_hamiltonian needs the full basis".into()));
    }
    let l = desc.l();
    let ja = params.jz * PI / 2.0 * (1.0 + params.eps_a);
    let jb = params.jz * PI / 2.0 * (1.0 + params.eps_b);
    let mut h = CMatrix::zeros(desc.dim(), desc.dim());
    for k in 0..desc.dim() {
        for j in 0..l {
            let a_bit = 1usize << j;
            let b_bit = 1usize << (l + j);
            match (k & a_bit != 0, k & b_bit != 0) {
                // σ^{a+} σ^{b−}: a down -> up, b up -> down
                (false, true) => h[(k ^ a_bit ^ b_bit, k)] += C64::from(ja),
                // σ^{a−} σ^{b+}
                (true, false) => h[(k ^ a_bit ^ b_bit, k)] += C64::from(jb),
                _ => {}
            }
        }
    }
    Ok(h)
}
