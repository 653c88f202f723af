//! Stroboscopic evolution and the interchain imbalance observable.

use std::f64::consts::FRAC_PI_2;

use crate::basis::{pair_sector_embed, BasisDescriptor, BasisKind};
use crate::error::{Error, Result};
use crate::linalg::{norm, C64, ONE, ZERO};
use crate::model::{build_floquet, DriveParams, FloquetOperator, OperatorForm};

/// Norms below this are treated as a collapsed state.
const MIN_NORM: f64 = 1e-300;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NormPolicy {
    #[default]
    RenormalizeEachPeriod,
    Raw,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub desc: BasisDescriptor,
    pub amps: Vec<C64>,
    pub norm_policy: NormPolicy,
}

impl StateVector {
    pub fn new(desc: BasisDescriptor, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != desc.dim() {
            return Err(Error::Dimension {
                expected: desc.dim(),
                got: amps.len(),
            });
        }
        Ok(Self {
            desc,
            amps,
            norm_policy: NormPolicy::default(),
        })
    }

    pub fn basis_state(desc: BasisDescriptor, index: usize) -> Result<Self> {
        desc.check_index(index)?;
        let mut amps = vec![ZERO; desc.dim()];
        amps[index] = ONE;
        Self::new(desc, amps)
    }

    /// `|↑…↑⟩_a ⊗ |↓…↓⟩_b` in either basis.
    pub fn polarized(desc: BasisDescriptor) -> Self {
        let l = desc.l();
        let index = match desc.kind() {
            BasisKind::Full => (1usize << l) - 1,
            BasisKind::PairSector => desc.dim() - 1,
        };
        Self::basis_state(desc, index).expect("polarized index is in range")
    }

    /// `|↓…↓⟩_a ⊗ |↑…↑⟩_b` in either basis.
    pub fn polarized_partner(desc: BasisDescriptor) -> Self {
        Self::polarized(desc).inverted()
    }

    /// Cat states `(|ψ(0)⟩ ± |ψ̃(0)⟩)/√2`.
    pub fn cat(desc: BasisDescriptor, sign: f64) -> Self {
        let mut s = Self::polarized(desc);
        let p = Self::polarized_partner(desc);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for (a, b) in s.amps.iter_mut().zip(&p.amps) {
            *a = (*a + b * sign) * r;
        }
        s
    }

    pub fn with_policy(mut self, policy: NormPolicy) -> Self {
        self.norm_policy = policy;
        self
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    /// Global spin inversion of every spin on both chains.
    pub fn inverted(&self) -> Self {
        let dim = self.desc.dim();
        let mask = dim - 1;
        let mut amps = vec![ZERO; dim];
        for (i, a) in self.amps.iter().enumerate() {
            amps[!i & mask] = *a;
        }
        Self {
            desc: self.desc,
            amps,
            norm_policy: self.norm_policy,
        }
    }

    /// Embeds a pair-sector state into the full basis.
    pub fn embed_full(&self) -> Result<Self> {
        match self.desc.kind() {
            BasisKind::Full => Ok(self.clone()),
            BasisKind::PairSector => {
                let l = self.desc.l();
                let full = BasisDescriptor::full(l)?;
                let mut amps = vec![ZERO; full.dim()];
                for (r, a) in self.amps.iter().enumerate() {
                    amps[pair_sector_embed(r, l)?.0] = *a;
                }
                Ok(Self {
                    desc: full,
                    amps,
                    norm_policy: self.norm_policy,
                })
            }
        }
    }

    /// Applies one period of `u`; `period` is only used for error reporting.
    pub fn step(&mut self, u: &FloquetOperator, period: usize) -> Result<()> {
        if u.desc() != &self.desc {
            return Err(Error::Dimension {
                expected: self.desc.dim(),
                got: u.desc().dim(),
            });
        }
        u.apply(&mut self.amps);
        let n = self.norm();
        if !(n > MIN_NORM) || !n.is_finite() {
            return Err(Error::DegenerateEvolution { period, norm: n });
        }
        if self.norm_policy == NormPolicy::RenormalizeEachPeriod {
            let inv = 1.0 / n;
            self.amps.iter_mut().for_each(|a| *a *= inv);
        }
        Ok(())
    }
}

/// Full-basis polarized state.
pub fn init_polarized(l: usize) -> Result<StateVector> {
    Ok(StateVector::polarized(BasisDescriptor::full(l)?))
}

/// Product state `Π_j (cosθ|↑⟩ + sinθ|↓⟩)_a ⊗ (−sinθ|↑⟩ + cosθ|↓⟩)_b`.
pub fn init_theta(l: usize, theta: f64) -> Result<StateVector> {
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(Error::InvalidParam(format!(
            "theta = {theta} outside [0, π/2]"
        )));
    }
    let desc = BasisDescriptor::full(l)?;
    let (s, c) = theta.sin_cos();
    let amps = (0..desc.dim())
        .map(|i| {
            let mut amp = 1.0;
            for j in 0..l {
                amp *= if i >> j & 1 == 1 { c } else { s };
                amp *= if i >> (l + j) & 1 == 1 { -s } else { c };
            }
            C64::from(amp)
        })
        .collect();
    StateVector::new(desc, amps)
}

/// `σ^z` expectations `(⟨σ_j^{az}⟩, ⟨σ_j^{bz}⟩)` in the normalized state.
pub fn z_expectations(state: &StateVector) -> (Vec<f64>, Vec<f64>) {
    let l = state.desc.l();
    let mut za = vec![0.0; l];
    let mut zb = vec![0.0; l];
    let mut total = 0.0;
    for (i, a) in state.amps.iter().enumerate() {
        let p = a.norm_sqr();
        if p == 0.0 {
            continue;
        }
        total += p;
        for j in 0..l {
            za[j] += p * state.desc.spin_a(i, j).sign() as f64;
            zb[j] += p * state.desc.spin_b(i, j).sign() as f64;
        }
    }
    if total > 0.0 {
        za.iter_mut().chain(zb.iter_mut()).for_each(|z| *z /= total);
    }
    (za, zb)
}

/// Per-site imbalance `½(⟨σ_j^{az}⟩ − ⟨σ_j^{bz}⟩)` and its site average.
pub fn imbalance(state: &StateVector) -> (Vec<f64>, f64) {
    let (za, zb) = z_expectations(state);
    let per_site: Vec<f64> = za.iter().zip(&zb).map(|(a, b)| 0.5 * (a - b)).collect();
    let total = per_site.iter().sum::<f64>() / per_site.len() as f64;
    (per_site, total)
}

/// Expected total magnetization `⟨Σ σ^z⟩` over both chains.
pub fn magnetization(state: &StateVector) -> f64 {
    let (za, zb) = z_expectations(state);
    za.iter().chain(&zb).sum()
}

/// Stroboscopic imbalance record; row `n` is the measurement after `n` periods.
#[derive(Clone, Debug, PartialEq)]
pub struct ImbalanceTrace {
    pub n_periods: usize,
    pub per_site: Vec<Vec<f64>>,
    pub total: Vec<f64>,
}

impl ImbalanceTrace {
    pub fn l(&self) -> usize {
        self.per_site.first().map_or(0, Vec::len)
    }

    /// Trace divided by its initial value.
    pub fn normalized_total(&self) -> Vec<f64> {
        let i0 = self.total[0];
        self.total.iter().map(|v| v / i0).collect()
    }

    /// Number of leading periods over which the sign of the total
    /// imbalance strictly alternates.
    pub fn alternating_prefix(&self) -> usize {
        self.total
            .windows(2)
            .take_while(|w| w[0] * w[1] < 0.0)
            .count()
    }
}

/// Evolves `state0` under `u` for `n_periods`, measuring after each period.
pub fn evolve_with(u: &FloquetOperator, state0: &StateVector, n_periods: usize) -> Result<ImbalanceTrace> {
    if n_periods == 0 {
        return Err(Error::InvalidParam("n_periods must be at least 1".into()));
    }
    let mut state = state0.clone();
    let mut per_site = Vec::with_capacity(n_periods + 1);
    let mut total = Vec::with_capacity(n_periods + 1);
    let (s, t) = imbalance(&state);
    per_site.push(s);
    total.push(t);
    for n in 1..=n_periods {
        state.step(u, n)?;
        let (s, t) = imbalance(&state);
        per_site.push(s);
        total.push(t);
    }
    Ok(ImbalanceTrace {
        n_periods,
        per_site,
        total,
    })
}

pub fn evolve_trace(params: &DriveParams, state0: &StateVector, n_periods: usize) -> Result<ImbalanceTrace> {
    let u = build_floquet(params, &state0.desc, OperatorForm::GateSequence)?;
    evolve_with(&u, state0, n_periods)
}
