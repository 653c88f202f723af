//! Bit encoding of the two-chain configuration space.
//!
//! Bit `j` of a full-basis index holds chain-a site `j` and bit `L + j`
//! holds chain-b site `j` (1 = up). The pair sector keeps only
//! configurations where every rung `(a_j, b_j)` is antialigned; its reduced
//! bit `j` is 1 for `|↑⟩_a|↓⟩_b` and 0 for `|↓⟩_a|↑⟩_b`.

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported chain length; `4^L` must fit in a `usize` index.
pub const L_MAX: usize = (usize::BITS as usize / 2) - 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    /// `+1` for up, `-1` for down.
    pub fn sign(self) -> i32 {
        match self {
            Spin::Up => 1,
            Spin::Down => -1,
        }
    }

    pub fn flipped(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }

    fn from_bit(bit: usize) -> Spin {
        if bit & 1 == 1 {
            Spin::Up
        } else {
            Spin::Down
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spin::Up => "↑",
            Spin::Down => "↓",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisKind {
    Full,
    PairSector,
}

/// Shape of a state space: chain length, basis kind and dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisDescriptor {
    l: usize,
    kind: BasisKind,
    dim: usize,
}

impl BasisDescriptor {
    pub fn new(l: usize, kind: BasisKind) -> Result<Self> {
        if l == 0 || l > L_MAX {
            return Err(Error::InvalidParam(format!(
                "chain length L = {l} outside 1..={L_MAX}"
            )));
        }
        let dim = match kind {
            BasisKind::Full => 1usize << (2 * l),
            BasisKind::PairSector => 1usize << l,
        };
        Ok(Self { l, kind, dim })
    }

    pub fn full(l: usize) -> Result<Self> {
        Self::new(l, BasisKind::Full)
    }

    pub fn pair_sector(l: usize) -> Result<Self> {
        Self::new(l, BasisKind::PairSector)
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        if index < self.dim {
            Ok(())
        } else {
            Err(Error::Index {
                index,
                dim: self.dim,
            })
        }
    }

    /// Spin of chain-a site `j` in configuration `index` of this basis.
    pub fn spin_a(&self, index: usize, j: usize) -> Spin {
        Spin::from_bit(index >> j)
    }

    /// Spin of chain-b site `j` in configuration `index` of this basis.
    pub fn spin_b(&self, index: usize, j: usize) -> Spin {
        match self.kind {
            BasisKind::Full => Spin::from_bit(index >> (self.l + j)),
            BasisKind::PairSector => Spin::from_bit(index >> j).flipped(),
        }
    }
}

/// Full-basis configuration label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConfigIndex(pub usize);

/// Encodes `2L` spins (chain a sites `1..=L`, then chain b) as a full index.
pub fn encode(config: &[Spin], l: usize) -> Result<ConfigIndex> {
    if config.len() != 2 * l {
        return Err(Error::InvalidConfig(format!(
            "expected {} spin labels for L = {l}, got {}",
            2 * l,
            config.len()
        )));
    }
    BasisDescriptor::full(l)?;
    let index = config
        .iter()
        .enumerate()
        .filter(|(_, s)| **s == Spin::Up)
        .fold(0usize, |acc, (bit, _)| acc | (1 << bit));
    Ok(ConfigIndex(index))
}

pub fn decode(index: ConfigIndex, l: usize) -> Result<Vec<Spin>> {
    BasisDescriptor::full(l)?.check_index(index.0)?;
    Ok((0..2 * l).map(|bit| Spin::from_bit(index.0 >> bit)).collect())
}

/// Number of up spins minus number of down spins over both chains.
pub fn total_magnetization(index: ConfigIndex, desc: &BasisDescriptor) -> Result<i32> {
    if desc.kind() != BasisKind::Full {
        return Err(Error::InvalidParam(
            "total_magnetization expects a full-basis descriptor".into(),
        ));
    }
    desc.check_index(index.0)?;
    let ups = index.0.count_ones() as i32;
    Ok(2 * ups - 2 * desc.l() as i32)
}

/// Maps a pair-sector index to the full-basis index of the same configuration.
pub fn pair_sector_embed(reduced: usize, l: usize) -> Result<ConfigIndex> {
    let desc = BasisDescriptor::pair_sector(l)?;
    desc.check_index(reduced)?;
    let mask = (1usize << l) - 1;
    let b_bits = !reduced & mask;
    Ok(ConfigIndex(reduced | (b_bits << l)))
}

/// Inverse of [`pair_sector_embed`]; `None` when some rung is aligned.
pub fn pair_sector_project(index: ConfigIndex, l: usize) -> Option<usize> {
    let mask = (1usize << l) - 1;
    let a = index.0 & mask;
    let b = (index.0 >> l) & mask;
    (a ^ b == mask).then_some(a)
}

/// Full index of the spin-inversion partner (every spin flipped).
pub fn spin_flip(index: ConfigIndex, l: usize) -> ConfigIndex {
    ConfigIndex(!index.0 & ((1usize << (2 * l)) - 1))
}
