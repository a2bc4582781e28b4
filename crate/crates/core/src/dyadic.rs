//! Bit algebra of the dyadic group at resolution `n`.
//!
//! Two kinds of labels live here. A [`PaleyIndex`] `k = Σ k_j 2^j` labels a
//! Walsh character (and, through the Paley pairing, a character group
//! element). A [`GridPoint`] is a point `x = j·2^-n` of the finite subgroup
//! `F_n ⊂ [0, 1)`; its dyadic digits `x_1 … x_n` are the bits of the cell index
//! `j` read from most to least significant, so `x_i` is bit `n - i` of `j`.
//! Each cell `[j·2^-n, (j+1)·2^-n)` is one dyadic ball of radius `2^-n`.
//!
//! For an integer index, `|k|` is the integer itself. Applied to a bit vector
//! (for instance `G^-1 k`) it means `Σ bit_r 2^r`, which is again just the
//! integer value, so no separate absolute-value function is needed.

use std::fmt;
use std::ops::BitXor;

use crate::error::{check_resolution, check_same};
use crate::{Error, Result};

/// Nonnegative integer label of a Walsh–Paley character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PaleyIndex(pub usize);

impl PaleyIndex {
    #[inline]
    pub const fn new(value: usize) -> Self {
        Self(value)
    }

    #[inline]
    pub const fn value(self) -> usize {
        self.0
    }

    /// Binary digit `k_j`.
    #[inline]
    pub const fn bit(self, j: u32) -> usize {
        if j >= usize::BITS {
            0
        } else {
            (self.0 >> j) & 1
        }
    }

    /// `S k = Σ k_{j+1} 2^j`.
    #[inline]
    pub const fn shift(self) -> Self {
        Self(self.0 >> 1)
    }

    /// The Gray map `G = I + S` over `Z_2`: `(G k)_j = k_j ⊕ k_{j+1}`.
    ///
    /// `w_{G k}` has exactly `k` sign changes on `(0, 1)`.
    #[inline]
    pub const fn gray(self) -> Self {
        Self(self.0 ^ (self.0 >> 1))
    }

    /// `G^-1 = Σ_i S^i`, i.e. prefix parity from the top bit down.
    #[inline]
    pub const fn gray_inverse(self) -> Self {
        let mut k = self.0;
        let mut s = 1;
        while s < usize::BITS {
            k ^= k >> s;
            s <<= 1;
        }
        Self(k)
    }

    /// Fails unless `k < 2^n`.
    pub fn check_below(self, n: u32) -> Result<Self> {
        if n < usize::BITS && self.0 >> n != 0 {
            return Err(Error::IndexOutOfRange {
                index: self.0,
                resolution: n,
            });
        }
        Ok(self)
    }
}

impl BitXor for PaleyIndex {
    type Output = Self;

    /// Dyadic addition of indices: componentwise mod 2.
    #[inline]
    fn bitxor(self, rhs: Self) -> Self {
        Self(self.0 ^ rhs.0)
    }
}

impl From<usize> for PaleyIndex {
    fn from(value: usize) -> Self {
        Self(value)
    }
}

impl fmt::Display for PaleyIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Dyadic sum of two indices that must both lie below `2^n`.
pub fn dyadic_add_indices(a: PaleyIndex, b: PaleyIndex, n: u32) -> Result<PaleyIndex> {
    Ok(a.check_below(n)? ^ b.check_below(n)?)
}

/// A point `x = cell·2^-n` of the finite dyadic group `F_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridPoint {
    cell: usize,
    resolution: u32,
}

impl GridPoint {
    pub fn new(cell: usize, resolution: u32) -> Result<Self> {
        check_resolution(resolution)?;
        if cell >> resolution != 0 {
            return Err(Error::IndexOutOfRange {
                index: cell,
                resolution,
            });
        }
        Ok(Self { cell, resolution })
    }

    #[inline]
    pub const fn cell(self) -> usize {
        self.cell
    }

    #[inline]
    pub const fn resolution(self) -> u32 {
        self.resolution
    }

    /// Dyadic digit `x_i` for `1 <= i <= n`; zero outside that range.
    #[inline]
    pub const fn digit(self, i: u32) -> usize {
        if i == 0 || i > self.resolution {
            0
        } else {
            (self.cell >> (self.resolution - i)) & 1
        }
    }

    /// `|x| = Σ x_i 2^-i`.
    pub fn value(self) -> f64 {
        self.cell as f64 / (1u64 << self.resolution) as f64
    }

    /// Cell index with its `n` bits reversed, so bit `i` is the digit `x_{i+1}`.
    ///
    /// This is the Paley pairing: `<k, x> = popcount(k & x.paired_bits())`.
    #[inline]
    pub const fn paired_bits(self) -> usize {
        self.cell.reverse_bits() >> (usize::BITS - self.resolution)
    }

    /// Dyadic sum, digitwise mod 2.
    pub fn dyadic_add(self, other: Self) -> Result<Self> {
        check_same(self.resolution, other.resolution)?;
        Ok(Self {
            cell: self.cell ^ other.cell,
            resolution: self.resolution,
        })
    }

    /// `ρ(|x - 2^-n| mod 1)`: the left neighbour on the circle.
    pub const fn predecessor(self) -> Self {
        let mask = (1usize << self.resolution) - 1;
        Self {
            cell: self.cell.wrapping_sub(1) & mask,
            resolution: self.resolution,
        }
    }

    /// `M(x)`: position of the last set dyadic digit among `x_1 … x_n`.
    ///
    /// `M(0) = 1`, which makes `x ⊕ ρ(|x - 2^-n|) = h_{M(x)}` hold at `x = 0`
    /// as well once the difference is taken mod 1.
    pub const fn last_set_position(self) -> u32 {
        if self.cell == 0 {
            1
        } else {
            self.resolution - self.cell.trailing_zeros()
        }
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.cell, self.resolution)
    }
}

/// `h_M = e_M + … + e_n`: the grid point whose digits `M..=n` are set.
pub fn h_mask(position: u32, resolution: u32) -> Result<GridPoint> {
    check_resolution(resolution)?;
    if position == 0 || position > resolution {
        return Err(Error::MaskOutOfRange {
            position,
            resolution,
        });
    }
    GridPoint::new((1usize << (resolution - position + 1)) - 1, resolution)
}

/// Iterator over all points of `F_n` in increasing order.
pub fn grid_points(resolution: u32) -> Result<impl Iterator<Item = GridPoint>> {
    check_resolution(resolution)?;
    Ok((0..1usize << resolution).map(move |cell| GridPoint { cell, resolution }))
}
