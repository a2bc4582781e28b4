//! Dense operators on `F_n` in the grid basis, and Hilbert–Schmidt metrics.
//!
//! `F_n` carries the normalized inner product `<f, g> = 2^-n Σ_j f(x_j) g(x_j)`.
//! The scaled cell indicators `e_j = 2^{n/2} 1_{cell j}` are an orthonormal
//! basis for it, and `A e_i = Σ_j A[j, i] e_j`, so the grid matrix of an
//! operator is also its matrix in an orthonormal basis. The Hilbert–Schmidt
//! norm is therefore the plain Frobenius norm of the entries.

use std::ops::{Add, Neg, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{check_resolution, check_same};
use crate::walsh::{forward_in_place, GridFunction};
use crate::{Error, Result};

/// A `2^n × 2^n` real matrix acting by `(A f)(x_j) = Σ_i A[j, i] f(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    resolution: u32,
    entries: Vec<f64>,
}

impl DenseOperator {
    /// Row-major entries; the length must be `4^n`.
    pub fn new(resolution: u32, entries: Vec<f64>) -> Result<Self> {
        check_resolution(resolution)?;
        let dim = 1usize << resolution;
        if entries.len() != dim * dim {
            return Err(Error::LengthMismatch {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        Ok(Self {
            resolution,
            entries,
        })
    }

    pub fn from_fn(resolution: u32, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        check_resolution(resolution)?;
        let dim = 1usize << resolution;
        let mut entries = Vec::with_capacity(dim * dim);
        for row in 0..dim {
            for col in 0..dim {
                entries.push(f(row, col));
            }
        }
        Ok(Self {
            resolution,
            entries,
        })
    }

    pub fn zeros(resolution: u32) -> Result<Self> {
        Self::from_fn(resolution, |_, _| 0.0)
    }

    pub fn identity(resolution: u32) -> Result<Self> {
        Self::from_fn(resolution, |r, c| if r == c { 1.0 } else { 0.0 })
    }

    /// I.i.d. standard normal entries.
    pub fn random_gaussian<R: Rng + ?Sized>(resolution: u32, rng: &mut R) -> Result<Self> {
        Self::from_fn(resolution, |_, _| rng.sample(StandardNormal))
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn dim(&self) -> usize {
        1 << self.resolution
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim() + col]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let dim = self.dim();
        &self.entries[row * dim..(row + 1) * dim]
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        check_same(self.resolution, f.resolution())?;
        let values = (0..self.dim())
            .map(|r| self.row(r).iter().zip(f.values()).map(|(a, b)| a * b).sum())
            .collect();
        GridFunction::new(values)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            resolution: self.resolution,
            entries: self.entries.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let dim = self.dim();
        Self::from_fn(self.resolution, |r, c| self.entries[c * dim + r])
            .expect("resolution already validated")
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    fn zip_with(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        check_same(self.resolution, other.resolution)?;
        Ok(Self {
            resolution: self.resolution,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        })
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        check_same(self.resolution, other.resolution)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// The matrix in the Walsh basis: entry `[k, l] = <A w_l, w_k>`.
    ///
    /// Equal to `W A W^T` with the orthogonal `W = 2^{-n/2} [w_k(x_j)]`, so it has
    /// the same Hilbert–Schmidt norm. Computed with one transform per row and
    /// per column, `O(n 4^n)`.
    pub fn walsh_conjugate(&self) -> Self {
        let dim = self.dim();
        let mut m = self.entries.clone();
        // rows: R[j, l] = Σ_i A[j, i] w_l(x_i)
        for row in m.chunks_exact_mut(dim) {
            forward_in_place(row);
            row.iter_mut().for_each(|v| *v *= dim as f64);
        }
        // columns: B[k, l] = 2^-n Σ_j w_k(x_j) R[j, l]
        let mut column = vec![0.0; dim];
        for l in 0..dim {
            for (j, c) in column.iter_mut().enumerate() {
                *c = m[j * dim + l];
            }
            forward_in_place(&mut column);
            for (k, c) in column.iter().enumerate() {
                m[k * dim + l] = *c;
            }
        }
        Self {
            resolution: self.resolution,
            entries: m,
        }
    }

    /// Diagonal of [`walsh_conjugate`](Self::walsh_conjugate).
    pub fn walsh_diagonal(&self) -> Vec<f64> {
        let b = self.walsh_conjugate();
        (0..self.dim()).map(|k| b.get(k, k)).collect()
    }
}

impl Add for &DenseOperator {
    type Output = DenseOperator;

    fn add(self, rhs: Self) -> DenseOperator {
        self.try_add(rhs).expect("operator resolutions differ")
    }
}

impl Sub for &DenseOperator {
    type Output = DenseOperator;

    fn sub(self, rhs: Self) -> DenseOperator {
        self.try_sub(rhs).expect("operator resolutions differ")
    }
}

impl Neg for &DenseOperator {
    type Output = DenseOperator;

    fn neg(self) -> DenseOperator {
        self.scale(-1.0)
    }
}

/// Cyclic translation `(T f)(x_j) = f(x_{(j - steps) mod 2^n})`.
///
/// `steps = 1` is `T_{2^-n}`. This is a cyclic shift, not a dyadic one.
pub fn translation_operator(resolution: u32, steps: i64) -> Result<DenseOperator> {
    check_resolution(resolution)?;
    let dim = 1i64 << resolution;
    DenseOperator::from_fn(resolution, |r, c| {
        if (r as i64 - steps).rem_euclid(dim) == c as i64 {
            1.0
        } else {
            0.0
        }
    })
}

/// Sign convention of the cyclic difference operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum Orientation {
    /// `2^n (I - T_{2^-n})`, the backward difference quotient
    /// `(f(t) - f(t - 2^-n)) / 2^-n`.
    #[default]
    BackwardQuotient,
    /// `2^n (T_{2^-n} - I)`, the negated form.
    ShiftMinusIdentity,
}

impl Orientation {
    pub const ALL: [Orientation; 2] = [Orientation::BackwardQuotient, Orientation::ShiftMinusIdentity];

    pub fn name(self) -> &'static str {
        match self {
            Orientation::BackwardQuotient => "backward_quotient",
            Orientation::ShiftMinusIdentity => "shift_minus_identity",
        }
    }

    /// `+1` for the backward quotient, `-1` for the negated form.
    pub fn sign(self) -> f64 {
        match self {
            Orientation::BackwardQuotient => 1.0,
            Orientation::ShiftMinusIdentity => -1.0,
        }
    }
}

/// `Δ_n` in the requested orientation.
pub fn difference_operator(resolution: u32, orientation: Orientation) -> Result<DenseOperator> {
    let t = translation_operator(resolution, 1)?;
    let i = DenseOperator::identity(resolution)?;
    let scale = (1u64 << resolution) as f64 * orientation.sign();
    Ok((&i - &t).scale(scale))
}

/// `2^{n-1} (T_{2^-n} - T_{-2^-n})`.
pub fn symmetric_difference_operator(resolution: u32) -> Result<DenseOperator> {
    let forward = translation_operator(resolution, 1)?;
    let backward = translation_operator(resolution, -1)?;
    Ok((&forward - &backward).scale((1u64 << (resolution - 1)) as f64))
}

/// Compression of `J f(x) = ∫_0^x f` to `F_n`.
///
/// Entry `[j, i]` is the average over cell `j` of `J 1_{cell i}`: `h` below the
/// diagonal, `h / 2` on it and zero above, with `h = 2^-n`.
pub fn compressed_antiderivative(resolution: u32) -> Result<DenseOperator> {
    check_resolution(resolution)?;
    let h = 1.0 / (1u64 << resolution) as f64;
    DenseOperator::from_fn(resolution, |r, c| match r.cmp(&c) {
        std::cmp::Ordering::Greater => h,
        std::cmp::Ordering::Equal => h / 2.0,
        std::cmp::Ordering::Less => 0.0,
    })
}

/// Pairwise summation; rounding error grows like `log2(len)` instead of `len`.
fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 64;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let (lo, hi) = values.split_at(values.len() / 2);
    pairwise_sum(lo) + pairwise_sum(hi)
}

/// `<A, B>_HS = tr(B^T A)`.
pub fn hs_inner(a: &DenseOperator, b: &DenseOperator) -> Result<f64> {
    check_same(a.resolution, b.resolution)?;
    let products: Vec<f64> = a.entries.iter().zip(&b.entries).map(|(x, y)| x * y).collect();
    Ok(pairwise_sum(&products))
}

pub fn hs_norm(a: &DenseOperator) -> f64 {
    let squares: Vec<f64> = a.entries.iter().map(|v| v * v).collect();
    pairwise_sum(&squares).sqrt()
}

/// Estimates `‖A‖_HS² = N E‖A X‖²` with `X` uniform on the unit sphere of `R^N`.
///
/// Samples are normalized standard Gaussian vectors drawn from a ChaCha8
/// stream seeded with `seed`, so the estimate is reproducible.
pub fn hs_norm_monte_carlo(a: &DenseOperator, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = a.dim();
    let mut x = vec![0.0f64; dim];
    let mut total = 0.0;
    for _ in 0..samples.max(1) {
        let norm = loop {
            x.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                break norm;
            }
        };
        x.iter_mut().for_each(|v| *v /= norm);
        total += (0..dim)
            .map(|r| {
                let ax: f64 = a.row(r).iter().zip(&x).map(|(p, q)| p * q).sum();
                ax * ax
            })
            .sum::<f64>();
    }
    dim as f64 * total / samples.max(1) as f64
}
