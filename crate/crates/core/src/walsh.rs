//! Walsh–Paley characters on `F_n`, the normalized fast Walsh transform and
//! dyadic convolution.
//!
//! Normalization: the forward transform carries the `2^-n`,
//!
//! ```text
//! f~(k) = 2^-n Σ_j f(x_j) w_k(x_j),      f(x_j) = Σ_k f~(k) w_k(x_j),
//! ```
//!
//! so it is an isometry from the grid inner product `2^-n Σ_j f g` to the
//! plain sum over coefficients.
//!
//! `w_k(x) = (-1)^{Σ_i k_i x_{i+1}}` pairs bit `i` of `k` with dyadic digit
//! `i + 1` of `x`, which is bit `n - 1 - i` of the cell index. The butterfly
//! below runs in natural (Hadamard) order; a single bit-reversal of the cell
//! index turns it into the Paley pairing.

use crate::dyadic::{h_mask, GridPoint, PaleyIndex};
use crate::error::{check_resolution, check_same};
use crate::{Error, Result};

/// Value of `w_k` at a grid point, as `±1`.
pub fn walsh_eval(k: PaleyIndex, x: GridPoint) -> Result<i8> {
    k.check_below(x.resolution())?;
    Ok(character_sign(k.value(), x.paired_bits()))
}

#[inline]
fn character_sign(k: usize, paired: usize) -> i8 {
    if (k & paired).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

fn resolution_of_len(len: usize) -> Result<u32> {
    if !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    let n = len.trailing_zeros();
    check_resolution(n)?;
    Ok(n)
}

/// An element of `F_n`: entry `j` is the value on the cell `[j·2^-n, (j+1)·2^-n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    resolution: u32,
    values: Vec<f64>,
}

impl GridFunction {
    /// Wraps a vector whose length must be `2^n` with `n >= 1`.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let resolution = resolution_of_len(values.len())?;
        Ok(Self { resolution, values })
    }

    pub fn from_fn(resolution: u32, mut f: impl FnMut(GridPoint) -> f64) -> Result<Self> {
        let values = crate::dyadic::grid_points(resolution)?.map(&mut f).collect();
        Ok(Self { resolution, values })
    }

    pub fn zeros(resolution: u32) -> Result<Self> {
        check_resolution(resolution)?;
        Ok(Self {
            resolution,
            values: vec![0.0; 1 << resolution],
        })
    }

    /// Grid values of the character `w_k`.
    pub fn character(k: PaleyIndex, resolution: u32) -> Result<Self> {
        check_resolution(resolution)?;
        k.check_below(resolution)?;
        Self::from_fn(resolution, |x| f64::from(character_sign(k.value(), x.paired_bits())))
    }

    /// The convolution unit `δ = 2^n 1_{cell 0}`.
    pub fn unit(resolution: u32) -> Result<Self> {
        let mut f = Self::zeros(resolution)?;
        f.values[0] = (1u64 << resolution) as f64;
        Ok(f)
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `2^-n Σ_j f(x_j) g(x_j)`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        check_same(self.resolution, other.resolution)?;
        let sum: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        Ok(sum / self.len() as f64)
    }

    pub fn norm_squared(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() / self.len() as f64
    }
}

/// Walsh coefficients `f~(k)`, `k = 0 … 2^n - 1`, in Paley order.
#[derive(Debug, Clone, PartialEq)]
pub struct WalshSpectrum {
    resolution: u32,
    coeffs: Vec<f64>,
}

impl WalshSpectrum {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        let resolution = resolution_of_len(coeffs.len())?;
        Ok(Self { resolution, coeffs })
    }

    /// The spectrum `e_k`, whose inverse transform is `w_k`.
    pub fn basis(k: PaleyIndex, resolution: u32) -> Result<Self> {
        check_resolution(resolution)?;
        k.check_below(resolution)?;
        let mut coeffs = vec![0.0; 1 << resolution];
        coeffs[k.value()] = 1.0;
        Ok(Self { resolution, coeffs })
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }
}

/// Unnormalized Walsh–Hadamard butterfly in natural order.
///
/// After the call `data[k] = Σ_i (-1)^{popcount(k & i)} data_in[i]`.
/// The length must be a power of two.
pub fn hadamard_in_place(data: &mut [f64]) {
    let len = data.len();
    debug_assert!(len.is_power_of_two());
    let mut half = 1;
    while half < len {
        for block in data.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        half *= 2;
    }
}

/// Permutes `data` so that entry `i` moves to the bit-reversed position.
pub fn bit_reverse_permute<T>(data: &mut [T]) {
    let len = data.len();
    debug_assert!(len.is_power_of_two());
    if len <= 2 {
        return;
    }
    let shift = usize::BITS - len.trailing_zeros();
    for i in 0..len {
        let j = i.reverse_bits() >> shift;
        if i < j {
            data.swap(i, j);
        }
    }
}

/// `f~(k) = 2^-n Σ_j f(x_j) w_k(x_j)` in `O(n 2^n)`.
pub fn fwht_forward(f: &GridFunction) -> WalshSpectrum {
    let mut coeffs = f.values.clone();
    forward_in_place(&mut coeffs);
    WalshSpectrum {
        resolution: f.resolution,
        coeffs,
    }
}

/// `f(x_j) = Σ_k f~(k) w_k(x_j)`.
pub fn fwht_inverse(s: &WalshSpectrum) -> GridFunction {
    let mut values = s.coeffs.clone();
    inverse_in_place(&mut values);
    GridFunction {
        resolution: s.resolution,
        values,
    }
}

pub(crate) fn forward_in_place(data: &mut [f64]) {
    bit_reverse_permute(data);
    hadamard_in_place(data);
    let scale = 1.0 / data.len() as f64;
    data.iter_mut().for_each(|v| *v *= scale);
}

pub(crate) fn inverse_in_place(data: &mut [f64]) {
    hadamard_in_place(data);
    bit_reverse_permute(data);
}

/// Direct `O(4^n)` evaluation of the forward transform.
pub fn walsh_transform_naive(f: &GridFunction) -> WalshSpectrum {
    let n = f.resolution;
    let len = f.len();
    let paired: Vec<usize> = crate::dyadic::grid_points(n)
        .expect("resolution already validated")
        .map(GridPoint::paired_bits)
        .collect();
    let coeffs = (0..len)
        .map(|k| {
            let sum: f64 = f
                .values
                .iter()
                .zip(&paired)
                .map(|(v, &p)| v * f64::from(character_sign(k, p)))
                .sum();
            sum / len as f64
        })
        .collect();
    WalshSpectrum {
        resolution: n,
        coeffs,
    }
}

/// `(f ⊛ g)(x) = 2^-n Σ_t f(x ⊕ t) g(t)`, computed through the spectra.
pub fn dyadic_convolve(f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    check_same(f.resolution, g.resolution)?;
    let mut fs = fwht_forward(f);
    let gs = fwht_forward(g);
    fs.coeffs.iter_mut().zip(&gs.coeffs).for_each(|(a, b)| *a *= b);
    Ok(fwht_inverse(&fs))
}

/// Direct `O(4^n)` dyadic convolution.
pub fn dyadic_convolve_naive(f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    check_same(f.resolution, g.resolution)?;
    let len = f.len();
    let values = (0..len)
        .map(|x| {
            let sum: f64 = (0..len).map(|t| f.values[x ^ t] * g.values[t]).sum();
            sum / len as f64
        })
        .collect();
    Ok(GridFunction {
        resolution: f.resolution,
        values,
    })
}

/// Number of sign changes of `w_k` on `(0, 1)`, counted from grid values.
pub fn sequency(k: PaleyIndex, resolution: u32) -> Result<usize> {
    check_resolution(resolution)?;
    k.check_below(resolution)?;
    let mut previous = character_sign(k.value(), 0);
    let mut changes = 0;
    for x in crate::dyadic::grid_points(resolution)?.skip(1) {
        let current = character_sign(k.value(), x.paired_bits());
        if current != previous {
            changes += 1;
        }
        previous = current;
    }
    Ok(changes)
}

/// Sign-change predicate: `w_k` flips between `x - 2^-n` and `x` iff
/// `<k, h_{M(x)}> = 1`.
///
/// At `x = 0` this describes the wrap-around step from `1 - 2^-n`, which is
/// not a sign change on the open interval.
pub fn changes_sign_at(k: PaleyIndex, x: GridPoint) -> Result<bool> {
    let h = h_mask(x.last_set_position(), x.resolution())?;
    Ok(walsh_eval(k, h)? == -1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn gp(cell: usize, n: u32) -> GridPoint {
        GridPoint::new(cell, n).unwrap()
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert_abs_diff_eq!(x, y, epsilon = tol);
        }
    }

    #[test]
    fn walsh_eval_examples() {
        for cell in 0..8 {
            assert_eq!(walsh_eval(PaleyIndex(0), gp(cell, 3)).unwrap(), 1);
        }
        assert_eq!(walsh_eval(PaleyIndex(1), gp(1, 2)).unwrap(), 1);
        assert_eq!(walsh_eval(PaleyIndex(1), gp(2, 2)).unwrap(), -1);
        assert!(matches!(
            walsh_eval(PaleyIndex(4), gp(0, 2)),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn character_law_exhaustive() {
        for n in 1..=6 {
            let size = 1usize << n;
            for k in 0..size {
                for a in 0..size {
                    let (k, x) = (PaleyIndex(k), gp(a, n));
                    for b in 0..size {
                        let y = gp(b, n);
                        let lhs = walsh_eval(k, x.dyadic_add(y).unwrap()).unwrap();
                        assert_eq!(lhs, walsh_eval(k, x).unwrap() * walsh_eval(k, y).unwrap());
                        let m = PaleyIndex(b);
                        assert_eq!(
                            walsh_eval(k ^ m, x).unwrap(),
                            walsh_eval(k, x).unwrap() * walsh_eval(m, x).unwrap()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn characters_are_orthonormal() {
        for n in 1..=6 {
            let size = 1usize << n;
            let chars: Vec<_> = (0..size)
                .map(|k| GridFunction::character(PaleyIndex(k), n).unwrap())
                .collect();
            for k in 0..size {
                for m in 0..size {
                    let expected = if k == m { 1.0 } else { 0.0 };
                    assert_eq!(chars[k].inner(&chars[m]).unwrap(), expected);
                }
            }
        }
    }

    #[test]
    fn forward_examples() {
        let ones = GridFunction::new(vec![1.0; 8]).unwrap();
        assert_eq!(fwht_forward(&ones).coeffs(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);

        let w1 = GridFunction::new(vec![1.0, 1.0, -1.0, -1.0]).unwrap();
        assert_eq!(fwht_forward(&w1).coeffs(), &[0.0, 1.0, 0.0, 0.0]);

        let delta = GridFunction::unit(4).unwrap();
        assert!(fwht_forward(&delta).coeffs().iter().all(|&c| c == 1.0));
    }

    #[test]
    fn inverse_examples() {
        let s = WalshSpectrum::basis(PaleyIndex(0), 3).unwrap();
        assert_eq!(fwht_inverse(&s).values(), &[1.0; 8]);
        for k in 0..16 {
            let k = PaleyIndex(k);
            let s = WalshSpectrum::basis(k, 4).unwrap();
            assert_eq!(fwht_inverse(&s), GridFunction::character(k, 4).unwrap());
        }
    }

    #[test]
    fn rejects_bad_lengths() {
        assert_eq!(GridFunction::new(vec![0.0; 6]), Err(Error::NotPowerOfTwo(6)));
        assert_eq!(GridFunction::new(vec![0.0; 1]), Err(Error::InvalidResolution(0)));
        assert!(WalshSpectrum::new(vec![]).is_err());
    }

    #[test]
    fn convolution_unit_and_idempotent_characters() {
        let f = GridFunction::new(vec![0.5, -1.0, 3.0, 2.0, 0.0, 1.0, -2.0, 4.0]).unwrap();
        let delta = GridFunction::unit(3).unwrap();
        assert_close(dyadic_convolve(&f, &delta).unwrap().values(), f.values(), 1e-12);
        assert_close(dyadic_convolve_naive(&f, &delta).unwrap().values(), f.values(), 1e-12);

        for k in 0..8 {
            let w = GridFunction::character(PaleyIndex(k), 3).unwrap();
            assert_close(dyadic_convolve(&w, &w).unwrap().values(), w.values(), 1e-12);
            assert_close(dyadic_convolve_naive(&w, &w).unwrap().values(), w.values(), 1e-12);
        }
    }

    #[test]
    fn convolution_rejects_mismatch() {
        let a = GridFunction::zeros(2).unwrap();
        let b = GridFunction::zeros(3).unwrap();
        assert!(matches!(dyadic_convolve(&a, &b), Err(Error::ResolutionMismatch { .. })));
        assert!(dyadic_convolve_naive(&a, &b).is_err());
    }

    #[test]
    fn sequency_examples() {
        assert_eq!(PaleyIndex(3).gray(), PaleyIndex(2));
        assert_eq!(sequency(PaleyIndex(2), 2).unwrap(), 3);
        for n in 1..=6 {
            assert_eq!(sequency(PaleyIndex(0), n).unwrap(), 0);
        }
        assert!(sequency(PaleyIndex(4), 2).is_err());
    }

    #[test]
    fn sequency_is_independent_of_resolution() {
        for k in 0..32 {
            let base = sequency(PaleyIndex(k), 5).unwrap();
            for n in 6..=9 {
                assert_eq!(sequency(PaleyIndex(k), n).unwrap(), base);
            }
        }
    }

    #[test]
    fn gray_orders_by_sequency() {
        for n in 1..=12 {
            for k in 0..1usize << n {
                assert_eq!(sequency(PaleyIndex(k).gray(), n).unwrap(), k);
            }
        }
    }

    #[test]
    fn sign_change_predicate_matches_values() {
        for n in 1..=10 {
            for k in 0..1usize << n {
                let k = PaleyIndex(k);
                for x in crate::dyadic::grid_points(n).unwrap() {
                    let flips = walsh_eval(k, x).unwrap() != walsh_eval(k, x.predecessor()).unwrap();
                    assert_eq!(changes_sign_at(k, x).unwrap(), flips, "k={k} x={x}");
                }
            }
        }
    }

    fn grid_function(max_n: u32) -> impl Strategy<Value = GridFunction> {
        (1..=max_n).prop_flat_map(|n| {
            proptest::collection::vec(-10.0f64..10.0, 1usize << n)
                .prop_map(|v| GridFunction::new(v).unwrap())
        })
    }

    fn grid_function_pair(max_n: u32) -> impl Strategy<Value = (GridFunction, GridFunction)> {
        (1..=max_n).prop_flat_map(|n| {
            let v = || proptest::collection::vec(-10.0f64..10.0, 1usize << n);
            (v(), v()).prop_map(|(a, b)| (GridFunction::new(a).unwrap(), GridFunction::new(b).unwrap()))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn round_trip(f in grid_function(12)) {
            let back = fwht_inverse(&fwht_forward(&f));
            for (a, b) in back.values().iter().zip(f.values()) {
                prop_assert!((a - b).abs() <= 1e-12 * 10.0);
            }
        }

        #[test]
        fn parseval(f in grid_function(12)) {
            let s = fwht_forward(&f);
            prop_assert!((f.norm_squared() - s.energy()).abs() <= 1e-12 * f.norm_squared().max(1.0));
        }

        #[test]
        fn fast_matches_naive(f in grid_function(8)) {
            let fast = fwht_forward(&f);
            let naive = walsh_transform_naive(&f);
            for (a, b) in fast.coeffs().iter().zip(naive.coeffs()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn convolution_theorem((f, g) in grid_function_pair(8)) {
            let conv = fwht_forward(&dyadic_convolve_naive(&f, &g).unwrap());
            let (fs, gs) = (fwht_forward(&f), fwht_forward(&g));
            for k in 0..fs.len() {
                prop_assert!((conv.coeffs()[k] - fs.coeffs()[k] * gs.coeffs()[k]).abs() <= 1e-12 * 100.0);
            }
            let fast = dyadic_convolve(&f, &g).unwrap();
            let naive = dyadic_convolve_naive(&f, &g).unwrap();
            for (a, b) in fast.values().iter().zip(naive.values()) {
                prop_assert!((a - b).abs() <= 1e-12 * 100.0);
            }
        }
    }
}
