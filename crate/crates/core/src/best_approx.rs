//! Best Hilbert–Schmidt approximation by dyadic convolution operators.
//!
//! A dyadic convolution operator `C_f g = f ⊛ g` on `F_n` is diagonal in the
//! Walsh basis with eigenvalues `f~(k)`. Its symbol is that eigenvalue
//! sequence, stored in Paley order. Because the Walsh basis is orthonormal,
//! the nearest convolution operator to any `A` in Hilbert–Schmidt norm keeps
//! the diagonal of `A` in that basis and drops everything else:
//! `f~(k) = <A w_k, w_k>`.
//!
//! For the cyclic translation `T_{2^-n}` the diagonal has the closed form
//! `f~(G m) = 1 - 2^{1-n} (m + m_0)`. Hence the backward difference
//! `Δ_n = 2^n (I - T_{2^-n})` is best approximated by the symbol
//! `γ(G m) = 2 (m_0 + m)`, the same rule at every resolution.

use crate::dyadic::PaleyIndex;
use crate::error::{check_resolution, check_same};
use crate::operators::{hs_norm, DenseOperator, Orientation};
use crate::walsh::{self, GridFunction, WalshSpectrum};
use crate::Result;

/// Walsh eigenvalues of a dyadic convolution operator, in Paley order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionSymbol {
    resolution: u32,
    coeffs: Vec<f64>,
}

impl ConvolutionSymbol {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        // same length rules as a spectrum
        let s = WalshSpectrum::new(coeffs)?;
        Ok(Self {
            resolution: s.resolution(),
            coeffs: s.into_coeffs(),
        })
    }

    pub fn from_fn(resolution: u32, f: impl FnMut(PaleyIndex) -> f64) -> Result<Self> {
        check_resolution(resolution)?;
        let coeffs = (0..1usize << resolution).map(PaleyIndex).map(f).collect();
        Ok(Self { resolution, coeffs })
    }

    /// Symbol indexed by sequency: `coeffs[G m] = f(m)`.
    pub fn from_sequency_fn(resolution: u32, mut f: impl FnMut(PaleyIndex) -> f64) -> Result<Self> {
        Self::from_fn(resolution, |k| f(k.gray_inverse()))
    }

    pub fn constant(resolution: u32, value: f64) -> Result<Self> {
        Self::from_fn(resolution, |_| value)
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

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Coefficient at Paley index `k`.
    pub fn at(&self, k: PaleyIndex) -> f64 {
        self.coeffs[k.value()]
    }

    /// Coefficients reordered by sequency: entry `m` is `coeffs[G m]`.
    pub fn sequency_order(&self) -> Vec<f64> {
        (0..self.len()).map(|m| self.coeffs[PaleyIndex(m).gray().value()]).collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        check_same(self.resolution, other.resolution)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// The kernel `f` with `f~ = self`.
    pub fn kernel(&self) -> GridFunction {
        walsh::fwht_inverse(&self.to_spectrum())
    }

    fn to_spectrum(&self) -> WalshSpectrum {
        WalshSpectrum::new(self.coeffs.clone()).expect("length validated on construction")
    }
}

/// A sequence `γ` defining the derivative `D_γ w_k = γ(k) w_k`.
#[derive(Debug, Clone, Copy)]
pub enum GammaFamily {
    /// `γ(G m) = 2 (m_0 + m)`.
    Optimal,
    /// `γ(k) = k`.
    ButzerWagner,
    /// `γ(k) = 2^{⌊log2 k⌋}`, `γ(0) = 0`.
    Onneweer,
    Custom(fn(PaleyIndex) -> f64),
}

impl GammaFamily {
    pub fn name(&self) -> &'static str {
        match self {
            GammaFamily::Optimal => "optimal",
            GammaFamily::ButzerWagner => "butzer_wagner",
            GammaFamily::Onneweer => "onneweer",
            GammaFamily::Custom(_) => "custom",
        }
    }

    /// `γ(k)` at Paley index `k`.
    pub fn gamma(&self, k: PaleyIndex) -> f64 {
        match self {
            GammaFamily::Optimal => optimal_gamma(k.gray_inverse()),
            GammaFamily::ButzerWagner => k.value() as f64,
            GammaFamily::Onneweer => match k.value() {
                0 => 0.0,
                v => (1u64 << v.ilog2()) as f64,
            },
            GammaFamily::Custom(f) => f(k),
        }
    }
}

/// `γ(G m) = 2 (m_0 + m)`, taking the sequency label `m`.
///
/// That is `2m` for even `m` and `2(m + 1)` for odd `m`.
pub fn optimal_gamma(m: PaleyIndex) -> f64 {
    2.0 * (m.bit(0) + m.value()) as f64
}

/// Restriction of `D_γ` to `F_n`: `coeffs[k] = γ(k)` for `k < 2^n`.
pub fn gamma_symbol(family: GammaFamily, resolution: u32) -> Result<ConvolutionSymbol> {
    ConvolutionSymbol::from_fn(resolution, |k| family.gamma(k))
}

/// `<A w_k, w_k>` for every `k`: the orthogonal projection of `A` onto the
/// convolution operators.
pub fn best_convolution_symbol(a: &DenseOperator) -> ConvolutionSymbol {
    ConvolutionSymbol {
        resolution: a.resolution(),
        coeffs: a.walsh_diagonal(),
    }
}

/// `f~(G m) = 1 - 2^{1-n} (m + m_0)` for the best approximation of `T_{2^-n}`.
pub fn translation_symbol_closed_form(resolution: u32) -> Result<ConvolutionSymbol> {
    check_resolution(resolution)?;
    let scale = 2.0 / (1u64 << resolution) as f64;
    ConvolutionSymbol::from_sequency_fn(resolution, |m| {
        1.0 - scale * (m.value() + m.bit(0)) as f64
    })
}

/// Best symbol of `Δ_n`: the optimal `γ`, negated for [`Orientation::ShiftMinusIdentity`].
pub fn difference_symbol_closed_form(
    resolution: u32,
    orientation: Orientation,
) -> Result<ConvolutionSymbol> {
    let sign = orientation.sign();
    ConvolutionSymbol::from_sequency_fn(resolution, |m| sign * optimal_gamma(m))
}

/// The symmetric difference is best approximated by the zero operator.
pub fn symmetric_difference_symbol_closed_form(resolution: u32) -> Result<ConvolutionSymbol> {
    ConvolutionSymbol::constant(resolution, 0.0)
}

/// `<J w_0, w_0> = 1/2` and `<J w_k, w_k> = 0` for `k >= 1`.
pub fn antiderivative_symbol_closed_form(resolution: u32) -> Result<ConvolutionSymbol> {
    ConvolutionSymbol::from_fn(resolution, |k| if k.value() == 0 { 0.5 } else { 0.0 })
}

/// Matrix of `g ↦ f ⊛ g` with `f~ = s`: entry `[j, t] = 2^-n f(x_j ⊕ x_t)`.
pub fn symbol_to_operator(s: &ConvolutionSymbol) -> DenseOperator {
    let kernel = s.kernel();
    let f = kernel.values();
    let scale = 1.0 / s.len() as f64;
    DenseOperator::from_fn(s.resolution, |r, c| scale * f[r ^ c])
        .expect("resolution validated on construction")
}

/// `C_s g` through the spectra, `O(n 2^n)`.
pub fn apply_symbol(s: &ConvolutionSymbol, g: &GridFunction) -> Result<GridFunction> {
    check_same(s.resolution, g.resolution())?;
    let mut spectrum = walsh::fwht_forward(g).into_coeffs();
    spectrum.iter_mut().zip(&s.coeffs).for_each(|(a, b)| *a *= b);
    Ok(walsh::fwht_inverse(&WalshSpectrum::new(spectrum)?))
}

/// `‖A - C_s‖_HS`.
pub fn approx_error(a: &DenseOperator, s: &ConvolutionSymbol) -> Result<f64> {
    check_same(a.resolution(), s.resolution)?;
    Ok(hs_norm(&a.try_sub(&symbol_to_operator(s))?))
}

/// `‖A - C_best‖_HS` by Pythagoras: `sqrt(‖A‖² - Σ_k best[k]²)`.
///
/// `C_s` has Hilbert–Schmidt norm `sqrt(Σ s_k²)` since it is diagonal in an
/// orthonormal basis.
pub fn projection_residual(a: &DenseOperator) -> f64 {
    let best = best_convolution_symbol(a);
    let kept: f64 = best.coeffs.iter().map(|c| c * c).sum();
    (hs_norm(a).powi(2) - kept).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{
        compressed_antiderivative, difference_operator, hs_inner, symmetric_difference_operator,
        translation_operator,
    };
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assert_symbol_close(a: &ConvolutionSymbol, b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.coeffs().iter().zip(b) {
            assert_abs_diff_eq!(x, y, epsilon = tol);
        }
    }

    #[test]
    fn best_symbol_examples() {
        for n in 1..=6 {
            let id = DenseOperator::identity(n).unwrap();
            assert_symbol_close(&best_convolution_symbol(&id), &vec![1.0; 1 << n], 1e-12);

            let sym = symmetric_difference_operator(n).unwrap();
            assert_symbol_close(&best_convolution_symbol(&sym), &vec![0.0; 1 << n], 1e-12);

            let t = translation_operator(n, 1).unwrap();
            let closed = translation_symbol_closed_form(n).unwrap();
            assert!(best_convolution_symbol(&t).max_abs_diff(&closed).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn translation_closed_form_examples() {
        assert_eq!(translation_symbol_closed_form(1).unwrap().coeffs(), &[1.0, -1.0]);
        let s2 = translation_symbol_closed_form(2).unwrap();
        assert_eq!(s2.at(PaleyIndex(3).gray()), -1.0);
        assert_eq!(s2.at(PaleyIndex(2)), -1.0);
        for n in 1..=10 {
            assert_eq!(translation_symbol_closed_form(n).unwrap().coeffs()[0], 1.0);
        }
    }

    #[test]
    fn optimal_gamma_examples() {
        assert_eq!(optimal_gamma(PaleyIndex(0)), 0.0);
        assert_eq!(optimal_gamma(PaleyIndex(1)), 4.0);
        assert_eq!(optimal_gamma(PaleyIndex(2)), 4.0);
        assert_eq!(optimal_gamma(PaleyIndex(3)), 8.0);
    }

    #[test]
    fn optimal_gamma_even_odd_form() {
        for m in 0..1usize << 16 {
            let expected = if m % 2 == 0 { 2 * m } else { 2 * (m + 1) };
            assert_eq!(optimal_gamma(PaleyIndex(m)), expected as f64);
        }
    }

    #[test]
    fn gamma_symbol_examples() {
        assert_eq!(gamma_symbol(GammaFamily::Optimal, 2).unwrap().coeffs(), &[0.0, 4.0, 8.0, 4.0]);
        assert_eq!(
            gamma_symbol(GammaFamily::ButzerWagner, 2).unwrap().coeffs(),
            &[0.0, 1.0, 2.0, 3.0]
        );
        assert_eq!(gamma_symbol(GammaFamily::Onneweer, 2).unwrap().coeffs(), &[0.0, 1.0, 2.0, 2.0]);
        assert_eq!(
            gamma_symbol(GammaFamily::Onneweer, 3).unwrap().coeffs(),
            &[0.0, 1.0, 2.0, 2.0, 4.0, 4.0, 4.0, 4.0]
        );
        let custom = GammaFamily::Custom(|k| (k.value() * k.value()) as f64);
        assert_eq!(gamma_symbol(custom, 2).unwrap().coeffs(), &[0.0, 1.0, 4.0, 9.0]);
        assert_eq!(
            gamma_symbol(GammaFamily::Optimal, 2).unwrap().sequency_order(),
            vec![0.0, 4.0, 4.0, 8.0]
        );
    }

    #[test]
    fn symbol_to_operator_examples() {
        for n in 1..=5 {
            let one = ConvolutionSymbol::constant(n, 1.0).unwrap();
            let id = DenseOperator::identity(n).unwrap();
            assert!(symbol_to_operator(&one).max_abs_diff(&id).unwrap() <= 1e-14);

            let e0 = ConvolutionSymbol::from_fn(n, |k| if k.value() == 0 { 1.0 } else { 0.0 }).unwrap();
            let avg = symbol_to_operator(&e0);
            let h = 1.0 / (1u64 << n) as f64;
            assert!(avg.entries().iter().all(|&v| (v - h).abs() <= 1e-15));
        }
    }

    #[test]
    fn apply_symbol_examples() {
        let n = 4;
        let gamma = gamma_symbol(GammaFamily::Optimal, n).unwrap();
        for k in 0..16 {
            let k = PaleyIndex(k);
            let w = GridFunction::character(k, n).unwrap();
            let out = apply_symbol(&gamma, &w).unwrap();
            for (o, v) in out.values().iter().zip(w.values()) {
                assert_abs_diff_eq!(*o, gamma.at(k) * v, epsilon = 1e-12);
            }
        }
        let g = GridFunction::new((0..16).map(|i| (i as f64).sin()).collect()).unwrap();
        let one = ConvolutionSymbol::constant(n, 1.0).unwrap();
        let out = apply_symbol(&one, &g).unwrap();
        for (a, b) in out.values().iter().zip(g.values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        assert!(apply_symbol(&one, &GridFunction::zeros(3).unwrap()).is_err());
    }

    #[test]
    fn approx_error_examples() {
        let n = 3;
        let s = gamma_symbol(GammaFamily::ButzerWagner, n).unwrap();
        assert!(approx_error(&symbol_to_operator(&s), &s).unwrap() < 1e-12);

        for n in 2..=7 {
            let delta = difference_operator(n, Orientation::BackwardQuotient).unwrap();
            let opt = approx_error(&delta, &gamma_symbol(GammaFamily::Optimal, n).unwrap()).unwrap();
            let bw = approx_error(&delta, &gamma_symbol(GammaFamily::ButzerWagner, n).unwrap()).unwrap();
            let on = approx_error(&delta, &gamma_symbol(GammaFamily::Onneweer, n).unwrap()).unwrap();
            assert!(opt < bw && opt < on, "n={n}: {opt} {bw} {on}");

            let best = best_convolution_symbol(&delta);
            let direct = approx_error(&delta, &best).unwrap();
            assert_abs_diff_eq!(direct, projection_residual(&delta), epsilon = 1e-9);
            assert_abs_diff_eq!(direct, opt, epsilon = 1e-9);
        }
        let wrong = ConvolutionSymbol::constant(2, 0.0).unwrap();
        assert!(approx_error(&DenseOperator::identity(3).unwrap(), &wrong).is_err());
    }

    #[test]
    fn gamma_and_translation_closed_forms() {
        for n in 1..=8 {
            let tol = 1e-9 * (1u64 << n) as f64;
            for orientation in Orientation::ALL {
                let delta = difference_operator(n, orientation).unwrap();
                let closed = difference_symbol_closed_form(n, orientation).unwrap();
                assert!(best_convolution_symbol(&delta).max_abs_diff(&closed).unwrap() <= tol);
            }
        }
    }

    #[test]
    fn antiderivative_symbol() {
        for n in 1..=10 {
            let j = compressed_antiderivative(n).unwrap();
            let closed = antiderivative_symbol_closed_form(n).unwrap();
            assert!(best_convolution_symbol(&j).max_abs_diff(&closed).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn best_symbol_beats_random_symbols() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for n in 1..=6 {
            let a = DenseOperator::random_gaussian(n, &mut rng).unwrap();
            let best = best_convolution_symbol(&a);
            let best_err = approx_error(&a, &best).unwrap();
            for _ in 0..100 {
                let s = ConvolutionSymbol::from_fn(n, |k| {
                    best.at(k) + rand::Rng::random_range(&mut rng, -1.0..1.0)
                })
                .unwrap();
                assert!(best_err < approx_error(&a, &s).unwrap());
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn symbol_operator_is_walsh_diagonal(coeffs in (1u32..=6).prop_flat_map(|n| proptest::collection::vec(-5.0f64..5.0, 1usize << n))) {
            let s = ConvolutionSymbol::new(coeffs).unwrap();
            let conj = symbol_to_operator(&s).walsh_conjugate();
            for k in 0..s.len() {
                for l in 0..s.len() {
                    let expected = if k == l { s.coeffs()[k] } else { 0.0 };
                    prop_assert!((conj.get(k, l) - expected).abs() <= 1e-12);
                }
            }
        }

        #[test]
        fn residual_is_orthogonal_to_convolutions(seed in any::<u64>(), n in 1u32..=6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = DenseOperator::random_gaussian(n, &mut rng).unwrap();
            let residual = a.try_sub(&symbol_to_operator(&best_convolution_symbol(&a))).unwrap();
            let g = ConvolutionSymbol::from_fn(n, |_| rand::Rng::random_range(&mut rng, -1.0..1.0)).unwrap();
            prop_assert!(hs_inner(&residual, &symbol_to_operator(&g)).unwrap().abs() <= 1e-10);
        }

        #[test]
        fn apply_symbol_matches_dense(seed in any::<u64>(), n in 1u32..=7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = ConvolutionSymbol::from_fn(n, |_| rand::Rng::random_range(&mut rng, -3.0..3.0)).unwrap();
            let g = GridFunction::from_fn(n, |_| rand::Rng::random_range(&mut rng, -3.0..3.0)).unwrap();
            let fast = apply_symbol(&s, &g).unwrap();
            let dense = symbol_to_operator(&s).apply(&g).unwrap();
            for (a, b) in fast.values().iter().zip(dense.values()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}
