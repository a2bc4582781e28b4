//! The invariant suite run by `dyadic-approx verify`.
//!
//! Every check is evaluated per resolution `n = 1..=n_max` and reports the
//! largest discrepancy it observed against its tolerance. Checks on integer
//! quantities (bijections, counts, sign changes) use tolerance 0. Floating
//! checks use the configured tolerance, scaled by `2^n` where the compared
//! values themselves grow like `2^n`. The Monte-Carlo check is statistical
//! and uses a fixed 5% relative tolerance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::best_approx::{
    antiderivative_symbol_closed_form, approx_error, apply_symbol, best_convolution_symbol,
    difference_symbol_closed_form, gamma_symbol, optimal_gamma, symbol_to_operator,
    symmetric_difference_symbol_closed_form, translation_symbol_closed_form, ConvolutionSymbol,
    GammaFamily,
};
use crate::dyadic::{grid_points, h_mask, PaleyIndex};
use crate::operators::{
    compressed_antiderivative, difference_operator, hs_inner, hs_norm, hs_norm_monte_carlo,
    symmetric_difference_operator, translation_operator, DenseOperator, Orientation,
};
use crate::walsh::{
    changes_sign_at, dyadic_convolve, dyadic_convolve_naive, fwht_forward, fwht_inverse, sequency,
    walsh_eval, walsh_transform_naive, GridFunction,
};
use crate::Result;

pub const DEFAULT_N_MAX: u32 = 8;
pub const MAX_N_MAX: u32 = 10;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_SEED: u64 = 42;

/// Relative tolerance of the Monte-Carlo Hilbert–Schmidt estimate.
pub const MONTE_CARLO_TOLERANCE: f64 = 0.05;
pub const MONTE_CARLO_SAMPLES: usize = 100_000;
pub const MONTE_CARLO_RESOLUTION: u32 = 4;

/// Random trials per resolution for the randomized checks.
const RANDOM_TRIALS: usize = 100;

/// Closed-form constants that can be offset to exercise failure reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClosedForm {
    Translation,
    OptimalGamma,
    SymmetricDifference,
    Antiderivative,
}

impl ClosedForm {
    pub const ALL: [ClosedForm; 4] = [
        ClosedForm::Translation,
        ClosedForm::OptimalGamma,
        ClosedForm::SymmetricDifference,
        ClosedForm::Antiderivative,
    ];

    /// Checks whose outcome depends on this closed form.
    pub fn dependent_checks(self) -> &'static [&'static str] {
        match self {
            ClosedForm::Translation => &["translation_closed_form"],
            ClosedForm::OptimalGamma => &["gamma_closed_form", "gamma_negation"],
            ClosedForm::SymmetricDifference => &["symmetric_difference_zero"],
            ClosedForm::Antiderivative => &["antiderivative_symbol"],
        }
    }
}

/// Adds `delta` to every coefficient of one closed-form symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub target: ClosedForm,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub n_max: u32,
    pub tolerance: f64,
    pub seed: u64,
    pub perturbation: Option<Perturbation>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            n_max: DEFAULT_N_MAX,
            tolerance: DEFAULT_TOLERANCE,
            seed: DEFAULT_SEED,
            perturbation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub n: u32,
    pub max_abs_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub n_max: u32,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub overall_pass: bool,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn check(&self, name: &str, n: u32) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name && c.n == n)
    }
}

struct Recorder {
    n: u32,
    checks: Vec<Check>,
}

impl Recorder {
    fn record(&mut self, name: &str, max_abs_error: f64, tolerance: f64) {
        let pass = max_abs_error <= tolerance;
        self.push(name, max_abs_error, tolerance, pass);
    }

    fn push(&mut self, name: &str, max_abs_error: f64, tolerance: f64, pass: bool) {
        self.checks.push(Check {
            name: name.to_string(),
            n: self.n,
            max_abs_error,
            tolerance,
            pass,
        });
    }
}

/// Closed-form symbols as used by the suite, with any configured offset.
fn closed_form(
    config: &VerifyConfig,
    target: ClosedForm,
    build: impl FnOnce() -> Result<ConvolutionSymbol>,
) -> Result<ConvolutionSymbol> {
    let mut s = build()?;
    if let Some(p) = config.perturbation.filter(|p| p.target == target) {
        s.coeffs_mut().iter_mut().for_each(|c| *c += p.delta);
    }
    Ok(s)
}

fn rng_for(seed: u64, n: u32, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (u64::from(n) << 32) ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn random_function(n: u32, rng: &mut ChaCha8Rng) -> GridFunction {
    GridFunction::from_fn(n, |_| rng.random_range(-1.0..1.0)).expect("valid resolution")
}

fn random_symbol(n: u32, rng: &mut ChaCha8Rng) -> ConvolutionSymbol {
    ConvolutionSymbol::from_fn(n, |_| rng.random_range(-1.0..1.0)).expect("valid resolution")
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Runs every check for `n = 1..=config.n_max`.
pub fn run(config: &VerifyConfig) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    for n in 1..=config.n_max {
        let mut rec = Recorder { n, checks: Vec::new() };
        dyadic_checks(&mut rec)?;
        walsh_checks(&mut rec, config)?;
        operator_checks(&mut rec, config)?;
        best_approx_checks(&mut rec, config)?;
        checks.extend(rec.checks);
    }
    let overall_pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport {
        n_max: config.n_max,
        seed: config.seed,
        checks,
        overall_pass,
    })
}

fn dyadic_checks(rec: &mut Recorder) -> Result<()> {
    let n = rec.n;
    let size = 1usize << n;

    let mut seen = vec![false; size];
    let mut bad = 0usize;
    let mut commute_bad = 0usize;
    for k in (0..size).map(PaleyIndex) {
        let g = k.gray();
        if g.value() >= size || seen[g.value()] || g.gray_inverse() != k {
            bad += 1;
        } else {
            seen[g.value()] = true;
        }
        if g.shift() != k.shift().gray() {
            commute_bad += 1;
        }
    }
    rec.record("gray_bijection", bad as f64, 0.0);
    rec.record("gray_shift_commute", commute_bad as f64, 0.0);

    // x ⊕ ρ(|x - 2^-n| mod 1) = h_{M(x)}, including x = 0
    let mut bad = 0usize;
    let mut counts = vec![0usize; n as usize + 1];
    for x in grid_points(n)? {
        let lhs = x.dyadic_add(x.predecessor())?;
        if lhs != h_mask(x.last_set_position(), n)? {
            bad += 1;
        }
        if x.cell() != 0 {
            counts[x.last_set_position() as usize] += 1;
        }
    }
    rec.record("fine_map_identity", bad as f64, 0.0);

    let count_err = (1..=n)
        .map(|r| counts[r as usize].abs_diff(1 << (r - 1)))
        .max()
        .unwrap_or(0);
    rec.record("ball_counts", count_err as f64, 0.0);
    Ok(())
}

fn walsh_checks(rec: &mut Recorder, config: &VerifyConfig) -> Result<()> {
    let n = rec.n;
    let size = 1usize << n;
    let tol = config.tolerance;

    if n <= 6 {
        let points: Vec<_> = grid_points(n)?.collect();
        let mut bad = 0usize;
        for k in (0..size).map(PaleyIndex) {
            for &x in &points {
                for &y in &points {
                    let m = PaleyIndex(y.cell());
                    if walsh_eval(k, x.dyadic_add(y)?)? != walsh_eval(k, x)? * walsh_eval(k, y)?
                        || walsh_eval(k ^ m, x)? != walsh_eval(k, x)? * walsh_eval(m, x)?
                    {
                        bad += 1;
                    }
                }
            }
        }
        rec.record("character_law", bad as f64, 0.0);

        let chars: Vec<_> = (0..size)
            .map(|k| GridFunction::character(PaleyIndex(k), n))
            .collect::<Result<_>>()?;
        let mut err = 0.0f64;
        for (k, wk) in chars.iter().enumerate() {
            for (m, wm) in chars.iter().enumerate() {
                let expected = if k == m { 1.0 } else { 0.0 };
                err = err.max((wk.inner(wm)? - expected).abs());
            }
        }
        rec.record("orthonormality", err, tol);
    }

    let mut rng = rng_for(config.seed, n, 1);
    let (mut round_trip, mut parseval, mut naive_err) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..RANDOM_TRIALS {
        let f = random_function(n, &mut rng);
        let s = fwht_forward(&f);
        round_trip = round_trip.max(max_diff(fwht_inverse(&s).values(), f.values()));
        parseval = parseval.max((f.norm_squared() - s.energy()).abs());
        if n <= 8 {
            naive_err = naive_err.max(max_diff(s.coeffs(), walsh_transform_naive(&f).coeffs()));
        }
    }
    if n <= 8 {
        rec.record("fwht_vs_naive", naive_err, tol);
    }
    rec.record("fwht_round_trip", round_trip, tol);
    rec.record("parseval", parseval, tol);

    if n <= 8 {
        let mut conv_err = 0.0f64;
        let mut fast_naive = 0.0f64;
        for _ in 0..RANDOM_TRIALS {
            let f = random_function(n, &mut rng);
            let g = random_function(n, &mut rng);
            let naive = dyadic_convolve_naive(&f, &g)?;
            let (fs, gs) = (fwht_forward(&f), fwht_forward(&g));
            let product: Vec<f64> = fs.coeffs().iter().zip(gs.coeffs()).map(|(a, b)| a * b).collect();
            conv_err = conv_err.max(max_diff(fwht_forward(&naive).coeffs(), &product));
            fast_naive = fast_naive.max(max_diff(dyadic_convolve(&f, &g)?.values(), naive.values()));
        }
        rec.record("convolution_theorem", conv_err, tol);
        rec.record("convolution_fast_vs_naive", fast_naive, tol);
    }

    if n <= 10 {
        let mut bad = 0usize;
        for k in (0..size).map(PaleyIndex) {
            for x in grid_points(n)? {
                let flips = walsh_eval(k, x)? != walsh_eval(k, x.predecessor())?;
                if changes_sign_at(k, x)? != flips {
                    bad += 1;
                }
            }
        }
        rec.record("sign_change_predicate", bad as f64, 0.0);
    }

    let mut err = 0usize;
    for k in 0..size {
        err = err.max(sequency(PaleyIndex(k).gray(), n)?.abs_diff(k));
    }
    rec.record("sequency_gray", err as f64, 0.0);
    Ok(())
}

fn operator_checks(rec: &mut Recorder, config: &VerifyConfig) -> Result<()> {
    let n = rec.n;
    let size = 1usize << n;
    let tol = config.tolerance;

    if n <= 8 {
        let mut rng = rng_for(config.seed, n, 2);
        let mut err = 0.0f64;
        for _ in 0..8 {
            let a = DenseOperator::from_fn(n, |_, _| rng.random_range(-1.0..1.0))?;
            err = err.max((hs_norm(&a) - hs_norm(&a.walsh_conjugate())).abs());
        }
        rec.record("hs_walsh_conjugation", err, tol);
    }

    let full = translation_operator(n, size as i64)?;
    let id = DenseOperator::identity(n)?;
    rec.record("translation_full_cycle", full.max_abs_diff(&id)?, 0.0);

    let mut err = 0.0f64;
    let w0 = GridFunction::character(PaleyIndex(0), n)?;
    for orientation in Orientation::ALL {
        let d = difference_operator(n, orientation)?;
        err = err.max(d.apply(&w0)?.values().iter().map(|v| v.abs()).fold(0.0, f64::max));
    }
    rec.record("difference_annihilates_constants", err, 0.0);

    let j = compressed_antiderivative(n)?;
    let h = 1.0 / size as f64;
    let err = (0..size)
        .map(|r| (j.row(r).iter().sum::<f64>() - h * (r as f64 + 0.5)).abs())
        .fold(0.0, f64::max);
    rec.record("antiderivative_row_sums", err, 0.0);

    if n == config.n_max.min(MONTE_CARLO_RESOLUTION) {
        let mut rng = rng_for(config.seed, n, 3);
        let a = DenseOperator::random_gaussian(n, &mut rng)?;
        let exact = hs_norm(&a).powi(2);
        let estimate = hs_norm_monte_carlo(&a, MONTE_CARLO_SAMPLES, config.seed);
        rec.record("monte_carlo_hs", (estimate - exact).abs() / exact, MONTE_CARLO_TOLERANCE);
    }
    Ok(())
}

fn best_approx_checks(rec: &mut Recorder, config: &VerifyConfig) -> Result<()> {
    let n = rec.n;
    let size = 1usize << n;
    let tol = config.tolerance;
    let scaled_tol = tol * size as f64;
    let mut rng = rng_for(config.seed, n, 4);

    let s = random_symbol(n, &mut rng);
    let conj = symbol_to_operator(&s).walsh_conjugate();
    let mut err = 0.0f64;
    for k in 0..size {
        for l in 0..size {
            let expected = if k == l { s.coeffs()[k] } else { 0.0 };
            err = err.max((conj.get(k, l) - expected).abs());
        }
    }
    rec.record("symbol_diagonalization", err, tol);

    let g = random_function(n, &mut rng);
    let fast = apply_symbol(&s, &g)?;
    let dense = symbol_to_operator(&s).apply(&g)?;
    rec.record("apply_symbol_vs_dense", max_diff(fast.values(), dense.values()), tol);

    let a = DenseOperator::from_fn(n, |_, _| rng.random_range(-1.0..1.0))?;
    let best = best_convolution_symbol(&a);
    let residual = a.try_sub(&symbol_to_operator(&best))?;
    let mut orth = 0.0f64;
    for _ in 0..10 {
        let g = random_symbol(n, &mut rng);
        orth = orth.max(hs_inner(&residual, &symbol_to_operator(&g))?.abs());
    }
    rec.record("residual_orthogonality", orth, tol);

    if n <= 6 {
        let best_err = approx_error(&a, &best)?;
        let mut excess = 0.0f64;
        for _ in 0..RANDOM_TRIALS {
            let s = random_symbol(n, &mut rng);
            excess = excess.max(best_err - approx_error(&a, &s)?);
        }
        rec.record("best_symbol_optimality", excess.max(0.0), tol);
    }

    let t = translation_operator(n, 1)?;
    let closed = closed_form(config, ClosedForm::Translation, || translation_symbol_closed_form(n))?;
    rec.record("translation_closed_form", best_convolution_symbol(&t).max_abs_diff(&closed)?, tol);

    let gamma = closed_form(config, ClosedForm::OptimalGamma, || {
        difference_symbol_closed_form(n, Orientation::BackwardQuotient)
    })?;
    let back = best_convolution_symbol(&difference_operator(n, Orientation::BackwardQuotient)?);
    rec.record("gamma_closed_form", back.max_abs_diff(&gamma)?, scaled_tol);

    let negated = ConvolutionSymbol::new(gamma.coeffs().iter().map(|c| -c).collect())?;
    let literal = best_convolution_symbol(&difference_operator(n, Orientation::ShiftMinusIdentity)?);
    rec.record("gamma_negation", literal.max_abs_diff(&negated)?, scaled_tol);

    // the rule read off at n must agree with the one read off at n + 1
    let finer = best_convolution_symbol(&difference_operator(n + 1, Orientation::BackwardQuotient)?);
    let err = max_diff(back.coeffs(), &finer.coeffs()[..size]);
    rec.record("single_operator_consistency", err, tol * finer.len() as f64);

    let zero = closed_form(config, ClosedForm::SymmetricDifference, || {
        symmetric_difference_symbol_closed_form(n)
    })?;
    let sym = best_convolution_symbol(&symmetric_difference_operator(n)?);
    rec.record("symmetric_difference_zero", sym.max_abs_diff(&zero)?, tol);

    let half = closed_form(config, ClosedForm::Antiderivative, || antiderivative_symbol_closed_form(n))?;
    let anti = best_convolution_symbol(&compressed_antiderivative(n)?);
    rec.record("antiderivative_symbol", anti.max_abs_diff(&half)?, tol);

    let mut bad = 0usize;
    for m in 0..size {
        let expected = if m % 2 == 0 { 2 * m } else { 2 * (m + 1) };
        if optimal_gamma(PaleyIndex(m)) != expected as f64 {
            bad += 1;
        }
    }
    rec.record("gamma_even_odd_form", bad as f64, 0.0);

    if n >= 2 {
        let delta = difference_operator(n, Orientation::BackwardQuotient)?;
        let opt = approx_error(&delta, &gamma_symbol(GammaFamily::Optimal, n)?)?;
        let bw = approx_error(&delta, &gamma_symbol(GammaFamily::ButzerWagner, n)?)?;
        let on = approx_error(&delta, &gamma_symbol(GammaFamily::Onneweer, n)?)?;
        let mut random_min = f64::INFINITY;
        for _ in 0..RANDOM_TRIALS {
            let s = ConvolutionSymbol::from_fn(n, |_| rng.random_range(0.0..2.0 * size as f64))?;
            random_min = random_min.min(approx_error(&delta, &s)?);
        }
        // strict against the named families, non-strict against random symbols
        let pass = opt < bw && opt < on && opt <= random_min;
        let excess = (opt - bw.min(on).min(random_min)).max(0.0);
        rec.push("optimality_margin", excess, 0.0, pass);
    }
    Ok(())
}
