//! Dyadic harmonic analysis at finite resolution.
//!
//! The crate models the dyadic group truncated to `n` binary digits, the
//! Walsh–Paley characters on it, and dense operators on the space `F_n` of
//! step functions that are constant on the `2^n` dyadic cells of `[0, 1)`.
//! On top of that it computes the Hilbert–Schmidt best approximation of an
//! arbitrary operator by a dyadic convolution operator, both by projection
//! and through closed forms for the cyclic translation and difference
//! operators.
//!
//! Modules, bottom-up:
//!
//! * [`dyadic`]: bit algebra of indices and grid points (XOR addition, shift,
//!   Gray map, sign-change bookkeeping).
//! * [`walsh`]: character evaluation, the normalized fast Walsh transform,
//!   dyadic convolution and sequency counting.
//! * [`operators`]: dense operators, the classical cyclic operators and
//!   Hilbert–Schmidt metrics.
//! * [`best_approx`]: projection onto the convolution algebra, derivative
//!   families and approximation errors.
//! * [`verify`]: the invariant suite behind `dyadic-approx verify`.
//! * [`cli`]: command implementations for the binary.

pub mod best_approx;
pub mod cli;
pub mod dyadic;
mod error;
pub mod operators;
pub mod verify;
pub mod walsh;

pub use error::{Error, Result};

/// Largest resolution accepted by constructors of grid-sized objects.
///
/// Dense operators at this size already hold `2^24` entries; vectors and
/// index algebra are cheap well beyond it, but nothing in the crate needs more.
pub const MAX_RESOLUTION: u32 = 24;
