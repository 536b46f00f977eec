//! k-free integers along Beatty sequences `⌊αn + β⌋`.
//!
//! The crate counts k-free values of Beatty sequences exactly, evaluates the
//! double exponential sum `Σ_h Σ_{n ∈ Q_k} e(θhn)` both directly and through
//! its three-range hyperbola decomposition, builds the trapezoidal smoothed
//! indicator used to pass from Beatty membership to Fourier series, computes
//! exact extreme discrepancy of `{αm + β}`, and estimates irrationality type
//! from continued fractions.
//!
//! All floor and fractional-part decisions are certified: quadratic
//! irrationals are handled in exact surd arithmetic, everything else in
//! fixed-point interval arithmetic with precision escalation.

pub mod approx;
pub mod arith;
pub mod beatty;
pub mod discrepancy;
pub mod error;
pub mod expsum;
pub mod fit;
pub mod kfree;
pub mod smoothing;

pub use error::{Error, Result};
