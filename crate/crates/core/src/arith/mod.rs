//! Certified fixed-point reals, exact surds, circle phases and compensated sums.

pub mod fixed;
pub mod intmath;
pub mod phase;
pub mod sum;
pub mod surd;

pub use fixed::{FixedReal, Precision};
pub use phase::{geometric_sum, Phase};
pub use sum::{kahan_add, unit_exp, ComplexSum};
pub use surd::{AffineSurd, QuadSurd};
