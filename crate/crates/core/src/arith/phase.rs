//! Points of the circle `R/Z` on a 2^-64 grid, and the unit exponential
//! `e(x) = exp(2πix)` evaluated from them.
//!
//! Multiplying a phase by an integer is a wrapping `u64` multiply, which is
//! exact modulo 1 for the grid value. All exponential sums in the crate feed
//! their arguments through this type, so the naive and decomposed routes see
//! bit-identical arguments.

use std::f64::consts::{PI, TAU};

const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

/// `x mod 1` stored as `x * 2^64`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Phase(pub u64);

impl Phase {
    pub const ZERO: Phase = Phase(0);

    /// Nearest grid point to `x mod 1`.
    pub fn from_f64(x: f64) -> Phase {
        let f = x - x.floor();
        let v = (f * TWO_POW_64).round();
        if v >= TWO_POW_64 {
            Phase(0)
        } else {
            Phase(v as u64)
        }
    }

    /// `a/q mod 1` rounded down to the grid.
    pub fn from_ratio(a: i64, q: u64) -> Phase {
        assert!(q > 0);
        let a = a.rem_euclid(q as i64) as u128;
        Phase(((a << 64) / q as u128) as u64)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / TWO_POW_64
    }

    /// Signed representative in `[-1/2, 1/2)`.
    pub fn signed(self) -> f64 {
        self.0 as i64 as f64 / TWO_POW_64
    }

    /// `‖x‖`, distance to the nearest integer.
    pub fn dist_to_int(self) -> f64 {
        (self.0 as i64).unsigned_abs() as f64 / TWO_POW_64
    }

    #[inline]
    pub fn mul(self, n: u64) -> Phase {
        Phase(self.0.wrapping_mul(n))
    }

    #[inline]
    pub fn add(self, other: Phase) -> Phase {
        Phase(self.0.wrapping_add(other.0))
    }

    #[inline]
    pub fn neg(self) -> Phase {
        Phase(self.0.wrapping_neg())
    }

    /// `e(x)` as `(cos 2πx, sin 2πx)`.
    ///
    /// The argument is split into a quarter-turn count and a remainder in
    /// `[-1/8, 1/8)`, so quarter and half turns come out exact.
    #[inline]
    pub fn unit_exp(self) -> (f64, f64) {
        let quadrant = (self.0.wrapping_add(1 << 61) >> 62) & 3;
        let rem = self.0.wrapping_sub(quadrant << 62) as i64;
        let (s, c) = (TAU * (rem as f64 / TWO_POW_64)).sin_cos();
        match quadrant {
            0 => (c, s),
            1 => (-s, c),
            2 => (-c, -s),
            _ => (s, -c),
        }
    }
}

/// `sin(πv)` for `v` given as a signed 65-bit fixed-point value
/// `raw / 2^64` (so `v` ranges over `[-1, 1)` after reduction mod 2).
fn sin_pi_mod2(raw: i128) -> f64 {
    let period = 1i128 << 65;
    let mut r = raw.rem_euclid(period);
    if r >= 1i128 << 64 {
        r -= period;
    }
    // sin(πv) = sin(π(1 - v)) folds |v| into [0, 1/2].
    let half = 1i128 << 63;
    let one = 1i128 << 64;
    let folded = if r > half {
        one - r
    } else if r < -half {
        -one - r
    } else {
        r
    };
    (PI * (folded as f64 / TWO_POW_64)).sin()
}

/// `sin(z)/z`, by series near zero.
fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-3 {
        let z2 = z * z;
        1.0 - z2 / 6.0 * (1.0 - z2 / 20.0 * (1.0 - z2 / 42.0))
    } else {
        z.sin() / z
    }
}

/// `Σ_{l=1}^{n} e(lφ)` in closed form.
///
/// Uses the Dirichlet-kernel shape `e((n+1)φ/2) · sin(πnφ)/sin(πφ)`, which is
/// algebraically the geometric formula `e(φ)(e(nφ)-1)/(e(φ)-1)` but does not
/// cancel catastrophically. When `‖φ‖ < 2^-30` the kernel ratio is taken
/// from `sinc` series instead.
pub fn geometric_sum(phi: Phase, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 0.0);
    }
    if phi.0 == 0 {
        return (n as f64, 0.0);
    }
    let eps = phi.0 as i64 as i128;
    let n_i = n as i128;
    let ratio = if phi.dist_to_int() < 2f64.powi(-30) {
        let e = eps as f64 / TWO_POW_64;
        n as f64 * sinc(PI * n as f64 * e) / sinc(PI * e)
    } else {
        sin_pi_mod2(n_i * eps) / (PI * (eps as f64 / TWO_POW_64)).sin()
    };
    // Centre phase (n+1)ε/2, taken mod 1 from (n+1)ε mod 2.
    let center_raw = ((n_i + 1) * eps).rem_euclid(1i128 << 65) >> 1;
    let (c, s) = Phase(center_raw as u64).unit_exp();
    (c * ratio, s * ratio)
}
