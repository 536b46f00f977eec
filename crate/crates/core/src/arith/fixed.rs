//! Base-2 fixed-point reals carrying a conservative error radius.
//!
//! A [`FixedReal`] stands for the closed interval
//! `[(mantissa - err_ulps) / 2^scale_bits, (mantissa + err_ulps) / 2^scale_bits]`,
//! which always contains the true value. Every operation rounds outward, so
//! the containment survives arbitrary chains of adds, integer multiplies,
//! products and reciprocals.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::phase::Phase;
use crate::error::{Error, Result};

/// Guard margin, in bits below the working ulp budget, that an error
/// interval must clear a decision boundary by before a floor is accepted.
pub const GUARD_BITS: u32 = 32;

/// Smallest scale allowed for values entering fractional-part decisions.
pub const MIN_DECISION_BITS: u32 = 64;

#[derive(Clone, PartialEq, Eq)]
pub struct FixedReal {
    mantissa: BigInt,
    scale_bits: u32,
    err_ulps: BigUint,
}

impl fmt::Debug for FixedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FixedReal({} ±{} ulp @ {} bits)",
            self.to_f64(),
            self.err_ulps,
            self.scale_bits
        )
    }
}

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

impl FixedReal {
    pub fn new(mantissa: BigInt, scale_bits: u32, err_ulps: BigUint) -> Self {
        FixedReal {
            mantissa,
            scale_bits,
            err_ulps,
        }
    }

    pub fn exact_int(value: impl Into<BigInt>, scale_bits: u32) -> Self {
        FixedReal::new(value.into() << scale_bits, scale_bits, BigUint::zero())
    }

    /// `num / den` rounded down; exact (zero error) when the quotient is dyadic
    /// at this scale.
    pub fn from_ratio(num: &BigInt, den: &BigInt, scale_bits: u32) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let (num, den) = if den.is_negative() {
            (-num, -den)
        } else {
            (num.clone(), den.clone())
        };
        let (q, r) = (num << scale_bits).div_mod_floor(&den);
        let err = if r.is_zero() {
            BigUint::zero()
        } else {
            BigUint::one()
        };
        FixedReal::new(q, scale_bits, err)
    }

    pub fn from_rational(r: &BigRational, scale_bits: u32) -> Self {
        FixedReal::from_ratio(r.numer(), r.denom(), scale_bits)
    }

    /// Smallest representable interval containing `[lo, hi] / 2^scale_bits`.
    pub fn from_bounds(lo: BigInt, hi: BigInt, scale_bits: u32) -> Self {
        debug_assert!(lo <= hi);
        let mid = (&lo + &hi).div_floor(&BigInt::from(2));
        let err = (&hi - &mid).to_biguint().unwrap_or_default();
        FixedReal::new(mid, scale_bits, err)
    }

    /// Interval `[lo_num/den, hi_num/den]` of rationals, rounded outward.
    pub fn from_rational_bounds(lo: &BigRational, hi: &BigRational, scale_bits: u32) -> Self {
        let lo_m = (lo.numer() << scale_bits).div_floor(lo.denom());
        let hi_m = ceil_div(&(hi.numer() << scale_bits), hi.denom());
        FixedReal::from_bounds(lo_m, hi_m, scale_bits)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn scale_bits(&self) -> u32 {
        self.scale_bits
    }

    pub fn err_ulps(&self) -> &BigUint {
        &self.err_ulps
    }

    pub fn is_exact(&self) -> bool {
        self.err_ulps.is_zero()
    }

    fn err_int(&self) -> BigInt {
        BigInt::from_biguint(Sign::Plus, self.err_ulps.clone())
    }

    pub fn lower(&self) -> BigInt {
        &self.mantissa - self.err_int()
    }

    pub fn upper(&self) -> BigInt {
        &self.mantissa + self.err_int()
    }

    /// Lower end of the interval as an exact rational.
    pub fn lower_rational(&self) -> BigRational {
        BigRational::new(self.lower(), pow2(self.scale_bits))
    }

    pub fn upper_rational(&self) -> BigRational {
        BigRational::new(self.upper(), pow2(self.scale_bits))
    }

    /// Whether the enclosure contains `r`.
    pub fn contains(&self, r: &BigRational) -> bool {
        &self.lower_rational() <= r && r <= &self.upper_rational()
    }

    /// Same value at a different scale. Widening is exact; narrowing rounds
    /// the interval outward.
    pub fn rescale(&self, scale_bits: u32) -> FixedReal {
        use std::cmp::Ordering::*;
        match scale_bits.cmp(&self.scale_bits) {
            Equal => self.clone(),
            Greater => {
                let d = scale_bits - self.scale_bits;
                FixedReal::new(&self.mantissa << d, scale_bits, &self.err_ulps << d)
            }
            Less => {
                let den = pow2(self.scale_bits - scale_bits);
                let lo = self.lower().div_floor(&den);
                let hi = ceil_div(&self.upper(), &den);
                FixedReal::from_bounds(lo, hi, scale_bits)
            }
        }
    }

    pub fn add(&self, other: &FixedReal) -> FixedReal {
        let s = self.scale_bits.max(other.scale_bits);
        let (a, b) = (self.rescale(s), other.rescale(s));
        FixedReal::new(a.mantissa + b.mantissa, s, a.err_ulps + b.err_ulps)
    }

    pub fn neg(&self) -> FixedReal {
        FixedReal::new(-&self.mantissa, self.scale_bits, self.err_ulps.clone())
    }

    pub fn sub(&self, other: &FixedReal) -> FixedReal {
        self.add(&other.neg())
    }

    /// Exact multiplication by an integer; the error radius scales with `|n|`.
    pub fn mul_int(&self, n: &BigInt) -> FixedReal {
        FixedReal::new(
            &self.mantissa * n,
            self.scale_bits,
            &self.err_ulps * n.magnitude(),
        )
    }

    /// Interval product at the larger of the two scales.
    pub fn mul(&self, other: &FixedReal) -> FixedReal {
        let s = self.scale_bits.max(other.scale_bits);
        let (a, b) = (self.rescale(s), other.rescale(s));
        let (al, ah, bl, bh) = (a.lower(), a.upper(), b.lower(), b.upper());
        let products = [&al * &bl, &al * &bh, &ah * &bl, &ah * &bh];
        let min = products.iter().min().unwrap();
        let max = products.iter().max().unwrap();
        let den = pow2(s);
        FixedReal::from_bounds(min.div_floor(&den), ceil_div(max, &den), s)
    }

    /// Reciprocal; fails when the enclosure touches zero.
    pub fn recip(&self) -> Result<FixedReal> {
        let (lo, hi) = (self.lower(), self.upper());
        if lo.sign() != hi.sign() || lo.is_zero() || hi.is_zero() {
            return Err(Error::PrecisionExhausted(
                "reciprocal of an interval containing zero".into(),
            ));
        }
        let s = self.scale_bits;
        let num = pow2(2 * s);
        // 1/x is decreasing on each sign branch.
        let r_lo = num.div_floor(&hi);
        let r_hi = ceil_div(&num, &lo);
        Ok(FixedReal::from_bounds(r_lo, r_hi, s))
    }

    /// Multiply by `2^k` by reinterpreting the scale; requires `k <= scale_bits`.
    pub fn mul_pow2(&self, k: u32) -> FixedReal {
        assert!(k <= self.scale_bits, "mul_pow2 beyond scale");
        FixedReal::new(self.mantissa.clone(), self.scale_bits - k, self.err_ulps.clone())
    }

    /// Certified floor, or `None` when the enclosure (widened by the guard
    /// margin) straddles an integer.
    pub fn try_floor(&self) -> Option<BigInt> {
        let den = pow2(self.scale_bits);
        if self.is_exact() {
            return Some(self.mantissa.div_floor(&den));
        }
        let guard = pow2(GUARD_BITS.min(self.scale_bits / 2));
        let lo = (self.lower() - &guard).div_floor(&den);
        let hi = (self.upper() + &guard).div_floor(&den);
        (lo == hi).then_some(lo)
    }

    pub fn floor(&self) -> Result<BigInt> {
        self.try_floor().ok_or_else(|| {
            Error::PrecisionExhausted(format!(
                "floor undecidable at {} bits (error {} ulp)",
                self.scale_bits, self.err_ulps
            ))
        })
    }

    /// `x - floor(x)`, in `[0, 1)`, carrying the same error radius.
    pub fn frac(&self) -> Result<FixedReal> {
        let fl = self.floor()?;
        Ok(FixedReal::new(
            &self.mantissa - (fl << self.scale_bits),
            self.scale_bits,
            self.err_ulps.clone(),
        ))
    }

    /// Nearest double to the midpoint.
    pub fn to_f64(&self) -> f64 {
        let bits = self.mantissa.bits();
        if bits <= 64 {
            let m = self.mantissa.to_i64().map(|v| v as f64).unwrap_or_else(|| {
                // Exactly 64 magnitude bits: only the sign branch fails to fit.
                self.mantissa.to_f64().unwrap_or(f64::NAN)
            });
            return m * 2f64.powi(-(self.scale_bits as i32));
        }
        let shift = (bits - 64) as u32;
        let top = (&self.mantissa >> shift).to_f64().unwrap_or(f64::NAN);
        top * 2f64.powi(shift as i32 - self.scale_bits as i32)
    }

    /// Midpoint reduced mod 1 onto the 64-bit phase grid (truncating).
    /// Never fails: a phase is continuous across integers.
    pub fn to_phase(&self) -> Phase {
        let s = self.scale_bits;
        let frac = self.mantissa.mod_floor(&pow2(s));
        let grid = if s >= 64 {
            frac >> (s - 64)
        } else {
            frac << (64 - s)
        };
        Phase(grid.to_u64().unwrap_or(0))
    }

    /// Distance from the midpoint to the nearest integer, as a double.
    pub fn dist_to_int(&self) -> f64 {
        self.to_phase().dist_to_int()
    }
}

/// Precision-escalation policy: start at `initial_bits` and double up to
/// `cap_bits`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Precision {
    pub initial_bits: u32,
    pub cap_bits: u32,
}

impl Default for Precision {
    fn default() -> Self {
        Precision {
            initial_bits: 128,
            cap_bits: 1024,
        }
    }
}

impl Precision {
    pub fn new(initial_bits: u32, cap_bits: u32) -> Self {
        let initial_bits = initial_bits.max(MIN_DECISION_BITS);
        Precision {
            initial_bits,
            cap_bits: cap_bits.max(initial_bits),
        }
    }

    /// Run `attempt` at increasing precision until it returns `Some`.
    /// `attempt` may itself fail (for instance when the input cannot supply
    /// the requested bits), which aborts the escalation.
    pub fn escalate<T>(&self, mut attempt: impl FnMut(u32) -> Result<Option<T>>) -> Result<T> {
        let mut bits = self.initial_bits;
        loop {
            if let Some(v) = attempt(bits)? {
                return Ok(v);
            }
            if bits >= self.cap_bits {
                return Err(Error::PrecisionExhausted(format!(
                    "decision still undecided at the {}-bit cap",
                    self.cap_bits
                )));
            }
            bits = (bits * 2).min(self.cap_bits);
        }
    }
}
