//! Exact arithmetic on quadratic surds `(p + √d)/q`.
//!
//! Floors of `(x + y√d)/z` are decided with one integer square root, which
//! settles every Beatty boundary case exactly when `α` is a quadratic
//! irrational and `β` is rational.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::fixed::FixedReal;
use super::intmath::isqrt_u128;
use crate::error::{Error, Result};

/// `(p + √d) / q` with `d > 0` not a perfect square and `q != 0`.
///
/// A negative `q` is how values with a negated root (such as reciprocals of
/// surds with `p² > d`) are written.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadSurd {
    p: BigInt,
    d: BigInt,
    q: BigInt,
}

impl QuadSurd {
    pub fn new(p: impl Into<BigInt>, d: impl Into<BigInt>, q: impl Into<BigInt>) -> Result<Self> {
        let (p, d, q) = (p.into(), d.into(), q.into());
        if q.is_zero() {
            return Err(Error::InvalidInput("surd denominator is zero".into()));
        }
        if !d.is_positive() {
            return Err(Error::InvalidInput(format!("radicand {d} must be positive")));
        }
        let r = d.sqrt();
        if &r * &r == d {
            return Err(Error::RationalInput(format!(
                "radicand {d} is a perfect square; ({p} + √{d})/{q} is rational"
            )));
        }
        Ok(QuadSurd { p, d, q }.reduced())
    }

    /// Divide out common factors `g` with `g | p`, `g | q`, `g² | d`.
    fn reduced(self) -> Self {
        let g = self.p.gcd(&self.q);
        let Some(g) = g.to_u64().filter(|&g| g > 1 && g <= 1_000_000) else {
            return self;
        };
        for f in (2..=g).rev() {
            let fb = BigInt::from(f);
            if g % f == 0 && (&self.d % (&fb * &fb)).is_zero() {
                return QuadSurd {
                    p: &self.p / &fb,
                    d: &self.d / (&fb * &fb),
                    q: &self.q / &fb,
                };
            }
        }
        self
    }

    pub fn p(&self) -> &BigInt {
        &self.p
    }

    pub fn d(&self) -> &BigInt {
        &self.d
    }

    pub fn q(&self) -> &BigInt {
        &self.q
    }

    /// Exact floor.
    pub fn floor(&self) -> BigInt {
        floor_surd(&self.p, &BigInt::one(), &self.d, &self.q)
    }

    /// `1 / self`, again a surd.
    pub fn recip(&self) -> QuadSurd {
        let n = &self.d - &self.p * &self.p;
        let dd = &self.q * &self.q * &self.d;
        let (p, q) = if self.q.is_positive() {
            (-(&self.q * &self.p), n)
        } else {
            (&self.q * &self.p, -n)
        };
        QuadSurd { p, d: dd, q }.reduced()
    }

    /// Enclosure at `bits` fractional bits.
    pub fn approx(&self, bits: u32) -> FixedReal {
        let r: BigInt = (&self.d << (2 * bits)).sqrt();
        let lo = (&self.p << bits) + &r;
        let hi = &lo + 1;
        let (lo, hi) = if self.q.is_positive() { (lo, hi) } else { (hi, lo) };
        let m_lo = lo.div_floor(&self.q);
        let m_hi = -((-hi).div_floor(&self.q));
        FixedReal::from_bounds(m_lo, m_hi, bits)
    }

    pub fn to_f64(&self) -> f64 {
        self.approx(64).to_f64()
    }
}

/// `floor((x + y√d) / z)` exactly, for `d` positive and not a perfect square.
pub fn floor_surd(x: &BigInt, y: &BigInt, d: &BigInt, z: &BigInt) -> BigInt {
    assert!(!z.is_zero());
    let (x, y, z) = if z.is_negative() {
        (-x, -y, -z)
    } else {
        (x.clone(), y.clone(), z.clone())
    };
    if y.is_zero() {
        return x.div_floor(&z);
    }
    let s: BigInt = (&y * &y * d).sqrt();
    if y.is_positive() {
        (x + s).div_floor(&z)
    } else {
        (x - s - BigInt::one()).div_floor(&z)
    }
}

/// [`floor_surd`] in 128-bit arithmetic; `None` on overflow.
pub fn floor_surd_i128(x: i128, y: i128, d: i128, z: i128) -> Option<i128> {
    if z == 0 {
        return None;
    }
    let (x, y, z) = if z < 0 {
        (x.checked_neg()?, y.checked_neg()?, -z)
    } else {
        (x, y, z)
    };
    if y == 0 {
        return Some(x.div_euclid(z));
    }
    let big = y.unsigned_abs().checked_mul(y.unsigned_abs())?.checked_mul(d as u128)?;
    let s = isqrt_u128(big) as i128;
    if y > 0 {
        Some(x.checked_add(s)?.div_euclid(z))
    } else {
        Some(x.checked_sub(s)?.checked_sub(1)?.div_euclid(z))
    }
}

/// `t ↦ (x0 + x1·t + (y0 + y1·t)√d) / z` with exact floors.
#[derive(Clone, Debug)]
pub struct AffineSurd {
    x0: BigInt,
    x1: BigInt,
    y0: BigInt,
    y1: BigInt,
    d: BigInt,
    z: BigInt,
    small: Option<[i128; 6]>,
}

impl AffineSurd {
    pub fn new(x0: BigInt, x1: BigInt, y0: BigInt, y1: BigInt, d: BigInt, z: BigInt) -> Self {
        let small = (|| {
            Some([
                x0.to_i128()?,
                x1.to_i128()?,
                y0.to_i128()?,
                y1.to_i128()?,
                d.to_i128()?,
                z.to_i128()?,
            ])
        })();
        AffineSurd {
            x0,
            x1,
            y0,
            y1,
            d,
            z,
            small,
        }
    }

    /// `α t + β` for `α = s` and `β = b_num / b_den`.
    pub fn alpha_t_plus_beta(s: &QuadSurd, b_num: &BigInt, b_den: &BigInt) -> Self {
        assert!(b_den.is_positive());
        AffineSurd::new(
            b_num * &s.q,
            b_den * &s.p,
            BigInt::zero(),
            b_den.clone(),
            s.d.clone(),
            b_den * &s.q,
        )
    }

    /// `s · (t + c)` for `c = c_num / c_den`.
    pub fn scaled_shift(s: &QuadSurd, c_num: &BigInt, c_den: &BigInt) -> Self {
        assert!(c_den.is_positive());
        AffineSurd::new(
            &s.p * c_num,
            &s.p * c_den,
            c_num.clone(),
            c_den.clone(),
            s.d.clone(),
            c_den * &s.q,
        )
    }

    /// Exact `floor(value(t))`.
    pub fn floor_at(&self, t: i64) -> BigInt {
        if let Some([x0, x1, y0, y1, d, z]) = self.small {
            let t = t as i128;
            let fast = (|| {
                let x = x0.checked_add(x1.checked_mul(t)?)?;
                let y = y0.checked_add(y1.checked_mul(t)?)?;
                floor_surd_i128(x, y, d, z)
            })();
            if let Some(v) = fast {
                return BigInt::from(v);
            }
        }
        let t = BigInt::from(t);
        let x = &self.x0 + &self.x1 * &t;
        let y = &self.y0 + &self.y1 * &t;
        floor_surd(&x, &y, &self.d, &self.z)
    }

    /// `(x0 + x1·t, y0 + y1·t)`.
    pub fn coeffs_at(&self, t: i64) -> (BigInt, BigInt) {
        let t = BigInt::from(t);
        (&self.x0 + &self.x1 * &t, &self.y0 + &self.y1 * &t)
    }

    pub fn d(&self) -> &BigInt {
        &self.d
    }

    pub fn z(&self) -> &BigInt {
        &self.z
    }

    /// Whether `value(t)` is rational (its root coefficient vanishes).
    pub fn is_rational_at(&self, t: i64) -> bool {
        (&self.y0 + &self.y1 * BigInt::from(t)).is_zero()
    }
}
