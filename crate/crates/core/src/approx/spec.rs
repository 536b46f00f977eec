use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{FixedReal, QuadSurd};
use crate::error::{Error, Result};

/// A real number given exactly or to a stated precision.
///
/// Text form: `quad:p,d,q` for `(p + √d)/q`, `cf:a0,a1,...` for a prefix of
/// a simple continued fraction, `dec:3.14159...:bits` for a decimal known to
/// within `2^-bits`.
#[derive(Clone, Debug, PartialEq)]
pub enum IrrationalSpec {
    Quadratic(QuadSurd),
    /// Finite prefix `[a0; a1, a2, ...]` of an infinite expansion.
    PartialQuotients(Vec<u64>),
    Decimal {
        text: String,
        value: BigRational,
        bits: u32,
    },
}

impl IrrationalSpec {
    pub fn quadratic(p: i64, d: i64, q: i64) -> Result<Self> {
        Ok(IrrationalSpec::Quadratic(QuadSurd::new(p, d, q)?))
    }

    pub fn golden_ratio() -> Self {
        IrrationalSpec::quadratic(1, 5, 2).expect("valid surd")
    }

    pub fn sqrt(d: i64) -> Result<Self> {
        IrrationalSpec::quadratic(0, d, 1)
    }

    pub fn partial_quotients(quotients: Vec<u64>) -> Result<Self> {
        if quotients.is_empty() {
            return Err(Error::InvalidInput("empty continued fraction".into()));
        }
        if quotients[1..].contains(&0) {
            return Err(Error::InvalidInput(
                "partial quotients after the first must be positive".into(),
            ));
        }
        Ok(IrrationalSpec::PartialQuotients(quotients))
    }

    pub fn decimal(text: &str, bits: u32) -> Result<Self> {
        let value = parse_decimal(text)?;
        Ok(IrrationalSpec::Decimal {
            text: text.to_string(),
            value,
            bits,
        })
    }

    /// Largest precision the input can usefully supply, `None` if unlimited.
    pub fn certified_bits(&self) -> Option<u32> {
        match self {
            IrrationalSpec::Quadratic(_) => None,
            IrrationalSpec::PartialQuotients(_) => {
                let (lo, hi) = self.cf_prefix_bounds();
                let width = (&hi - &lo).abs();
                Some(bits_of_width(&width))
            }
            IrrationalSpec::Decimal { bits, .. } => Some(*bits),
        }
    }

    /// Rational interval known to contain the value for prefix inputs.
    fn cf_prefix_bounds(&self) -> (BigRational, BigRational) {
        let IrrationalSpec::PartialQuotients(a) = self else {
            unreachable!("only for prefixes")
        };
        // The value is [a0; ..., an, t] with tail t >= 1, so it lies between
        // p_n/q_n (t → ∞) and (p_n + p_{n-1})/(q_n + q_{n-1}) (t = 1).
        let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
        let (mut p1, mut q1) = (BigInt::from(a[0]), BigInt::one());
        for &ai in &a[1..] {
            let p2 = BigInt::from(ai) * &p1 + &p0;
            let q2 = BigInt::from(ai) * &q1 + &q0;
            (p0, q0, p1, q1) = (p1, q1, p2, q2);
        }
        let x = BigRational::new(p1.clone(), q1.clone());
        let y = BigRational::new(&p1 + &p0, &q1 + &q0);
        if x <= y {
            (x, y)
        } else {
            (y, x)
        }
    }

    /// Enclosure at `bits` fractional bits. The error radius reflects what
    /// the input actually certifies, which for prefixes and decimals may be
    /// far wider than one ulp.
    pub fn approx(&self, bits: u32) -> FixedReal {
        match self {
            IrrationalSpec::Quadratic(s) => s.approx(bits),
            IrrationalSpec::PartialQuotients(_) => {
                let (lo, hi) = self.cf_prefix_bounds();
                FixedReal::from_rational_bounds(&lo, &hi, bits)
            }
            IrrationalSpec::Decimal { value, bits: b, .. } => {
                let eps = BigRational::new(BigInt::one(), BigInt::one() << *b);
                FixedReal::from_rational_bounds(&(value - &eps), &(value + &eps), bits)
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.approx(96).to_f64()
    }

    /// `1/self`, in the same representation class.
    pub fn reciprocal(&self) -> Result<IrrationalSpec> {
        match self {
            IrrationalSpec::Quadratic(s) => Ok(IrrationalSpec::Quadratic(s.recip())),
            IrrationalSpec::PartialQuotients(a) => {
                if a[0] == 0 {
                    if a.len() < 2 {
                        return Err(Error::InvalidInput("reciprocal of [0]".into()));
                    }
                    Ok(IrrationalSpec::PartialQuotients(a[1..].to_vec()))
                } else {
                    let mut v = Vec::with_capacity(a.len() + 1);
                    v.push(0);
                    v.extend_from_slice(a);
                    Ok(IrrationalSpec::PartialQuotients(v))
                }
            }
            IrrationalSpec::Decimal { value, bits, .. } => {
                if value.is_zero() {
                    return Err(Error::InvalidInput("reciprocal of zero".into()));
                }
                // |δ(1/x)| ≈ |δx|/x²; lose the bits that x < 1 would cost.
                let mag = value.abs();
                let loss = if mag < BigRational::one() {
                    let inv = BigRational::one() / &mag;
                    2 * (inv.to_integer().bits() as u32 + 1)
                } else {
                    0
                };
                let new_bits = bits.saturating_sub(loss + 2);
                let inv = BigRational::one() / value;
                let digits = (new_bits as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2;
                let text = format_decimal(&inv, digits);
                let value = parse_decimal(&text)?;
                Ok(IrrationalSpec::Decimal {
                    text,
                    value,
                    bits: new_bits,
                })
            }
        }
    }

    /// Whether the value is certainly greater than one.
    pub fn exceeds_one(&self) -> bool {
        let a = self.approx(128);
        a.lower() > (BigInt::one() << 128u32)
    }
}

fn bits_of_width(width: &BigRational) -> u32 {
    if width.is_zero() {
        return u32::MAX;
    }
    // floor(log2(1/width)), conservatively.
    let inv = BigRational::one() / width;
    let n = inv.to_integer();
    if n.is_zero() {
        0
    } else {
        (n.bits() as u32).saturating_sub(1)
    }
}

/// Exact rational value of a decimal literal like `-3.14159` or `2`.
pub fn parse_decimal(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(Error::Parse(format!("not a decimal number: {text:?}")));
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits
            .parse()
            .map_err(|_| Error::Parse(format!("not a decimal number: {text:?}")))?
    };
    let den = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = BigRational::new(num, den);
    Ok(if neg { -r } else { r })
}

/// Rational number (decimal or `a/b`) as used for `β`.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    if let Some((a, b)) = t.split_once('/') {
        let a: BigInt = a
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {text:?}")))?;
        let b: BigInt = b
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {text:?}")))?;
        if b.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(BigRational::new(a, b));
    }
    parse_decimal(t)
}

/// Decimal rendering truncated toward zero at `digits` fractional digits.
pub fn format_decimal(r: &BigRational, digits: usize) -> String {
    let neg = r.is_negative();
    let a = r.abs();
    let scale = num_traits::pow(BigInt::from(10), digits);
    let n = (a.numer() * &scale) / a.denom();
    let s = n.to_string();
    let s = if s.len() <= digits {
        format!("{}{}", "0".repeat(digits + 1 - s.len()), s)
    } else {
        s
    };
    let (ip, fp) = s.split_at(s.len() - digits);
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{ip}")
    } else {
        format!("{sign}{ip}.{fp}")
    }
}

impl FromStr for IrrationalSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected quad:|cf:|dec: prefix in {s:?}")))?;
        match kind {
            "quad" => {
                let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
                if parts.len() != 3 {
                    return Err(Error::Parse(format!("quad needs p,d,q: {s:?}")));
                }
                let nums: Vec<BigInt> = parts
                    .iter()
                    .map(|p| p.parse::<BigInt>().map_err(|_| Error::Parse(format!("bad integer {p:?}"))))
                    .collect::<Result<_>>()?;
                Ok(IrrationalSpec::Quadratic(QuadSurd::new(
                    nums[0].clone(),
                    nums[1].clone(),
                    nums[2].clone(),
                )?))
            }
            "cf" => {
                let a: Vec<u64> = rest
                    .split(',')
                    .map(|p| {
                        p.trim()
                            .parse::<u64>()
                            .map_err(|_| Error::Parse(format!("bad partial quotient {p:?}")))
                    })
                    .collect::<Result<_>>()?;
                IrrationalSpec::partial_quotients(a)
            }
            "dec" => {
                let (digits, bits) = rest
                    .rsplit_once(':')
                    .ok_or_else(|| Error::Parse(format!("dec needs digits:bits: {s:?}")))?;
                let bits: u32 = bits
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad bit count in {s:?}")))?;
                IrrationalSpec::decimal(digits, bits)
            }
            other => Err(Error::Parse(format!("unknown number kind {other:?}"))),
        }
    }
}

impl fmt::Display for IrrationalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IrrationalSpec::Quadratic(s) => write!(f, "quad:{},{},{}", s.p(), s.d(), s.q()),
            IrrationalSpec::PartialQuotients(a) => {
                let parts: Vec<String> = a.iter().map(u64::to_string).collect();
                write!(f, "cf:{}", parts.join(","))
            }
            IrrationalSpec::Decimal { text, bits, .. } => write!(f, "dec:{text}:{bits}"),
        }
    }
}

impl IrrationalSpec {
    /// `self + n`, in the same representation class.
    pub fn add_integer(&self, n: i64) -> Result<IrrationalSpec> {
        match self {
            IrrationalSpec::Quadratic(s) => Ok(IrrationalSpec::Quadratic(QuadSurd::new(
                s.p() + s.q() * BigInt::from(n),
                s.d().clone(),
                s.q().clone(),
            )?)),
            IrrationalSpec::PartialQuotients(a) => {
                let a0 = a[0] as i128 + n as i128;
                let a0 = u64::try_from(a0)
                    .map_err(|_| Error::InvalidInput(format!("leading quotient {a0} out of range")))?;
                let mut v = a.clone();
                v[0] = a0;
                Ok(IrrationalSpec::PartialQuotients(v))
            }
            IrrationalSpec::Decimal { text, value, bits } => {
                let digits = text.split_once('.').map_or(0, |(_, f)| f.len());
                let value = value + BigRational::from_integer(BigInt::from(n));
                Ok(IrrationalSpec::Decimal {
                    text: format_decimal(&value, digits),
                    value,
                    bits: *bits,
                })
            }
        }
    }

    /// Integer part, certified.
    pub fn floor(&self) -> Result<i64> {
        match self {
            IrrationalSpec::Quadratic(s) => s
                .floor()
                .to_i64()
                .ok_or_else(|| Error::InvalidInput("value out of range".into())),
            _ => self
                .approx(self.certified_bits().unwrap_or(128).clamp(64, 512))
                .floor()?
                .to_i64()
                .ok_or_else(|| Error::InvalidInput("value out of range".into())),
        }
    }
}
