//! Continued fractions, convergents, Dirichlet approximation and empirical
//! irrationality type.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::spec::IrrationalSpec;
use crate::arith::{FixedReal, QuadSurd};
use crate::error::{Error, Result};

/// Lazy stream of partial quotients.
enum Expander {
    /// Surd state `(P + √D)/Q` with `Q | D - P²`.
    Surd { p: BigInt, d: BigInt, q: BigInt, sqrt_d: BigInt },
    Prefix { quotients: Vec<u64>, next: usize },
    /// Both ends of a rational enclosure, expanded in lockstep.
    Interval { lo: Option<BigRational>, hi: Option<BigRational> },
}

impl Expander {
    fn new(alpha: &IrrationalSpec) -> Self {
        match alpha {
            IrrationalSpec::Quadratic(s) => Expander::from_surd(s),
            IrrationalSpec::PartialQuotients(a) => Expander::Prefix {
                quotients: a.clone(),
                next: 0,
            },
            IrrationalSpec::Decimal { .. } => {
                let bits = alpha.certified_bits().unwrap_or(256);
                let enc = alpha.approx(bits.saturating_add(8));
                Expander::from_enclosure(&enc)
            }
        }
    }

    fn from_surd(s: &QuadSurd) -> Self {
        let (p, d, q) = (s.p().clone(), s.d().clone(), s.q().clone());
        let (p, d, q) = if (&d - &p * &p).is_multiple_of(&q) {
            (p, d, q)
        } else {
            let aq = q.abs();
            (&p * &aq, &d * &q * &q, &q * &aq)
        };
        let sqrt_d = d.sqrt();
        Expander::Surd { p, d, q, sqrt_d }
    }

    fn from_enclosure(x: &FixedReal) -> Self {
        Expander::Interval {
            lo: Some(x.lower_rational()),
            hi: Some(x.upper_rational()),
        }
    }

    fn next_quotient(&mut self) -> Result<Option<BigInt>> {
        match self {
            Expander::Surd { p, d, q, sqrt_d } => {
                // floor((P + √D)/Q) via floor of (P + isqrt(D)) (Q > 0) or
                // (P + isqrt(D) + 1) (Q < 0); √D is irrational.
                let a = if q.is_positive() {
                    (&*p + &*sqrt_d).div_floor(q)
                } else {
                    (&*p + &*sqrt_d + BigInt::one()).div_floor(q)
                };
                let p_next = &a * &*q - &*p;
                let q_next = (&*d - &p_next * &p_next) / &*q;
                *p = p_next;
                *q = q_next;
                Ok(Some(a))
            }
            Expander::Prefix { quotients, next } => {
                let r = quotients.get(*next).map(|&a| BigInt::from(a));
                *next += 1;
                match r {
                    Some(a) => Ok(Some(a)),
                    None => Err(Error::PrecisionExhausted(format!(
                        "continued-fraction prefix has only {} quotients",
                        quotients.len()
                    ))),
                }
            }
            Expander::Interval { lo, hi } => {
                let (Some(l), Some(h)) = (lo.as_ref(), hi.as_ref()) else {
                    return Err(Error::PrecisionExhausted(
                        "enclosure too wide to certify further quotients".into(),
                    ));
                };
                let (al, ah) = (l.floor().to_integer(), h.floor().to_integer());
                if al != ah {
                    return Err(Error::PrecisionExhausted(
                        "enclosure too wide to certify further quotients".into(),
                    ));
                }
                let rl = l - BigRational::from(al.clone());
                let rh = h - BigRational::from(ah);
                // Inversion reverses the order of the endpoints.
                *lo = (!rh.is_zero()).then(|| rh.recip());
                *hi = (!rl.is_zero()).then(|| rl.recip());
                Ok(Some(al))
            }
        }
    }
}

/// First `count` partial quotients of `alpha`.
pub fn cf_expand(alpha: &IrrationalSpec, count: usize) -> Result<Vec<BigInt>> {
    if count == 0 {
        return Err(Error::InvalidInput("count must be at least 1".into()));
    }
    let mut ex = Expander::new(alpha);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        match ex.next_quotient()? {
            Some(a) => out.push(a),
            None => break,
        }
    }
    Ok(out)
}

/// Partial quotients of an exact rational (terminating Euclid expansion).
pub fn cf_of_rational(r: &BigRational) -> Vec<BigInt> {
    let (mut n, mut d) = (r.numer().clone(), r.denom().clone());
    let mut out = vec![];
    while !d.is_zero() {
        let (a, rem) = n.div_mod_floor(&d);
        out.push(a);
        n = d;
        d = rem;
    }
    out
}

/// A convergent `a/q` of a continued fraction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Convergent {
    pub a: BigInt,
    pub q: BigInt,
    pub index: usize,
}

impl Convergent {
    pub fn q_u64(&self) -> u64 {
        self.q.to_u64().unwrap_or(u64::MAX)
    }

    pub fn as_rational(&self) -> BigRational {
        BigRational::new(self.a.clone(), self.q.clone())
    }
}

/// Convergents from partial quotients via `p_i = a_i p_{i-1} + p_{i-2}`.
pub fn convergents_of(quotients: &[BigInt]) -> Vec<Convergent> {
    let (mut p0, mut q0) = (BigInt::zero(), BigInt::one());
    let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
    quotients
        .iter()
        .enumerate()
        .map(|(index, a)| {
            let p2 = a * &p1 + &p0;
            let q2 = a * &q1 + &q0;
            (p0, q0, p1, q1) = (p1.clone(), q1.clone(), p2.clone(), q2.clone());
            Convergent { a: p2, q: q2, index }
        })
        .collect()
}

pub fn convergents(alpha: &IrrationalSpec, count: usize) -> Result<Vec<Convergent>> {
    Ok(convergents_of(&cf_expand(alpha, count)?))
}

/// Convergents of `alpha` while the denominator stays at or below `q_max`,
/// plus the first one beyond it when the input can certify it.
pub fn convergents_up_to(alpha: &IrrationalSpec, q_max: u64) -> Result<Vec<Convergent>> {
    let mut ex = Expander::new(alpha);
    let bound = BigInt::from(q_max);
    let mut quotients = vec![];
    let mut out: Vec<Convergent> = vec![];
    loop {
        match ex.next_quotient() {
            Ok(Some(a)) => quotients.push(a),
            Ok(None) => break,
            Err(_) if out.len() >= 2 => break,
            Err(e) => return Err(e),
        }
        out = convergents_of(&quotients);
        if out.last().is_some_and(|c| c.q > bound) {
            break;
        }
    }
    Ok(out)
}

fn abs_diff_upper(theta: &FixedReal, r: &BigRational) -> BigRational {
    let lo = theta.lower_rational() - r;
    let hi = theta.upper_rational() - r;
    lo.abs().max(hi.abs())
}

/// `a/q` with `gcd(a, q) = 1`, `1 <= q <= K` and `|θ - a/q| <= 1/(qK)`.
///
/// Candidates are the convergents and last intermediate fractions of both
/// ends of θ's enclosure; the one with the smallest certified error is
/// returned.
pub fn dirichlet_approx(theta: &FixedReal, k_bound: u64) -> Result<(BigInt, BigInt)> {
    if k_bound < 2 {
        return Err(Error::InvalidInput(format!("K must be at least 2, got {k_bound}")));
    }
    let need = 2 * (64 - (k_bound - 1).leading_zeros()) + 32;
    if theta.scale_bits() < need {
        return Err(Error::PrecisionExhausted(format!(
            "θ carries {} bits, K = {k_bound} needs {need}",
            theta.scale_bits()
        )));
    }
    let kb = BigInt::from(k_bound);
    let mut candidates: Vec<(BigInt, BigInt)> = vec![];
    for end in [theta.lower_rational(), theta.upper_rational()] {
        let conv = convergents_of(&cf_of_rational(&end));
        let mut prev: Option<&Convergent> = None;
        for c in &conv {
            if c.q > kb {
                // Intermediate fractions (t p_n + p_{n-1})/(t q_n + q_{n-1}).
                if let (Some(pn), Some(pm)) = (prev, conv.get(c.index.wrapping_sub(2))) {
                    let t = (&kb - &pm.q) / &pn.q;
                    if t.is_positive() {
                        candidates.push((&t * &pn.a + &pm.a, &t * &pn.q + &pm.q));
                    }
                }
                break;
            }
            candidates.push((c.a.clone(), c.q.clone()));
            prev = Some(c);
        }
    }
    let mut best: Option<(BigRational, BigInt, BigInt)> = None;
    for (a, q) in candidates {
        if !q.is_positive() || q > kb || !a.gcd(&q).is_one() {
            continue;
        }
        let err = abs_diff_upper(theta, &BigRational::new(a.clone(), q.clone()));
        if err > BigRational::new(BigInt::one(), &q * &kb) {
            continue;
        }
        let better = match &best {
            None => true,
            Some((e, _, bq)) => err < *e || (err == *e && q < *bq),
        };
        if better {
            best = Some((err, a, q));
        }
    }
    best.map(|(_, a, q)| (a, q)).ok_or_else(|| {
        Error::PrecisionExhausted(format!(
            "no certified approximation with q <= {k_bound} at {} bits",
            theta.scale_bits()
        ))
    })
}

/// Empirical irrationality type from convergent denominator growth.
#[derive(Clone, Debug, PartialEq)]
pub struct TypeEstimate {
    pub tau_hat: f64,
    /// `(q_i, q_{i+1}, log q_{i+1} / log q_i)` for every consecutive pair
    /// with `1 < q_i` and `q_{i+1} <= q_max`.
    pub samples: Vec<(u64, u64, f64)>,
    /// Largest denominator examined.
    pub q_max: u64,
}

/// Fraction of `log q_max` a pair must start at to enter the tail window.
pub const TYPE_TAIL_EXPONENT: f64 = 0.75;

/// `tau_hat` is the largest ratio `log q_{i+1}/log q_i` over the tail
/// pairs with `q_i >= q_max^0.75`; early pairs carry an `O(1/log q)` bias
/// that would otherwise dominate the maximum. If the tail is empty the last
/// pair is used.
pub fn estimate_type(alpha: &IrrationalSpec, q_max: u64) -> Result<TypeEstimate> {
    if q_max < 10 {
        return Err(Error::InvalidInput(format!("q_max must be at least 10, got {q_max}")));
    }
    let conv = convergents_up_to(alpha, q_max)?;
    let qs: Vec<u64> = conv
        .iter()
        .map(Convergent::q_u64)
        .filter(|&q| q <= q_max)
        .collect();
    let samples: Vec<(u64, u64, f64)> = qs
        .windows(2)
        .filter(|w| w[0] > 1 && w[1] > w[0])
        .map(|w| (w[0], w[1], (w[1] as f64).ln() / (w[0] as f64).ln()))
        .collect();
    let Some(last) = samples.last() else {
        return Err(Error::PrecisionExhausted(
            "too few convergents to estimate the type".into(),
        ));
    };
    let threshold = (q_max as f64).powf(TYPE_TAIL_EXPONENT);
    let tail_max = samples
        .iter()
        .filter(|s| s.0 as f64 >= threshold)
        .map(|s| s.2)
        .fold(f64::NAN, f64::max);
    let tau_hat = if tail_max.is_nan() { last.2 } else { tail_max };
    Ok(TypeEstimate {
        tau_hat: tau_hat.max(1.0),
        samples,
        q_max: qs.last().copied().unwrap_or(1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::spec::format_decimal;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn expansions() {
        let s2 = IrrationalSpec::sqrt(2).unwrap();
        assert_eq!(cf_expand(&s2, 5).unwrap(), ints(&[1, 2, 2, 2, 2]));
        let phi = IrrationalSpec::golden_ratio();
        assert_eq!(cf_expand(&phi, 6).unwrap(), ints(&[1; 6]));
        let s3 = IrrationalSpec::sqrt(3).unwrap();
        assert_eq!(cf_expand(&s3, 6).unwrap(), ints(&[1, 1, 2, 1, 2, 1]));
        assert!(cf_expand(&s3, 0).is_err());
    }

    #[test]
    fn negated_root_expansion() {
        // (-1 + √5)/(-2) = -1/φ = [-1; 2, 1, 1, ...]
        let x = IrrationalSpec::Quadratic(QuadSurd::new(-1, 5, -2).unwrap());
        assert_eq!(cf_expand(&x, 5).unwrap(), ints(&[-1, 2, 1, 1, 1]));
    }

    #[test]
    fn expansion_of_surd_matches_decimal_oracle() {
        // 200-digit decimal of (7+√2)/3 from an integer square root.
        let scale = num_traits::pow(BigInt::from(10), 200);
        let root = (BigInt::from(2) * &scale * &scale).sqrt();
        let value = BigRational::new(BigInt::from(7) * &scale + root, BigInt::from(3) * &scale);
        let text = format_decimal(&value, 200);
        let dec = IrrationalSpec::decimal(&text, 600).unwrap();
        let surd = IrrationalSpec::quadratic(7, 2, 3).unwrap();
        assert_eq!(cf_expand(&surd, 4).unwrap(), cf_expand(&dec, 4).unwrap());
        assert_eq!(cf_expand(&surd, 40).unwrap(), cf_expand(&dec, 40).unwrap());
    }

    #[test]
    fn decimal_runs_out() {
        let dec: IrrationalSpec = "dec:1.4142:12".parse().unwrap();
        assert!(matches!(cf_expand(&dec, 30), Err(Error::PrecisionExhausted(_))));
        let prefix = IrrationalSpec::partial_quotients(vec![1, 2, 2]).unwrap();
        assert!(matches!(cf_expand(&prefix, 4), Err(Error::PrecisionExhausted(_))));
    }

    #[test]
    fn convergent_values() {
        let phi = IrrationalSpec::golden_ratio();
        let c: Vec<(i64, i64)> = convergents(&phi, 5)
            .unwrap()
            .iter()
            .map(|c| (c.a.to_i64().unwrap(), c.q.to_i64().unwrap()))
            .collect();
        assert_eq!(c, vec![(1, 1), (2, 1), (3, 2), (5, 3), (8, 5)]);
        let s2 = IrrationalSpec::sqrt(2).unwrap();
        let c: Vec<(i64, i64)> = convergents(&s2, 4)
            .unwrap()
            .iter()
            .map(|c| (c.a.to_i64().unwrap(), c.q.to_i64().unwrap()))
            .collect();
        assert_eq!(c, vec![(1, 1), (3, 2), (7, 5), (17, 12)]);
    }

    #[test]
    fn rational_cf() {
        let r = BigRational::new(BigInt::from(415), BigInt::from(93));
        assert_eq!(cf_of_rational(&r), ints(&[4, 2, 6, 7]));
    }

    #[test]
    fn dirichlet_small_cases() {
        let phi = IrrationalSpec::golden_ratio().approx(128);
        let (a, q) = dirichlet_approx(&phi, 10).unwrap();
        assert_eq!((a, q), (BigInt::from(13), BigInt::from(8)));
        let third = FixedReal::from_rational(&BigRational::new(1.into(), 3.into()), 128);
        let (a, q) = dirichlet_approx(&third, 100).unwrap();
        assert_eq!((a, q), (BigInt::from(1), BigInt::from(3)));
        assert!(dirichlet_approx(&phi, 1).is_err());
        let coarse = IrrationalSpec::golden_ratio().approx(40);
        assert!(matches!(
            dirichlet_approx(&coarse, 1 << 20),
            Err(Error::PrecisionExhausted(_))
        ));
    }

    #[test]
    fn type_of_golden_and_prefix_agree() {
        let phi = estimate_type(&IrrationalSpec::golden_ratio(), 1_000_000).unwrap();
        let ones = estimate_type(&IrrationalSpec::partial_quotients(vec![1; 60]).unwrap(), 1_000_000).unwrap();
        assert_eq!(phi, ones);
        assert!((phi.tau_hat - 1.0).abs() <= 0.05, "{}", phi.tau_hat);
        assert!(estimate_type(&IrrationalSpec::golden_ratio(), 5).is_err());
    }
}
