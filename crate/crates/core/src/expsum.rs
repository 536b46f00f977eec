//! Exponential sums over k-free integers.
//!
//! All sums read `θ` through its 64-bit phase ([`FixedReal::to_phase`]), so
//! `θ·h·n` is the same grid point whichever route computes it: the naive
//! double sum and the three hyperbola pieces see bit-identical arguments and
//! differ only by floating rounding in the final accumulation.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;

use crate::approx::dirichlet_approx;
use crate::arith::intmath::iroot;
use crate::arith::{geometric_sum, ComplexSum, FixedReal, Phase};
use crate::error::{Error, Result};
use crate::kfree::{sieve_kfree, sieve_moebius, MoebiusTable};

/// Work cap `H·x` for [`double_kfree_sum_naive`].
pub const NAIVE_WORK_LIMIT: u64 = 10_000_000_000;

/// Default `ε` in `x^ε` factors.
pub const DEFAULT_EPS: f64 = 0.05;

/// `θ` with a rational approximation `a/q`, `gcd(a, q) = 1`, `|θ − a/q| <= 1/q²`.
#[derive(Clone, Debug)]
pub struct ThetaApprox {
    pub theta: FixedReal,
    pub a: i64,
    pub q: u64,
}

impl ThetaApprox {
    /// Checks coprimality and certifies `|θ − a/q| <= 1/q²` on the enclosure.
    pub fn new(theta: FixedReal, a: i64, q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidInput("q must be positive".into()));
        }
        if a.unsigned_abs().gcd(&q) != 1 {
            return Err(Error::InvalidInput(format!("{a}/{q} is not in lowest terms")));
        }
        let aq = BigRational::new(BigInt::from(a), BigInt::from(q));
        let bound = BigRational::new(1.into(), BigInt::from(q) * BigInt::from(q));
        let far = (theta.lower_rational() - &aq)
            .abs()
            .max((theta.upper_rational() - &aq).abs());
        if far > bound {
            return Err(Error::InvalidInput(format!(
                "|theta - {a}/{q}| is not certified to be <= 1/q^2"
            )));
        }
        Ok(ThetaApprox { theta, a, q })
    }

    /// Approximation with `q <= k_bound` from the continued fraction of `θ`.
    pub fn dirichlet(theta: FixedReal, k_bound: u64) -> Result<Self> {
        let (a, q) = dirichlet_approx(&theta, k_bound)?;
        let a = a
            .to_i64()
            .ok_or_else(|| Error::InvalidInput("numerator out of range".into()))?;
        let q = q
            .to_u64()
            .ok_or_else(|| Error::InvalidInput("denominator out of range".into()))?;
        ThetaApprox::new(theta, a, q)
    }

    pub fn phase(&self) -> Phase {
        self.theta.to_phase()
    }
}

/// The three sums of the hyperbola decomposition, with `A + B − C` equal to
/// the double sum over k-free `n <= x`.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperbolaSplit {
    pub y: f64,
    /// `⌊y⌋`: range of `m^k` in `A` and `C`.
    pub m_pow_max: u64,
    /// Range of `l` in `B` and `C`.
    pub l_max: u64,
    pub sum_a: ComplexSum,
    pub sum_b: ComplexSum,
    pub sum_c: ComplexSum,
}

impl HyperbolaSplit {
    pub fn total(&self) -> (f64, f64) {
        let (ar, ai) = self.sum_a.value();
        let (br, bi) = self.sum_b.value();
        let (cr, ci) = self.sum_c.value();
        ((ar - cr) + br, (ai - ci) + bi)
    }

    pub fn abs(&self) -> f64 {
        let (r, i) = self.total();
        r.hypot(i)
    }
}

/// Parameters a [`BoundReport`] was computed for; fields that do not apply
/// to a given bound are `None`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundParams {
    pub x: u64,
    pub h: Option<u64>,
    pub m: Option<u64>,
    pub k: Option<u32>,
    pub q: u64,
    pub eps: Option<f64>,
}

/// A measured quantity against a theoretical upper bound.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub lhs: f64,
    pub rhs_expression: &'static str,
    pub rhs_value: f64,
    pub ratio: f64,
    pub params: BoundParams,
}

impl BoundReport {
    fn new(lhs: f64, rhs_expression: &'static str, rhs_value: f64, params: BoundParams) -> Self {
        BoundReport {
            lhs,
            rhs_expression,
            rhs_value,
            ratio: lhs / rhs_value,
            params,
        }
    }
}

/// `Σ_{n=1}^{x} e(nα)` in closed form.
pub fn linear_exp_sum(alpha: &FixedReal, x: u64) -> ComplexSum {
    let (re, im) = geometric_sum(alpha.to_phase(), x);
    ComplexSum {
        re,
        im,
        terms: x,
        ..Default::default()
    }
}

/// `min(x, 1/(2‖α‖))`, the classical bound on [`linear_exp_sum`].
pub fn linear_exp_bound(alpha: Phase, x: u64) -> f64 {
    let d = alpha.dist_to_int();
    if d == 0.0 {
        x as f64
    } else {
        (x as f64).min(0.5 / d)
    }
}

fn check_hk(h: u64, k: u32) -> Result<()> {
    if h == 0 {
        return Err(Error::InvalidInput("H must be at least 1".into()));
    }
    if k < 2 {
        return Err(Error::InvalidInput(format!("k = {k}; k-freeness needs k >= 2")));
    }
    Ok(())
}

/// `Σ_{h<=H} Σ_{n<=x, n k-free} e(θhn)` term by term.
pub fn double_kfree_sum_naive(theta: &FixedReal, h_max: u64, x: u64, k: u32) -> Result<ComplexSum> {
    check_hk(h_max, k)?;
    if h_max.saturating_mul(x) > NAIVE_WORK_LIMIT {
        return Err(Error::BudgetExceeded(format!(
            "H*x = {} exceeds {NAIVE_WORK_LIMIT}",
            h_max as u128 * x as u128
        )));
    }
    if x == 0 {
        return Ok(ComplexSum::new());
    }
    let table = sieve_kfree(k, 1, x)?;
    let members: Vec<u64> = table.members().collect();
    let phi = theta.to_phase();
    let parts: Vec<ComplexSum> = (1..=h_max)
        .into_par_iter()
        .map(|h| {
            let step = phi.mul(h);
            let mut acc = ComplexSum::new();
            for &n in &members {
                let (c, s) = step.mul(n).unit_exp();
                acc.add(c, s);
            }
            acc
        })
        .collect();
    Ok(ComplexSum::merge_all(&parts))
}

/// Default split `y = x^{k/(2k−1)}`.
pub fn default_split(x: u64, k: u32) -> f64 {
    (x as f64).powf(k as f64 / (2 * k - 1) as f64)
}

/// Moebius values with their k-th powers, for `m^k <= limit`.
fn moebius_powers(limit: u64, k: u32) -> Result<Vec<(u64, i8)>> {
    let top = iroot(limit, k);
    if top == 0 {
        return Ok(Vec::new());
    }
    let mu: MoebiusTable = sieve_moebius(1, top)?;
    Ok(mu
        .iter()
        .filter(|&(_, v)| v != 0)
        .map(|(m, v)| (m.pow(k), v))
        .collect())
}

/// The double sum split at `y` by the Dirichlet hyperbola method, using
/// `1_{Q_k}(n) = Σ_{m^k l = n} μ(m)`:
///
/// * `A = Σ_h Σ_{m^k <= y} μ(m) Σ_{l <= x/m^k} e(θhm^k l)`
/// * `B = Σ_h Σ_{l <= x/y} Σ_{m^k <= x/l} μ(m) e(θhm^k l)`
/// * `C = Σ_h Σ_{m^k <= y} μ(m) Σ_{l <= x/y} e(θhm^k l)`
///
/// The inner `l`-sums of `A` and `C` are geometric and taken in closed form.
pub fn double_kfree_sum_hyperbola(theta: &FixedReal, h_max: u64, x: u64, k: u32, y: f64) -> Result<HyperbolaSplit> {
    check_hk(h_max, k)?;
    if x == 0 {
        return Err(Error::InvalidInput("x must be at least 1".into()));
    }
    if !(1.0..=x as f64).contains(&y) {
        return Err(Error::InvalidInput(format!("split y = {y} must lie in [1, {x}]")));
    }
    let m_pow_max = y.floor() as u64;
    // Pairs with m^k > ⌊y⌋ have l <= x/(⌊y⌋+1); including that bound keeps
    // the cover exact even if x/y rounds down across an integer.
    let l_max = ((x as f64 / y).floor() as u64).max(x / (m_pow_max + 1));
    let all = moebius_powers(x, k)?;
    let small: Vec<(u64, i8)> = all.iter().copied().filter(|&(mk, _)| mk <= m_pow_max).collect();
    let phi = theta.to_phase();
    let parts: Vec<[ComplexSum; 3]> = (1..=h_max)
        .into_par_iter()
        .map(|h| {
            let ph = phi.mul(h);
            let (mut a, mut b, mut c) = (ComplexSum::new(), ComplexSum::new(), ComplexSum::new());
            for &(mk, mu) in &small {
                let w = mu as f64;
                let step = ph.mul(mk);
                a.add_scaled(w, geometric_sum(step, x / mk));
                c.add_scaled(w, geometric_sum(step, l_max));
            }
            for l in 1..=l_max {
                let pl = ph.mul(l);
                let bound = x / l;
                for &(mk, mu) in all.iter().take_while(|&&(mk, _)| mk <= bound) {
                    b.add_scaled(mu as f64, pl.mul(mk).unit_exp());
                }
            }
            [a, b, c]
        })
        .collect();
    let pick = |i: usize| ComplexSum::merge_all(parts.iter().map(|p| &p[i]));
    Ok(HyperbolaSplit {
        y,
        m_pow_max,
        l_max,
        sum_a: pick(0),
        sum_b: pick(1),
        sum_c: pick(2),
    })
}

/// `|Σ_h Σ_{n ∈ Q_k} e(θhn)|` against `(H x^{k/(2k−1)} + q + Hx/q) x^ε`.
pub fn theorem2_bound_check(t: &ThetaApprox, h_max: u64, x: u64, k: u32, eps: f64) -> Result<BoundReport> {
    let split = double_kfree_sum_hyperbola(&t.theta, h_max, x, k, default_split(x, k))?;
    Ok(theorem2_report(split.abs(), t.q, h_max, x, k, eps))
}

/// The report for an already computed `lhs`.
pub fn theorem2_report(lhs: f64, q: u64, h_max: u64, x: u64, k: u32, eps: f64) -> BoundReport {
    let (xf, hf, qf) = (x as f64, h_max as f64, q as f64);
    let rhs = (hf * xf.powf(k as f64 / (2 * k - 1) as f64) + qf + hf * xf / qf) * xf.powf(eps);
    BoundReport::new(
        lhs,
        "(H*x^(k/(2k-1)) + q + H*x/q) * x^eps",
        rhs,
        BoundParams {
            x,
            h: Some(h_max),
            k: Some(k),
            q,
            eps: Some(eps),
            ..Default::default()
        },
    )
}

fn check_mx(m: u64, x: u64) -> Result<()> {
    if m == 0 || x == 0 {
        return Err(Error::InvalidInput("M and x must be at least 1".into()));
    }
    Ok(())
}

/// `Σ_{n<=M} min(x/n, 1/(2‖nθ‖))` against `(M + q + x/q) log 2qx`.
pub fn min_sum_1(t: &ThetaApprox, m: u64, x: u64) -> Result<BoundReport> {
    check_mx(m, x)?;
    let phi = t.phase();
    let xf = x as f64;
    let mut acc = ComplexSum::new();
    for n in 1..=m {
        let d = phi.mul(n).dist_to_int();
        let cap = xf / n as f64;
        acc.add(if d == 0.0 { cap } else { cap.min(0.5 / d) }, 0.0);
    }
    let qf = t.q as f64;
    let rhs = (m as f64 + qf + xf / qf) * (2.0 * qf * xf).ln();
    Ok(BoundReport::new(
        acc.value().0,
        "(M + q + x/q) * log(2qx)",
        rhs,
        BoundParams {
            x,
            m: Some(m),
            q: t.q,
            ..Default::default()
        },
    ))
}

/// `Σ_{n<=M} min(x, 1/(2‖nθ‖))` against `(M + x + Mx/q + q) log 2qx`.
pub fn min_sum_2(t: &ThetaApprox, m: u64, x: u64) -> Result<BoundReport> {
    check_mx(m, x)?;
    let phi = t.phase();
    let xf = x as f64;
    let mut acc = ComplexSum::new();
    for n in 1..=m {
        let d = phi.mul(n).dist_to_int();
        acc.add(if d == 0.0 { xf } else { xf.min(0.5 / d) }, 0.0);
    }
    let (mf, qf) = (m as f64, t.q as f64);
    let rhs = (mf + xf + mf * xf / qf + qf) * (2.0 * qf * xf).ln();
    Ok(BoundReport::new(
        acc.value().0,
        "(M + x + M*x/q + q) * log(2qx)",
        rhs,
        BoundParams {
            x,
            m: Some(m),
            q: t.q,
            ..Default::default()
        },
    ))
}

/// `Σ_{m^k <= X} μ(m) e(θ m^k)`.
pub fn mobius_exp_sum(theta: &FixedReal, x_max: u64, k: u32) -> Result<ComplexSum> {
    if k < 1 {
        return Err(Error::InvalidInput("k must be positive".into()));
    }
    let phi = theta.to_phase();
    let mut acc = ComplexSum::new();
    for (mk, mu) in moebius_powers(x_max, k)? {
        acc.add_scaled(mu as f64, phi.mul(mk).unit_exp());
    }
    Ok(acc)
}
