//! Beatty sequences `⌊αn + β⌋`: terms, membership and k-free counting.
//!
//! With `γ = 1/α` and `δ = γ(1 − β)`, an integer `m` is a term exactly when
//! the half-open window `[γ(m − β), γ(m + 1 − β)) = [γm + δ − γ, γm + δ)`
//! contains a positive integer `n`, and that `n` is the index of the term.
//! Every floor that decides a term or a membership goes through a cascade:
//!
//! 1. a 64-bit fixed-point enclosure in `i128` (certified, guarded by 2^32 ulp),
//! 2. exact surd arithmetic when `α` is a quadratic irrational,
//! 3. [`FixedReal`] evaluation with precision doubling up to the cap.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::approx::{parse_rational, IrrationalSpec};
use crate::arith::fixed::GUARD_BITS;
use crate::arith::{AffineSurd, FixedReal, Precision};
use crate::error::{Error, Result};
use crate::kfree::{count_kfree, KFreeCount, KFreeSieve, SieveConfig};

/// The three affine functions of the index that Beatty decisions use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AffineForm {
    /// `αt + β`.
    Term,
    /// `γ(t + 1 − β) = γt + δ`.
    Upper,
    /// `γ(t − β) = γt + δ − γ`.
    Lower,
}

/// `⌊v·2^64⌋` for a real `v`; `exact` is set when `v` itself equals
/// `raw / 2^64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridPoint {
    pub raw: i128,
    pub exact: bool,
}

impl GridPoint {
    /// `⌊v⌋`.
    pub fn floor(self) -> i64 {
        (self.raw >> 64) as i64
    }

    /// `{v}` on the 2^-64 grid (rounded down).
    pub fn frac(self) -> u64 {
        self.raw as u64
    }
}

/// Which real number multiplies `t` in an [`Affine`] form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slope {
    Alpha,
    Gamma,
}

/// `t ↦ s·(t + c) + b` with `s ∈ {α, γ}` and rational `c`, `b`.
#[derive(Clone, Debug)]
struct Affine {
    slope: Slope,
    c: BigRational,
    b: BigRational,
    /// 64-bit enclosures `[lo, hi]` of `s` and of `s·c + b`.
    fast: Option<([i128; 2], [i128; 2])>,
    exact: Option<AffineSurd>,
}

/// `(α, β)` together with the derived `γ = α⁻¹` and `δ = α⁻¹(1 − β)`.
#[derive(Clone, Debug)]
pub struct BeattyParams {
    alpha: IrrationalSpec,
    gamma_spec: IrrationalSpec,
    beta: BigRational,
    precision: Precision,
    use_surds: bool,
    term: Affine,
    upper: Affine,
    lower: Affine,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn to_i64(v: BigInt) -> Result<i64> {
    v.to_i64()
        .ok_or_else(|| Error::InvalidInput(format!("value {v} does not fit in 64 bits")))
}

impl BeattyParams {
    pub fn new(alpha: IrrationalSpec, beta: BigRational) -> Result<Self> {
        Self::with_options(alpha, beta, Precision::default(), true)
    }

    /// Parse `alpha` in the `quad:`/`cf:`/`dec:` text form and `beta` as a
    /// fraction `a/b` or a decimal.
    pub fn parse(alpha: &str, beta: &str) -> Result<Self> {
        Self::new(alpha.parse()?, parse_rational(beta)?)
    }

    /// `use_surds = false` forces the fixed-point path even for quadratic
    /// `α`, which is how the two paths are cross-checked.
    pub fn with_options(
        alpha: IrrationalSpec,
        beta: BigRational,
        precision: Precision,
        use_surds: bool,
    ) -> Result<Self> {
        if !alpha.exceeds_one() {
            return Err(Error::InvalidInput(format!("alpha = {alpha} must exceed 1")));
        }
        let gamma_spec = alpha.reciprocal()?;
        let one = BigRational::one();
        let zero = BigRational::zero();
        let mut p = BeattyParams {
            term: Affine::new(Slope::Alpha, zero.clone(), beta.clone()),
            upper: Affine::new(Slope::Gamma, &one - &beta, zero.clone()),
            lower: Affine::new(Slope::Gamma, -beta.clone(), zero),
            alpha,
            gamma_spec,
            beta,
            precision,
            use_surds,
        };
        p.prepare()?;
        Ok(p)
    }

    pub fn with_precision(self, precision: Precision) -> Result<Self> {
        Self::with_options(self.alpha, self.beta, precision, self.use_surds)
    }

    fn prepare(&mut self) -> Result<()> {
        let mut forms = [self.term.clone(), self.upper.clone(), self.lower.clone()];
        for f in &mut forms {
            f.fast = self.fast_enclosure(f);
            if self.use_surds {
                if let Some(s) = self.surd_of(f.slope) {
                    f.exact = Some(AffineSurd::from_affine(&s, &f.c, &f.b));
                }
            }
        }
        [self.term, self.upper, self.lower] = forms;
        Ok(())
    }

    fn surd_of(&self, slope: Slope) -> Option<crate::arith::QuadSurd> {
        match (slope, &self.alpha, &self.gamma_spec) {
            (Slope::Alpha, IrrationalSpec::Quadratic(s), _) => Some(s.clone()),
            (Slope::Gamma, _, IrrationalSpec::Quadratic(s)) => Some(s.clone()),
            _ => None,
        }
    }

    pub fn alpha(&self) -> &IrrationalSpec {
        &self.alpha
    }

    pub fn beta(&self) -> &BigRational {
        &self.beta
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision.initial_bits
    }

    /// Enclosure of `γ = 1/α` at `bits` fractional bits.
    pub fn gamma(&self, bits: u32) -> FixedReal {
        self.slope_approx(Slope::Gamma, bits)
    }

    /// Enclosure of `δ = γ(1 − β)` at `bits` fractional bits.
    pub fn delta(&self, bits: u32) -> FixedReal {
        let one_minus_beta = BigRational::one() - &self.beta;
        self.gamma(bits).mul(&FixedReal::from_rational(&one_minus_beta, bits))
    }

    pub fn gamma_f64(&self) -> f64 {
        self.gamma(96).to_f64()
    }

    pub fn delta_f64(&self) -> f64 {
        self.delta(96).to_f64()
    }

    fn slope_approx(&self, slope: Slope, bits: u32) -> FixedReal {
        match slope {
            Slope::Alpha => self.alpha.approx(bits),
            Slope::Gamma => match &self.gamma_spec {
                IrrationalSpec::Quadratic(s) => s.approx(bits),
                _ => self
                    .alpha
                    .approx(bits + 8)
                    .recip()
                    .map(|g| g.rescale(bits))
                    .unwrap_or_else(|_| FixedReal::from_bounds(BigInt::zero(), BigInt::one() << bits, bits)),
            },
        }
    }

    /// `s·(t + c) + b` at `bits`.
    fn eval_fixed(&self, f: &Affine, t: i64, bits: u32) -> FixedReal {
        let shift = rat(t) + &f.c;
        let b = FixedReal::from_rational(&f.b, bits);
        if shift.is_zero() {
            return b;
        }
        let s = self.slope_approx(f.slope, bits);
        let prod = if shift.is_integer() {
            s.mul_int(shift.numer())
        } else {
            s.mul(&FixedReal::from_rational(&shift, bits))
        };
        prod.add(&b)
    }

    fn fast_enclosure(&self, f: &Affine) -> Option<([i128; 2], [i128; 2])> {
        let s = self.slope_approx(f.slope, 128).rescale(64);
        let k = self.eval_fixed(f, 0, 128).rescale(64);
        Some((
            [s.lower().to_i128()?, s.upper().to_i128()?],
            [k.lower().to_i128()?, k.upper().to_i128()?],
        ))
    }

    fn floor_of(&self, f: &Affine, t: i64) -> Result<i64> {
        if let Some(v) = f.floor_fast(t) {
            return Ok(v);
        }
        if let Some(e) = &f.exact {
            return to_i64(e.floor_at(t));
        }
        let shift = rat(t) + &f.c;
        if shift.is_zero() {
            return to_i64(f.b.floor().to_integer());
        }
        let v = self
            .precision
            .escalate(|bits| Ok(self.eval_fixed(f, t, bits).try_floor()))?;
        to_i64(v)
    }

    fn form(&self, which: AffineForm) -> &Affine {
        match which {
            AffineForm::Term => &self.term,
            AffineForm::Upper => &self.upper,
            AffineForm::Lower => &self.lower,
        }
    }

    /// Certified `⌊v·2^64⌋` for `v` the value of `which` at `t`.
    pub fn grid_point(&self, which: AffineForm, t: i64) -> Result<GridPoint> {
        let f = self.form(which);
        let shift = rat(t) + &f.c;
        let scale = BigInt::one() << 64u32;
        let raw = if shift.is_zero() {
            let scaled = &f.b * BigRational::from_integer(scale);
            let exact = scaled.is_integer();
            (scaled.floor().to_integer(), exact)
        } else if let Some(e) = &f.exact {
            (e.floor_scaled_at(t, 64), false)
        } else {
            let start = Precision::new(self.precision.initial_bits.max(128), self.precision.cap_bits.max(128));
            let v = start.escalate(|bits| Ok(self.eval_fixed(f, t, bits).mul_pow2(64).try_floor()))?;
            (v, false)
        };
        let (v, exact) = raw;
        let raw = v
            .to_i128()
            .ok_or_else(|| Error::InvalidInput(format!("value at t = {t} is out of range")))?;
        Ok(GridPoint { raw, exact })
    }

    /// Whether `[γ(m − β), γ(m + 1 − β))` contains an integer, and the
    /// integer `⌈γ(m − β)⌉` that it would be. Both endpoints are irrational
    /// unless their rational factor vanishes, in which case the endpoint is
    /// exactly zero.
    fn window(&self, m: i64) -> Result<(bool, i64)> {
        let fu = self.floor_of(&self.upper, m)?;
        let fl = self.floor_of(&self.lower, m)?;
        let u_int = (rat(m) + &self.upper.c).is_zero();
        let l_int = (rat(m) + &self.lower.c).is_zero();
        let inside = fu - fl + l_int as i64 - u_int as i64;
        debug_assert!(inside == 0 || inside == 1);
        Ok((inside == 1, fl + (!l_int) as i64))
    }

    /// `Ψ(γm + δ)` for the step indicator `Ψ = 1` on `(0, γ]` mod 1; this
    /// is membership without the requirement that the index be positive.
    pub fn step_value(&self, m: i64) -> Result<bool> {
        Ok(self.window(m)?.0)
    }

    /// `⌊αn + β⌋`.
    pub fn term(&self, n: i64) -> Result<i64> {
        self.floor_of(&self.term, n)
    }

    /// Index `n >= 1` with `⌊αn + β⌋ = m`, if any.
    pub fn witness(&self, m: i64) -> Result<Option<i64>> {
        let (inside, n) = self.window(m)?;
        Ok((inside && n >= 1).then_some(n))
    }

    /// Whether `m` occurs in `{⌊αn + β⌋ : n >= 1}`.
    pub fn is_member(&self, m: i64) -> Result<bool> {
        Ok(self.witness(m)?.is_some())
    }
}

impl Affine {
    fn new(slope: Slope, c: BigRational, b: BigRational) -> Self {
        Affine {
            slope,
            c,
            b,
            fast: None,
            exact: None,
        }
    }

    /// Floor from the 64-bit enclosure, if it clears an integer by the guard.
    #[inline]
    fn floor_fast(&self, t: i64) -> Option<i64> {
        let ([s_lo, s_hi], [k_lo, k_hi]) = self.fast?;
        let t = t as i128;
        let (a, b) = if t >= 0 { (s_lo, s_hi) } else { (s_hi, s_lo) };
        let guard = 1i128 << GUARD_BITS;
        let lo = a.checked_mul(t)?.checked_add(k_lo)?.checked_sub(guard)?;
        let hi = b.checked_mul(t)?.checked_add(k_hi)?.checked_add(guard)?;
        let (fl, fh) = (lo >> 64, hi >> 64);
        if fl == fh {
            fl.to_i64()
        } else {
            None
        }
    }
}

impl AffineSurd {
    /// Exact `⌊value(t)·2^bits⌋`.
    fn floor_scaled_at(&self, t: i64, bits: u32) -> BigInt {
        let (x, y) = self.coeffs_at(t);
        crate::arith::surd::floor_surd(&(x << bits), &(y << bits), self.d(), self.z())
    }

    /// `s·(t + c) + b` for a surd `s = (p + √d)/q`.
    fn from_affine(s: &crate::arith::QuadSurd, c: &BigRational, b: &BigRational) -> AffineSurd {
        let (cn, cd) = (c.numer(), c.denom());
        let (bn, bd) = (b.numer(), b.denom());
        AffineSurd::new(
            s.p() * cn * bd + bn * cd * s.q(),
            s.p() * cd * bd,
            cn * bd,
            cd * bd,
            s.d().clone(),
            s.q() * cd * bd,
        )
    }
}

/// Default number of indices per parallel chunk in the counting loop.
const CHUNK_TERMS: u64 = 1 << 20;

/// `#{1 <= n <= x : ⌊αn + β⌋ is k-free}` against the main term `x/ζ(k)`.
pub fn count_kfree_beatty(p: &BeattyParams, x: u64, k: u32) -> Result<KFreeCount> {
    count_kfree_beatty_with(p, x, k, &SieveConfig::default())
}

/// Counting with an explicit sieve configuration. Indices are processed in
/// chunks; each chunk sieves the window of values its terms span and tests
/// them, and chunk counts are summed in index order.
pub fn count_kfree_beatty_with(p: &BeattyParams, x: u64, k: u32, cfg: &SieveConfig) -> Result<KFreeCount> {
    let main = |c| if x == 0 { KFreeCount::new(c, 0.0) } else { KFreeCount::new(c, x as f64 / crate::kfree::zeta(k)) };
    if k < 2 {
        return Err(Error::InvalidInput(format!("k = {k}; k-freeness needs k >= 2")));
    }
    if x == 0 {
        return Ok(main(0));
    }
    let x_i = i64::try_from(x).map_err(|_| Error::InvalidInput(format!("x = {x} too large")))?;
    let top = p.term(x_i)?;
    if top < 1 {
        return Ok(main(0));
    }
    let sieve = KFreeSieve::new(k, top as u64)?;
    let alpha = p.alpha.to_f64();
    let chunk = ((cfg.segment_len as f64 / alpha) as u64).clamp(1, CHUNK_TERMS);
    let window_bytes = ((chunk as f64 * alpha) as u64 + 2).div_ceil(8);
    let threads = rayon::current_num_threads() as u64;
    if window_bytes * threads > cfg.memory_budget {
        return Err(Error::MemoryBudgetExceeded {
            needed: window_bytes * threads,
            budget: cfg.memory_budget,
        });
    }
    let starts: Vec<u64> = (0..x.div_ceil(chunk)).map(|i| 1 + i * chunk).collect();
    let counts = starts
        .into_par_iter()
        .map(|a| {
            let b = (a + chunk - 1).min(x);
            let terms: Vec<i64> = (a..=b).map(|n| p.term(n as i64)).collect::<Result<_>>()?;
            let hi = *terms.last().unwrap();
            if hi < 1 {
                return Ok(0u64);
            }
            let lo = terms[0].max(1);
            let flags = sieve.window(lo as u64, hi as u64);
            Ok(terms
                .iter()
                .filter(|&&m| m >= 1 && flags[(m - lo) as usize])
                .count() as u64)
        })
        .collect::<Result<Vec<u64>>>()?;
    Ok(main(counts.iter().sum()))
}

/// Both sides of the Beatty/interval comparison: the k-free term count and
/// `α⁻¹ · Q_k(⌊αx + β⌋)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Theorem1Lhs {
    pub direct_count: u64,
    /// `⌊αx + β⌋`.
    pub m: i64,
    /// `Q_k(m)`.
    pub kfree_up_to_m: u64,
    pub scaled_count: f64,
}

impl Theorem1Lhs {
    pub fn difference(&self) -> f64 {
        self.direct_count as f64 - self.scaled_count
    }
}

pub fn theorem1_lhs(p: &BeattyParams, x: u64, k: u32) -> Result<Theorem1Lhs> {
    if x == 0 {
        return Ok(Theorem1Lhs {
            direct_count: 0,
            m: 0,
            kfree_up_to_m: 0,
            scaled_count: 0.0,
        });
    }
    let direct = count_kfree_beatty(p, x, k)?;
    let m = p.term(x as i64)?;
    let q = if m >= 1 { count_kfree(m as u64, k)?.count } else { 0 };
    Ok(Theorem1Lhs {
        direct_count: direct.count,
        m,
        kfree_up_to_m: q,
        scaled_count: p.gamma_f64() * q as f64,
    })
}
