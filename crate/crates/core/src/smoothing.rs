//! The trapezoidal smoothing `Ψ_Δ` of the step indicator of `(0, γ]` and
//! the smoothed Beatty counting pipeline.
//!
//! `Ψ_Δ` is the 1-periodic indicator of `(0, γ]` averaged over a window of
//! width `2Δ`: it is 1 on `[Δ, γ − Δ]`, 0 on `[γ + Δ, 1 − Δ]`, and linear on
//! the two ramps `[−Δ, Δ]` and `[γ − Δ, γ + Δ]`. Its Fourier coefficients
//! `c_j = ∫₀¹ Ψ_Δ(x) e(−jx) dx` are
//!
//! ```text
//! c_0 = γ,   c_j = e(−jγ/2) · sin(πjγ)/(πj) · sin(2πjΔ)/(2πjΔ),   c_{−j} = conj(c_j),
//! ```
//!
//! the first two factors being the transform of `1_{(0,γ]}` (centred at
//! `γ/2`) and the last that of the uniform kernel on `[−Δ, Δ]`. With
//! `g_j = c_j` and `h_j = c_{−j}`, `Ψ_Δ(x) = γ + Σ_j g_j e(jx) + h_j e(−jx)`.
//! Since `|sin(πjγ)/(πj)| <= 1/(πj)` and `|sin u/u| <= min(1, 1/|u|)`,
//! `|c_j| <= min(1/(π|j|), 1/(2π²j²Δ))`, and the tail beyond `J` is at most
//! `2 Σ_{j>J} 1/(2π²j²Δ) <= 1/(π²JΔ)`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::arith::{ComplexSum, FixedReal, Phase};
use crate::beatty::{AffineForm, BeattyParams};
use crate::error::{Error, Result};
use crate::kfree::sieve_kfree;

const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

/// Slack for floating rounding in the per-run smoothing check.
pub const SMOOTHING_SLACK: f64 = 1e-9;

/// `Ψ(x) = 1` for `0 < {x} <= γ`, else 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepIndicator {
    pub gamma: f64,
}

impl StepIndicator {
    pub fn eval(&self, x: f64) -> f64 {
        let f = x - x.floor();
        if f > 0.0 && f <= self.gamma {
            1.0
        } else {
            0.0
        }
    }
}

/// `Ψ_Δ` with its Fourier coefficients `c_0, …, c_J`.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothedIndicator {
    gamma: FixedReal,
    gamma_f: f64,
    delta: f64,
    coeffs: Vec<(f64, f64)>,
}

/// `Δ` rounded down to the 2^-64 grid, so that comparisons against grid
/// points are exact. A no-op for `Δ >= 2^-11`.
pub fn snap_delta(delta: f64) -> f64 {
    (delta * TWO_POW_64).floor() / TWO_POW_64
}

/// Largest admissible `Δ` for a given `γ`, just below `1/8`.
pub fn max_delta(gamma: f64) -> f64 {
    (0.125f64 * (1.0 - 1e-9)).min(gamma.min(1.0 - gamma) / 2.0)
}

/// `Δ = multiplier · x^{−(k−1)/(2k−1)}`, clamped to the admissible range.
pub fn default_delta(x: u64, k: u32, multiplier: f64, gamma: f64) -> f64 {
    let raw = multiplier * (x as f64).powf(-((k - 1) as f64) / (2 * k - 1) as f64);
    snap_delta(raw.min(max_delta(gamma)))
}

/// Smallest `J` with series tail bound `1/(π²JΔ) <= tol`.
pub fn default_truncation(delta: f64, tol: f64) -> usize {
    (1.0 / (PI * PI * delta * tol)).ceil() as usize
}

/// The truncation point `x^{(4k−4)/(2k−1)+ε}` of the analytic argument.
pub fn analytic_truncation(x: u64, k: u32, eps: f64) -> usize {
    (x as f64).powf((4 * k - 4) as f64 / (2 * k - 1) as f64 + eps).ceil() as usize
}

/// `Σ_{|j|>J} |c_j| <= 1/(π²JΔ)`.
pub fn tail_bound(delta: f64, j_max: usize) -> f64 {
    if j_max == 0 {
        f64::INFINITY
    } else {
        1.0 / (PI * PI * j_max as f64 * delta)
    }
}

/// `min(1/(π|j|), 1/(2π²j²Δ))`.
pub fn coeff_bound(j: u64, delta: f64) -> f64 {
    let j = j as f64;
    (1.0 / (PI * j)).min(1.0 / (2.0 * PI * PI * j * j * delta))
}

/// `c_j` for `j >= 1` in closed form.
pub fn coefficient(gamma: f64, delta: f64, j: u64) -> (f64, f64) {
    let jf = j as f64;
    let box_part = (PI * jf * gamma).sin() / (PI * jf);
    let u = 2.0 * PI * jf * delta;
    let kernel = u.sin() / u;
    let (c, s) = Phase::from_f64(-jf * gamma / 2.0).unit_exp();
    let r = box_part * kernel;
    (r * c, r * s)
}

pub fn build_smoothed(gamma: &FixedReal, delta: f64, j_max: usize) -> Result<SmoothedIndicator> {
    let g = gamma.to_f64();
    if !(g > 0.0 && g < 1.0) {
        return Err(Error::InvalidInput(format!("gamma = {g} must lie in (0, 1)")));
    }
    if !(delta > 0.0 && delta < 0.125) {
        return Err(Error::InvalidDelta(format!("Δ = {delta} must satisfy 0 < Δ < 1/8")));
    }
    if delta > g.min(1.0 - g) / 2.0 {
        return Err(Error::InvalidDelta(format!(
            "Δ = {delta} exceeds min(γ, 1 − γ)/2 = {}",
            g.min(1.0 - g) / 2.0
        )));
    }
    let mut coeffs = Vec::with_capacity(j_max + 1);
    coeffs.push((g, 0.0));
    coeffs.extend((1..=j_max as u64).map(|j| coefficient(g, delta, j)));
    Ok(SmoothedIndicator {
        gamma: gamma.clone(),
        gamma_f: g,
        delta,
        coeffs,
    })
}

impl SmoothedIndicator {
    pub fn gamma(&self) -> &FixedReal {
        &self.gamma
    }

    pub fn gamma_f64(&self) -> f64 {
        self.gamma_f
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `c_j` for `|j| <= J`.
    pub fn coeff(&self, j: i64) -> (f64, f64) {
        let (r, i) = self.coeffs[j.unsigned_abs() as usize];
        if j < 0 {
            (r, -i)
        } else {
            (r, i)
        }
    }

    pub fn coeffs(&self) -> &[(f64, f64)] {
        &self.coeffs
    }

    pub fn step(&self) -> StepIndicator {
        StepIndicator { gamma: self.gamma_f }
    }

    pub fn tail_bound(&self) -> f64 {
        tail_bound(self.delta, self.truncation())
    }
}

/// `Ψ_Δ(x)` exactly (piecewise linear).
pub fn eval_smoothed(s: &SmoothedIndicator, x: f64) -> f64 {
    eval_smoothed_frac(s, x - x.floor())
}

fn eval_smoothed_frac(s: &SmoothedIndicator, f: f64) -> f64 {
    let (g, d) = (s.gamma_f, s.delta);
    let w = 2.0 * d;
    if f < d {
        (f + d) / w
    } else if f <= g - d {
        1.0
    } else if f < g + d {
        (g + d - f) / w
    } else if f <= 1.0 - d {
        0.0
    } else {
        (f - (1.0 - d)) / w
    }
}

/// `γ + 2 Re Σ_{j=1}^{J} c_j e(jx)`.
pub fn eval_truncated_series(s: &SmoothedIndicator, x: f64) -> f64 {
    let p = Phase::from_f64(x);
    let mut acc = ComplexSum::new();
    acc.add(s.gamma_f, 0.0);
    for (j, &(cr, ci)) in s.coeffs.iter().enumerate().skip(1) {
        let (er, ei) = p.mul(j as u64).unit_exp();
        acc.add(2.0 * (cr * er - ci * ei), 0.0);
    }
    acc.value().0
}

/// Classification of `{γm + δ}` against `I = [0,Δ) ∪ (γ−Δ,γ+Δ) ∪ (1−Δ,1)`.
fn in_exceptional_set(p: &BeattyParams, m: i64, d_grid: i128) -> Result<bool> {
    if d_grid == 0 {
        return Ok(false);
    }
    let u = p.grid_point(AffineForm::Upper, m)?;
    let v = u.frac() as i128;
    let one = 1i128 << 64;
    // v·2^64 lies in [v, v+1), and equals v when the point is exact.
    if v < d_grid {
        return Ok(true);
    }
    if (u.exact && v > one - d_grid) || (!u.exact && v >= one - d_grid) {
        return Ok(true);
    }
    // {γm + δ} − γ = γ(m − β) − ⌊γm + δ⌋.
    let l = p.grid_point(AffineForm::Lower, m)?;
    let w = l.raw - ((u.floor() as i128) << 64);
    let above = if l.exact { w > -d_grid } else { w >= -d_grid };
    Ok(above && w < d_grid)
}

fn delta_grid(delta: f64) -> Result<i128> {
    let scaled = delta * TWO_POW_64;
    if scaled.fract() != 0.0 || !(0.0..TWO_POW_64).contains(&scaled) {
        return Err(Error::InvalidDelta(format!(
            "Δ = {delta} is not on the 2^-64 grid; use snap_delta"
        )));
    }
    Ok(scaled as i128)
}

const CHUNK: i64 = 1 << 14;

/// `V(I, M) = #{1 <= m <= M : {γm + δ} ∈ I}` with `I` as above. `Δ = 0`
/// gives the empty set.
pub fn exceptional_count(p: &BeattyParams, m_max: i64, delta: f64) -> Result<u64> {
    let d_grid = delta_grid(delta)?;
    if m_max < 1 || d_grid == 0 {
        return Ok(0);
    }
    let chunks: Vec<i64> = (0..(m_max + CHUNK - 1) / CHUNK).map(|i| 1 + i * CHUNK).collect();
    let counts = chunks
        .into_par_iter()
        .map(|a| {
            let b = (a + CHUNK - 1).min(m_max);
            let mut c = 0u64;
            for m in a..=b {
                c += in_exceptional_set(p, m, d_grid)? as u64;
            }
            Ok(c)
        })
        .collect::<Result<Vec<u64>>>()?;
    Ok(counts.iter().sum())
}

/// Smoothed and exact k-free Beatty counts over `m <= M = ⌊αx + β⌋`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothedCount {
    pub m_max: i64,
    /// `Σ_{m <= M, m ∈ Q_k} Ψ_Δ(γm + δ)`.
    pub smoothed: f64,
    /// `Σ_{m <= M, m ∈ Q_k} Ψ(γm + δ)`.
    pub exact: u64,
    /// `V(I, M)`.
    pub exceptional: u64,
}

impl SmoothedCount {
    pub fn gap(&self) -> f64 {
        (self.smoothed - self.exact as f64).abs()
    }

    /// `|smoothed − exact| <= V(I, M)`, up to floating slack.
    pub fn within_bound(&self) -> bool {
        self.gap() <= self.exceptional as f64 + SMOOTHING_SLACK
    }
}

fn kfree_members(m_max: i64, k: u32) -> Result<Vec<i64>> {
    if m_max < 1 {
        return Ok(Vec::new());
    }
    Ok(sieve_kfree(k, 1, m_max as u64)?.members().map(|m| m as i64).collect())
}

/// Runs the pipeline for `(p, k, x)` with the smoothing `s`, whose `γ` must
/// be that of `p`.
pub fn smoothed_beatty_count(p: &BeattyParams, k: u32, x: u64, s: &SmoothedIndicator) -> Result<SmoothedCount> {
    let m_max = if x == 0 { 0 } else { p.term(x as i64)? };
    let members = kfree_members(m_max, k)?;
    let parts = members
        .par_chunks(CHUNK as usize)
        .map(|ms| {
            let mut smoothed = ComplexSum::new();
            let mut exact = 0u64;
            for &m in ms {
                let v = p.grid_point(AffineForm::Upper, m)?.frac() as f64 / TWO_POW_64;
                smoothed.add(eval_smoothed_frac(s, v), 0.0);
                exact += p.step_value(m)? as u64;
            }
            Ok((smoothed, exact))
        })
        .collect::<Result<Vec<_>>>()?;
    let smoothed = ComplexSum::merge_all(parts.iter().map(|(s, _)| s)).value().0;
    let exact = parts.iter().map(|(_, e)| e).sum();
    Ok(SmoothedCount {
        m_max,
        smoothed,
        exact,
        exceptional: exceptional_count(p, m_max, s.delta)?,
    })
}

/// The same smoothed count through the truncated Fourier expansion,
/// `γ Q + 2 Re Σ_{j<=J} c_j e(jδ) Σ_{m ∈ Q_k, m <= M} e(jγm)`. Differs from
/// the direct value by at most `Q · tail_bound`.
pub fn smoothed_beatty_series(p: &BeattyParams, k: u32, x: u64, s: &SmoothedIndicator) -> Result<f64> {
    let m_max = if x == 0 { 0 } else { p.term(x as i64)? };
    let members = kfree_members(m_max, k)?;
    let gamma = p.gamma(128).to_phase();
    let delta = p.delta(128).to_phase();
    let terms: Vec<f64> = (1..=s.truncation())
        .into_par_iter()
        .map(|j| {
            let gj = gamma.mul(j as u64);
            let mut sj = ComplexSum::new();
            for &m in &members {
                sj.add_scaled(1.0, gj.mul(m as u64).unit_exp());
            }
            let (sr, si) = sj.value();
            let (er, ei) = delta.mul(j as u64).unit_exp();
            let (cr, ci) = s.coeff(j as i64);
            // Re(c_j e(jδ) S_j)
            let (ar, ai) = (cr * er - ci * ei, cr * ei + ci * er);
            2.0 * (ar * sr - ai * si)
        })
        .collect();
    let mut acc = ComplexSum::new();
    acc.add(s.gamma_f * members.len() as f64, 0.0);
    for t in terms {
        acc.add(t, 0.0);
    }
    Ok(acc.value().0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beatty::BeattyParams;

    fn golden_gamma() -> FixedReal {
        BeattyParams::parse("quad:1,5,2", "0").unwrap().gamma(128)
    }

    #[test]
    fn shape() {
        let s = build_smoothed(&golden_gamma(), 1.0 / 32.0, 8).unwrap();
        let g = s.gamma_f64();
        assert_eq!(s.coeff(0), (g, 0.0));
        assert_eq!(eval_smoothed(&s, g / 2.0), 1.0);
        assert_eq!(eval_smoothed(&s, (g + 1.0) / 2.0), 0.0);
        assert!((eval_smoothed(&s, g) - 0.5).abs() < 1e-15);
        assert!((eval_smoothed(&s, 3.0) - 0.5).abs() < 1e-15);
        assert_eq!(s.coeff(-3), (s.coeff(3).0, -s.coeff(3).1));
    }

    #[test]
    fn zero_truncation_is_constant() {
        let s = build_smoothed(&golden_gamma(), 0.01, 0).unwrap();
        assert_eq!(eval_truncated_series(&s, 0.3), s.gamma_f64());
    }

    #[test]
    fn delta_preconditions() {
        let g = golden_gamma();
        assert!(matches!(build_smoothed(&g, 0.0, 4), Err(Error::InvalidDelta(_))));
        assert!(matches!(build_smoothed(&g, 0.125, 4), Err(Error::InvalidDelta(_))));
        let small = FixedReal::from_rational(&num_rational::BigRational::new(1.into(), 10.into()), 64);
        assert!(matches!(build_smoothed(&small, 0.06, 4), Err(Error::InvalidDelta(_))));
    }

    #[test]
    fn doubling_truncation_halves_tail() {
        assert!((tail_bound(0.01, 200) * 2.0 - tail_bound(0.01, 100)).abs() < 1e-15);
        assert!(tail_bound(1.0 / 32.0, default_truncation(1.0 / 32.0, 0.01)) <= 0.01);
    }

    #[test]
    fn zero_width_has_no_exceptions() {
        let p = BeattyParams::parse("quad:1,5,2", "0").unwrap();
        assert_eq!(exceptional_count(&p, 10_000, 0.0).unwrap(), 0);
    }
}
