//! Extreme and star discrepancy of `{αm + β}`, `m = 1..M`.
//!
//! Points are kept on the 2^-64 grid as `⌊{αm + β}·2^64⌋`, certified by the
//! Beatty evaluator, and every discrepancy is computed exactly as an integer
//! numerator over `M·2^64`.
//!
//! Intervals are open, `(c, d)` with `0 <= c < d <= 1`, and do not wrap.
//! The supremum is approached with endpoints at sample points: an interval
//! holding too many points shrinks onto `[x_i, x_j]` (endpoints just outside
//! the points), one holding too few expands to `(a_i, a_j)` with `a` ranging
//! over the points and the ends `0` and `1`. A point at `0` is never inside
//! an open interval.

use num_rational::BigRational;
use rayon::prelude::*;

use crate::approx::IrrationalSpec;
use crate::arith::Precision;
use crate::beatty::{AffineForm, BeattyParams};
use crate::error::{Error, Result};
use crate::fit::{loglog_fit, LineFit};

const ONE: i128 = 1 << 64;
const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

/// Points of `[0, 1)` on the 2^-64 grid, with a sorted copy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    points: Vec<u64>,
    sorted: Vec<u64>,
}

impl PointSet {
    /// Fails on an empty set or repeated values.
    pub fn from_grid(points: Vec<u64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("empty point set".into()));
        }
        let mut sorted = points.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("repeated point values".into()));
        }
        Ok(PointSet { points, sorted })
    }

    /// Points given as doubles in `[0, 1)`, rounded to the grid.
    pub fn from_f64(points: &[f64]) -> Result<Self> {
        if let Some(x) = points.iter().find(|x| !(0.0..1.0).contains(*x)) {
            return Err(Error::InvalidInput(format!("point {x} outside [0, 1)")));
        }
        Self::from_grid(points.iter().map(|&x| (x * TWO_POW_64) as u64).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[u64] {
        &self.points
    }

    pub fn sorted(&self) -> &[u64] {
        &self.sorted
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.points.iter().map(|&p| p as f64 / TWO_POW_64).collect()
    }

    /// The first `m` points.
    pub fn prefix(&self, m: usize) -> Result<PointSet> {
        PointSet::from_grid(self.points[..m].to_vec())
    }
}

/// `{αm + β}` for `m = 1..M`.
///
/// `α` may be any irrational; it is shifted by an integer into `(1, 2)` if
/// needed, which leaves the fractional parts unchanged.
pub fn build_pointset(alpha: &IrrationalSpec, beta: &BigRational, m: u64, precision: Precision) -> Result<PointSet> {
    if m == 0 {
        return Err(Error::InvalidInput("M must be at least 1".into()));
    }
    let alpha = if alpha.exceeds_one() {
        alpha.clone()
    } else {
        alpha.add_integer(1 - alpha.floor()?)?
    };
    let p = BeattyParams::with_options(alpha, beta.clone(), precision, true)?;
    build_pointset_from(&p, m)
}

/// `{αm + β}` for the `α`, `β` of `p`.
pub fn build_pointset_from(p: &BeattyParams, m: u64) -> Result<PointSet> {
    const CHUNK: u64 = 1 << 14;
    let starts: Vec<u64> = (0..m.div_ceil(CHUNK)).map(|i| 1 + i * CHUNK).collect();
    let parts = starts
        .into_par_iter()
        .map(|a| {
            (a..=(a + CHUNK - 1).min(m))
                .map(|t| Ok(p.grid_point(AffineForm::Term, t as i64)?.frac()))
                .collect::<Result<Vec<u64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    PointSet::from_grid(parts.concat())
}

/// An open interval `(c, d)` approached from the given sides: an endpoint
/// with `inclusive` set stands for the limit from outside the point, so the
/// point at that value is counted.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WitnessInterval {
    pub c: f64,
    pub d: f64,
    pub c_inclusive: bool,
    pub d_inclusive: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscrepancyResult {
    pub m: usize,
    /// `D(M)` as a numerator over `M·2^64`.
    pub extreme_num: i128,
    /// `D*(M)` as a numerator over `M·2^64`.
    pub star_num: i128,
    pub extreme: f64,
    pub star: f64,
    pub witness: WitnessInterval,
}

fn ratio(num: i128, m: usize) -> f64 {
    num as f64 / (m as f64 * TWO_POW_64)
}

/// The larger of the two one-sided suprema, with its witness.
fn extreme_parts(sorted: &[u64]) -> (i128, WitnessInterval) {
    let m = sorted.len() as i128;
    let at = |v: i128| v as f64 / TWO_POW_64;
    // Too many points: (j - i + 1)/M - (x_j - x_i) over positive points,
    // i.e. e_j - e_i + 1/M with e_i = i/M - x_i.
    let mut best = i128::MIN;
    let mut witness = WitnessInterval {
        c: 0.0,
        d: 1.0,
        c_inclusive: false,
        d_inclusive: false,
    };
    let mut min_e: Option<(i128, i128)> = None;
    for (idx, &x) in sorted.iter().enumerate() {
        if x == 0 {
            continue;
        }
        let e = (idx as i128 + 1) * ONE - x as i128 * m;
        if min_e.is_none_or(|(v, _)| e < v) {
            min_e = Some((e, x as i128));
        }
        let (emin, xi) = min_e.unwrap();
        let val = e - emin + ONE;
        if val > best {
            best = val;
            witness = WitnessInterval {
                c: at(xi),
                d: at(x as i128),
                c_inclusive: true,
                d_inclusive: true,
            };
        }
    }
    // Too few points: (a_j - a_i) - (j - i - 1)/M over the augmented list,
    // i.e. b_j - b_i + 1/M with b_i = a_i - i/M.
    let mut aug: Vec<i128> = Vec::with_capacity(sorted.len() + 2);
    if sorted[0] != 0 {
        aug.push(0);
    }
    aug.extend(sorted.iter().map(|&x| x as i128));
    aug.push(ONE);
    let mut min_b = (aug[0] * m, aug[0]);
    for (j, &a) in aug.iter().enumerate().skip(1) {
        let b = a * m - j as i128 * ONE;
        let val = b - min_b.0 + ONE;
        if val > best {
            best = val;
            witness = WitnessInterval {
                c: at(min_b.1),
                d: at(a),
                c_inclusive: false,
                d_inclusive: false,
            };
        }
        if b < min_b.0 {
            min_b = (b, a);
        }
    }
    (best, witness)
}

fn star_num(sorted: &[u64]) -> i128 {
    let m = sorted.len() as i128;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let xm = x as i128 * m;
            let i = i as i128;
            ((i + 1) * ONE - xm).max(xm - i * ONE)
        })
        .max()
        .unwrap()
}

/// `D(M) = sup_{(c,d)} |#{x ∈ (c,d)}/M − (d − c)|` in `O(M log M)`.
pub fn extreme_discrepancy(ps: &PointSet) -> DiscrepancyResult {
    let (num, witness) = extreme_parts(&ps.sorted);
    let star = star_num(&ps.sorted);
    let m = ps.len();
    DiscrepancyResult {
        m,
        extreme_num: num,
        star_num: star,
        extreme: ratio(num, m),
        star: ratio(star, m),
        witness,
    }
}

/// `D*(M) = max_i max(i/M − x_(i), x_(i) − (i−1)/M)`.
pub fn star_discrepancy(ps: &PointSet) -> f64 {
    ratio(star_num(&ps.sorted), ps.len())
}

/// Reference `D(M)` by enumerating every pair of candidate endpoints with
/// both side choices, counting points incrementally. `O(M²)`; returns the
/// numerator over `M·2^64`.
pub fn extreme_discrepancy_oracle(ps: &PointSet) -> i128 {
    let m = ps.len() as i128;
    // Keys (value, side): side −1 is just below the value, +1 just above.
    // Events at equal keys put interval ends before points, so a right end
    // exactly at a point excludes it.
    #[derive(Clone, Copy)]
    enum Ev {
        End,
        Point,
    }
    let mut events: Vec<((i128, i8, u8), Ev)> = vec![((ONE, 0, 0), Ev::End)];
    let mut starts: Vec<(i128, i8)> = vec![(0, 0)];
    for &x in &ps.sorted {
        let x = x as i128;
        events.push(((x, 0, 0), Ev::End));
        events.push(((x, 1, 0), Ev::End));
        events.push(((x, 0, 1), Ev::Point));
        starts.push((x, 0));
        if x > 0 {
            starts.push((x, -1));
        }
    }
    events.sort_by_key(|e| e.0);
    let mut best = 0i128;
    for &(cv, cs) in &starts {
        let first = events.partition_point(|e| (e.0 .0, e.0 .1) <= (cv, cs));
        let mut count = 0i128;
        for &((dv, _, _), ev) in &events[first..] {
            match ev {
                Ev::Point => count += 1,
                Ev::End => {
                    let val = (count * ONE - (dv - cv) * m).abs();
                    best = best.max(val);
                }
            }
        }
    }
    best
}

/// Discrepancy decay over a grid of `M`, with the least-squares slope of
/// `log D(M)` against `log M`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayFit {
    pub fit: LineFit,
    pub per_m: Vec<DiscrepancyResult>,
}

impl DecayFit {
    pub fn exponent(&self) -> f64 {
        self.fit.slope
    }
}

pub fn decay_fit(alpha: &IrrationalSpec, beta: &BigRational, m_grid: &[u64], precision: Precision) -> Result<DecayFit> {
    let m_top = *m_grid
        .iter()
        .max()
        .ok_or_else(|| Error::InvalidInput("empty M grid".into()))?;
    let all = build_pointset(alpha, beta, m_top, precision)?;
    let per_m = m_grid
        .iter()
        .map(|&m| Ok(extreme_discrepancy(&all.prefix(m as usize)?)))
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(f64, f64)> = per_m.iter().map(|r| (r.m as f64, r.extreme)).collect();
    let (fit, _) = loglog_fit(&pairs)?;
    Ok(DecayFit { fit, per_m })
}
