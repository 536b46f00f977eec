//! The measurement subcommands.

use std::io::Write;
use std::time::Instant;

use beatty_kfree::approx::{convergents_up_to, estimate_type, IrrationalSpec};
use beatty_kfree::arith::FixedReal;
use beatty_kfree::beatty::count_kfree_beatty_with;
use beatty_kfree::discrepancy::{build_pointset, extreme_discrepancy, DiscrepancyResult};
use beatty_kfree::expsum::{
    default_split, double_kfree_sum_hyperbola, double_kfree_sum_naive, min_sum_1, min_sum_2, theorem2_report,
    ThetaApprox,
};
use beatty_kfree::fit::{loglog_fit, LineFit};
use beatty_kfree::smoothing::{
    build_smoothed, default_delta, default_truncation, smoothed_beatty_count, smoothed_beatty_series,
};
use beatty_kfree::Error;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::table::{num, opt, wall, RunEcho, Table};
use crate::{CliError, Config, Outcome, SmoothingArgs, SweepArgs, SweepBound};

/// Largest convergent denominator used for the type estimate.
pub const TYPE_Q_MAX: u64 = 1_000_000;

/// Tolerance on `|hyperbola − naive|` in the sweep's agreement column.
pub const AGREEMENT_TOL: f64 = 1e-6;

/// Slack added to the predicted exponents before a fit fails.
pub const EXPONENT_SLACK: f64 = 0.1;
pub const DECAY_SLACK: f64 = 0.15;

pub fn tau_hat(alpha: &IrrationalSpec) -> Result<f64, CliError> {
    Ok(estimate_type(alpha, TYPE_Q_MAX)?.tau_hat)
}

/// `x^{k/(2k−1)+ε} + x^{1−1/(τ+1)+ε}`.
pub fn theorem1_bound(x: f64, k: u32, tau: f64, eps: f64) -> f64 {
    let kf = k as f64;
    x.powf(kf / (2.0 * kf - 1.0) + eps) + x.powf(1.0 - 1.0 / (tau + 1.0) + eps)
}

/// `max(k/(2k−1), 1 − 1/(τ+1))`.
pub fn predicted_exponent(k: u32, tau: f64) -> f64 {
    let kf = k as f64;
    (kf / (2.0 * kf - 1.0)).max(1.0 - 1.0 / (tau + 1.0))
}

struct CountRow {
    x: u64,
    count: u64,
    main_term: f64,
    error: f64,
    bound: f64,
    secs: f64,
}

fn count_rows(cfg: &Config, tau: f64) -> Result<Vec<CountRow>, CliError> {
    let p = cfg.params()?;
    let sieve = cfg.sieve();
    cfg.grid_points()
        .into_iter()
        .map(|x| {
            let start = Instant::now();
            let c = count_kfree_beatty_with(&p, x, cfg.k, &sieve)?;
            Ok(CountRow {
                x,
                count: c.count,
                main_term: c.main_term,
                error: c.error,
                bound: theorem1_bound(x as f64, cfg.k, tau, cfg.eps),
                secs: start.elapsed().as_secs_f64(),
            })
        })
        .collect()
}

const COUNT_COLUMNS: &[&str] = &["x", "count", "main_term", "error", "bound", "ratio", "wall_time_s"];

fn count_fields(cfg: &Config, r: &CountRow) -> Vec<String> {
    vec![
        r.x.to_string(),
        r.count.to_string(),
        num(r.main_term),
        num(r.error),
        num(r.bound),
        num(r.error.abs() / r.bound),
        wall(cfg, r.secs),
    ]
}

pub fn count(cfg: &Config, sink: &mut dyn Write) -> Result<Outcome, CliError> {
    let tau = tau_hat(&cfg.alpha_spec()?)?;
    let rows = count_rows(cfg, tau)?;
    let mut t = Table::new(sink, RunEcho::new("count", cfg, Some(tau)), COUNT_COLUMNS)?;
    for r in &rows {
        t.row(&count_fields(cfg, r))?;
    }
    t.finish()?;
    Ok(Outcome::Pass)
}

/// Slope of `log |error|` against `log x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentFit {
    pub fit: LineFit,
    pub zero_errors: usize,
    /// At least half the errors were zero; the fit used the rest.
    pub degenerate: bool,
}

pub fn fit_error_exponent(points: &[(f64, f64)]) -> Result<ExponentFit, Error> {
    let (fit, zero_errors) = loglog_fit(points)?;
    Ok(ExponentFit {
        fit,
        zero_errors,
        degenerate: 2 * zero_errors >= points.len(),
    })
}

pub fn fit_exponent(cfg: &Config, sink: &mut dyn Write) -> Result<Outcome, CliError> {
    let n = cfg.grid_points().len();
    if n < 4 {
        return Err(CliError::Usage(format!("fit-exponent needs at least 4 grid points, got {n}")));
    }
    let tau = tau_hat(&cfg.alpha_spec()?)?;
    let rows = count_rows(cfg, tau)?;
    let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.x as f64, r.error)).collect();
    let fit = fit_error_exponent(&pairs)?;
    let threshold = predicted_exponent(cfg.k, tau) + EXPONENT_SLACK;
    let pass = fit.fit.slope <= threshold && !fit.degenerate;
    let mut columns = COUNT_COLUMNS.to_vec();
    columns.extend(["slope", "intercept", "threshold", "degenerate", "verdict"]);
    let mut t = Table::new(sink, RunEcho::new("fit-exponent", cfg, Some(tau)), &columns)?;
    for r in &rows {
        let mut f = count_fields(cfg, r);
        f.extend([
            num(fit.fit.slope),
            num(fit.fit.intercept),
            num(threshold),
            fit.degenerate.to_string(),
            verdict(pass).to_string(),
        ]);
        t.row(&f)?;
    }
    t.finish()?;
    Ok(if fit.degenerate {
        Outcome::Fail(format!("degenerate fit: {} of {n} errors are zero", fit.zero_errors))
    } else if pass {
        Outcome::Pass
    } else {
        Outcome::Fail(format!("error exponent {} exceeds {threshold}", fit.fit.slope))
    })
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: u64, hi: u64) -> u64 {
    if hi <= lo {
        return hi;
    }
    let e = rng.random_range((lo as f64).ln()..=(hi as f64).ln());
    (e.exp().round() as u64).clamp(lo, hi)
}

fn coprime_numerator(rng: &mut ChaCha8Rng, q: u64) -> i64 {
    loop {
        let a = rng.random_range(0..q);
        if a.gcd(&q) == 1 {
            return a as i64;
        }
    }
}

fn rational(n: i64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Clone, Copy, Debug)]
enum ThetaKind {
    Random { raw: u64, k_bound: u64 },
    Convergent { index: usize },
    Rational { a: i64, q: u64 },
}

impl ThetaKind {
    fn label(&self) -> &'static str {
        match self {
            ThetaKind::Random { .. } => "random",
            ThetaKind::Convergent { .. } => "convergent",
            ThetaKind::Rational { .. } => "rational",
        }
    }
}

struct Trial {
    kind: ThetaKind,
    h: u64,
    x: u64,
}

pub fn expsum_sweep(cfg: &Config, args: &SweepArgs, sink: &mut dyn Write) -> Result<Outcome, CliError> {
    match args.bound {
        SweepBound::Theorem2 => theorem2_sweep(cfg, args, sink),
        SweepBound::MinSum => min_sum_sweep(cfg, args, sink),
    }
}

fn theorem2_sweep(cfg: &Config, args: &SweepArgs, sink: &mut dyn Write) -> Result<Outcome, CliError> {
    let x_max = args.x_max.unwrap_or(100_000).max(1);
    let h_max = args.h_max.unwrap_or(30).max(1);
    let alpha = cfg.alpha_spec()?;
    let tau = tau_hat(&alpha)?;
    let conv = convergents_up_to(&alpha, x_max)?;
    let alpha_bits = 192;
    let alpha_fixed = alpha.approx(alpha_bits);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let trials: Vec<Trial> = (0..args.trials)
        .map(|i| {
            let x = log_uniform(&mut rng, 1000.min(x_max), x_max);
            let h = rng.random_range(1..=h_max);
            let kind = if i % 10 == 9 {
                let q = rng.random_range(1..=50);
                ThetaKind::Rational { a: coprime_numerator(&mut rng, q), q }
            } else if i % 2 == 0 {
                ThetaKind::Random {
                    raw: rng.random(),
                    k_bound: log_uniform(&mut rng, 2, x.max(2)),
                }
            } else {
                let usable = conv.iter().filter(|c| c.q_u64() <= x).count().max(1);
                ThetaKind::Convergent {
                    index: rng.random_range(0..usable),
                }
            };
            Trial { kind, h, x }
        })
        .collect();

    let results: Vec<Vec<String>> = trials
        .par_iter()
        .enumerate()
        .map(|(i, tr)| -> Result<Vec<String>, CliError> {
            let start = Instant::now();
            let t = match tr.kind {
                ThetaKind::Random { raw, k_bound } => {
                    let theta = FixedReal::from_ratio(&BigInt::from(raw), &(BigInt::from(1) << 64), 128);
                    ThetaApprox::dirichlet(theta, k_bound)?
                }
                ThetaKind::Convergent { index } => {
                    let c = &conv[index];
                    let a = c.a.to_i64().ok_or_else(|| CliError::Usage("convergent numerator out of range".into()))?;
                    ThetaApprox::new(alpha_fixed.clone(), a, c.q_u64())?
                }
                ThetaKind::Rational { a, q } => ThetaApprox::new(FixedReal::from_rational(&rational(a, q), 128), a, q)?,
            };
            let y = default_split(tr.x, cfg.k);
            let split = double_kfree_sum_hyperbola(&t.theta, tr.h, tr.x, cfg.k, y)?;
            let naive = double_kfree_sum_naive(&t.theta, tr.h, tr.x, cfg.k)?.value();
            let (sr, si) = split.total();
            let agreement = (sr - naive.0).hypot(si - naive.1);
            let r = theorem2_report(split.abs(), t.q, tr.h, tr.x, cfg.k, cfg.eps);
            Ok(vec![
                i.to_string(),
                tr.kind.label().to_string(),
                num(t.theta.to_f64()),
                t.a.to_string(),
                t.q.to_string(),
                tr.h.to_string(),
                tr.x.to_string(),
                num(y),
                num(r.lhs),
                num(naive.0.hypot(naive.1)),
                num(agreement),
                num(r.rhs_value),
                num(r.ratio),
                wall(cfg, start.elapsed().as_secs_f64()),
            ])
        })
        .collect::<Result<_, _>>()?;

    // Columns 10 and 12 hold the agreement and the ratio.
    let agreement_max = results.iter().map(|r| r[10].parse::<f64>().unwrap_or(f64::NAN)).fold(0.0, f64::max);
    let ratios: Vec<f64> = results.iter().map(|r| r[12].parse::<f64>().unwrap_or(f64::NAN)).collect();
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let columns = [
        "trial", "theta_kind", "theta", "a", "q", "h", "x", "y", "lhs", "naive_lhs", "agreement", "rhs", "ratio",
        "wall_time_s", "max_ratio",
    ];
    let mut table = Table::new(sink, RunEcho::new("expsum-sweep", cfg, Some(tau)), &columns)?;
    for mut r in results {
        r.push(num(max_ratio));
        table.row(&r)?;
    }
    table.finish()?;
    Ok(if ratios.iter().any(|r| !r.is_finite()) {
        Outcome::Fail("non-finite bound ratio".into())
    } else if !(agreement_max <= AGREEMENT_TOL) {
        Outcome::Fail(format!("hyperbola and naive sums differ by {agreement_max}"))
    } else {
        Outcome::Pass
    })
}

/// θ = a/q + η with `gcd(a, q) = 1` and `|η| <= 1/q²` on a 2^-40 grid.
fn min_sum_setup(rng: &mut ChaCha8Rng) -> (BigRational, i64, u64) {
    let q = rng.random_range(1..=2000u64);
    let a = coprime_numerator(rng, q);
    let span = ((1u128 << 40) / (q as u128 * q as u128)) as i64;
    let eta = rng.random_range(-span..=span);
    let theta = rational(a, q) + BigRational::new(BigInt::from(eta), BigInt::from(1u64 << 40));
    (theta, a, q)
}

fn min_sum_sweep(cfg: &Config, args: &SweepArgs, sink: &mut dyn Write) -> Result<Outcome, CliError> {
    let m_max = args.h_max.unwrap_or(100_000).max(1);
    let x_max = args.x_max.unwrap_or(1_000_000).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let setups: Vec<(BigRational, i64, u64, u64, u64)> = (0..args.trials)
        .map(|_| {
            let (theta, a, q) = min_sum_setup(&mut rng);
            let m = rng.random_range(1..=m_max);
            let x = rng.random_range(1..=x_max);
            (theta, a, q, m, x)
        })
        .collect();
    let results: Vec<[Vec<String>; 2]> = setups
        .par_iter()
        .enumerate()
        .map(|(i, (theta, a, q, m, x))| -> Result<[Vec<String>; 2], CliError> {
            let t = ThetaApprox::new(FixedReal::from_rational(theta, 160), *a, *q)?;
            let row = |name: &str, f: fn(&ThetaApprox, u64, u64) -> beatty_kfree::Result<_>| -> Result<Vec<String>, CliError> {
                let start = Instant::now();
                let r: beatty_kfree::expsum::BoundReport = f(&t, *m, *x)?;
                Ok(vec![
                    i.to_string(),
                    name.to_string(),
                    num(t.theta.to_f64()),
                    a.to_string(),
                    q.to_string(),
                    m.to_string(),
                    x.to_string(),
                    num(r.lhs),
                    num(r.rhs_value),
                    num(r.ratio),
                    wall(cfg, start.elapsed().as_secs_f64()),
                ])
            };
            Ok([row("min_sum_1", min_sum_1)?, row("min_sum_2", min_sum_2)?])
        })
        .collect::<Result<_, _>>()?;
    let ratios: Vec<f64> = results.iter().flatten().map(|r| r[9].parse::<f64>().unwrap_or(f64::NAN)).collect();
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let columns = ["trial", "sum", "theta", "a", "q", "m", "x", "lhs", "rhs", "ratio", "wall_time_s", "max_ratio"];
    let mut table = Table::new(sink, RunEcho::new("min-sum-sweep", cfg, None), &columns)?;
    for mut r in results.into_iter().flatten() {
        r.push(num(max_ratio));
        table.row(&r)?;
    }
    table.finish()?;
    Ok(if ratios.iter().all(|r| r.is_finite()) {
        Outcome::Pass
    } else {
        Outcome::Fail("non-finite bound ratio".into())
    })
}

pub fn discrepancy_rows(cfg: &Config) -> Result<Vec<DiscrepancyResult>, CliError> {
    let grid = cfg.grid_points();
    let Some(&m_top) = grid.iter().max() else {
        return Ok(Vec::new());
    };
    // The point set and its sorted copy.
    let needed = m_top.saturating_mul(16);
    if needed > cfg.memory_budget {
        return Err(CliError::Budget(Error::MemoryBudgetExceeded {
            needed,
            budget: cfg.memory_budget,
        }));
    }
    let beta = beatty_kfree::approx::parse_rational(&cfg.beta)?;
    let all = build_pointset(&cfg.alpha_spec()?, &beta, m_top, cfg.precision())?;
    grid.par_iter()
        .map(|&m| Ok(extreme_discrepancy(&all.prefix(m as usize)?)))
        .collect()
}

pub fn discrepancy(cfg: &Config, sink: &mut dyn Write) -> Result<Outcome, CliError> {
    let tau = tau_hat(&cfg.alpha_spec()?)?;
    let rows = discrepancy_rows(cfg)?;
    let threshold = -1.0 / tau + DECAY_SLACK;
    let fit = if rows.len() >= 2 {
        let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.m as f64, r.extreme)).collect();
        Some(loglog_fit(&pairs)?.0)
    } else {
        None
    };
    let pass = fit.is_none_or(|f| f.slope <= threshold);
    let columns = [
        "m", "extreme", "star", "extreme_num", "star_num", "witness_c", "witness_d", "c_inclusive", "d_inclusive",
        "exponent", "threshold", "verdict",
    ];
    let mut t = Table::new(sink, RunEcho::new("discrepancy", cfg, Some(tau)), &columns)?;
    for r in &rows {
        t.row(&[
            r.m.to_string(),
            num(r.extreme),
            num(r.star),
            r.extreme_num.to_string(),
            r.star_num.to_string(),
            num(r.witness.c),
            num(r.witness.d),
            r.witness.c_inclusive.to_string(),
            r.witness.d_inclusive.to_string(),
            opt(fit.map(|f| f.slope)),
            num(threshold),
            if fit.is_some() { verdict(pass) } else { "" }.to_string(),
        ])?;
    }
    t.finish()?;
    Ok(match fit {
        Some(f) if !pass => Outcome::Fail(format!("decay exponent {} exceeds {threshold}", f.slope)),
        _ => Outcome::Pass,
    })
}

pub fn smoothing_check(cfg: &Config, args: &SmoothingArgs, sink: &mut dyn Write) -> Result<Outcome, CliError> {
    if !(args.tail_tol > 0.0) {
        return Err(CliError::Usage("tail-tol must be positive".into()));
    }
    let p = cfg.params()?;
    let gamma = p.gamma(128);
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for x in cfg.grid_points() {
        let start = Instant::now();
        let delta = default_delta(x, cfg.k, cfg.delta_multiplier, gamma.to_f64());
        let j = default_truncation(delta, args.tail_tol);
        let s = build_smoothed(&gamma, delta, j)?;
        let c = smoothed_beatty_count(&p, cfg.k, x, &s)?;
        let mut ok = c.within_bound();
        let (series, series_gap) = if args.series {
            let v = smoothed_beatty_series(&p, cfg.k, x, &s)?;
            let gap = (v - c.smoothed).abs();
            let q = c.exact as f64 / gamma.to_f64().max(f64::MIN_POSITIVE);
            ok &= gap <= q.max(1.0) * s.tail_bound() + 1e-6;
            (Some(v), Some(gap))
        } else {
            (None, None)
        };
        if !ok {
            failures.push(x);
        }
        rows.push(vec![
            x.to_string(),
            c.m_max.to_string(),
            num(s.delta()),
            j.to_string(),
            num(s.tail_bound()),
            num(c.smoothed),
            c.exact.to_string(),
            c.exceptional.to_string(),
            num(c.gap()),
            c.within_bound().to_string(),
            opt(series),
            opt(series_gap),
            wall(cfg, start.elapsed().as_secs_f64()),
        ]);
    }
    let columns = [
        "x", "m_max", "delta", "j", "tail_bound", "smoothed", "exact", "exceptional", "gap", "within_bound", "series",
        "series_gap", "wall_time_s",
    ];
    let mut t = Table::new(sink, RunEcho::new("smoothing-check", cfg, None), &columns)?;
    for r in &rows {
        t.row(r)?;
    }
    t.finish()?;
    Ok(if failures.is_empty() {
        Outcome::Pass
    } else {
        Outcome::Fail(format!("smoothed count outside its bound at x = {failures:?}"))
    })
}
