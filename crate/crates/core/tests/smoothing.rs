use beatty_kfree::approx::IrrationalSpec;
use beatty_kfree::beatty::{count_kfree_beatty, BeattyParams};
use beatty_kfree::fit::ols;
use beatty_kfree::smoothing::{
    build_smoothed, coeff_bound, coefficient, default_delta, default_truncation, eval_smoothed,
    eval_truncated_series, exceptional_count, smoothed_beatty_count, smoothed_beatty_series, snap_delta,
    tail_bound, SmoothedIndicator,
};
use beatty_kfree::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| {
            let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    (p0, p1) = (p1, ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf);
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// `∫ f` over `[0, 1]`, split at `breaks` and into `panels` pieces each.
fn integrate(f: impl Fn(f64) -> f64, breaks: &[f64], panels: usize) -> f64 {
    let rule = gauss_legendre(10);
    let mut pts = vec![0.0];
    pts.extend(breaks.iter().copied().filter(|&b| b > 0.0 && b < 1.0));
    pts.push(1.0);
    let mut total = 0.0;
    for w in pts.windows(2) {
        let h = (w[1] - w[0]) / panels as f64;
        for p in 0..panels {
            let (a, b) = (w[0] + p as f64 * h, w[0] + (p + 1) as f64 * h);
            let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
            total += rule.iter().map(|&(x, wt)| wt * f(mid + half * x)).sum::<f64>() * half;
        }
    }
    total
}

fn fixed(n: i64, d: i64) -> beatty_kfree::arith::FixedReal {
    let r = num_rational::BigRational::new(n.into(), d.into());
    beatty_kfree::arith::FixedReal::from_rational(&r, 128)
}

fn golden_gamma() -> beatty_kfree::arith::FixedReal {
    IrrationalSpec::golden_ratio().reciprocal().unwrap().approx(128)
}

fn smoothed(delta: f64, j: usize) -> SmoothedIndicator {
    build_smoothed(&golden_gamma(), delta, j).unwrap()
}

fn breaks(s: &SmoothedIndicator) -> [f64; 4] {
    let (g, d) = (s.gamma_f64(), s.delta());
    [d, g - d, g + d, 1.0 - d]
}

#[test]
fn coefficients_match_quadrature() {
    let s = smoothed(1.0 / 32.0, 200);
    assert_eq!(s.coeff(0), (s.gamma_f64(), 0.0));
    let b = breaks(&s);
    for j in 1..=200i64 {
        let re = integrate(|x| eval_smoothed(&s, x) * (TAU * j as f64 * x).cos(), &b, 64);
        let im = integrate(|x| -eval_smoothed(&s, x) * (TAU * j as f64 * x).sin(), &b, 64);
        let (cr, ci) = s.coeff(j);
        assert!((cr - re).abs() <= 1e-10 && (ci - im).abs() <= 1e-10, "j = {j}");
        let (nr, ni) = s.coeff(-j);
        assert!((nr - re).abs() <= 1e-10 && (ni + im).abs() <= 1e-10, "j = -{j}");
    }
}

#[test]
fn coefficient_bound_holds() {
    let g = golden_gamma().to_f64();
    for j in 1..=100_000u64 {
        let (r, i) = coefficient(g, 1e-3, j);
        assert!(r.hypot(i) <= coeff_bound(j, 1e-3) * (1.0 + 1e-12), "j = {j}");
    }
}

#[test]
fn pointwise_examples() {
    let s = smoothed(1.0 / 64.0, 0);
    let g = s.gamma_f64();
    assert_eq!(eval_smoothed(&s, g / 2.0), 1.0);
    assert_eq!(eval_smoothed(&s, (g + 1.0) / 2.0), 0.0);
    assert!((eval_smoothed(&s, g) - 0.5).abs() < 1e-15);
    assert!((eval_smoothed(&s, 0.0) - 0.5).abs() < 1e-15);
    assert_eq!(eval_truncated_series(&s, 0.3), g);
    assert_eq!(eval_smoothed(&s, g / 2.0 + 7.0), 1.0);
}

#[test]
fn series_error_within_tail_bound() {
    let s = build_smoothed(&fixed(618, 1000), 1.0 / 32.0, 512).unwrap();
    let bound = 1.0 / (PI * PI * 512.0 / 32.0);
    assert!((s.tail_bound() - bound).abs() < 1e-15);
    let worst = (0..10_000)
        .map(|i| {
            let x = i as f64 / 10_000.0;
            (eval_truncated_series(&s, x) - eval_smoothed(&s, x)).abs()
        })
        .fold(0.0, f64::max);
    assert!(worst <= bound, "{worst} > {bound}");
    assert!((tail_bound(0.01, 2000) * 2.0 - tail_bound(0.01, 1000)).abs() < 1e-15);
    assert!(default_truncation(1.0 / 32.0, 0.01) as f64 >= 1.0 / (PI * PI * 0.01 / 32.0) - 1.0);
}

#[test]
fn range_and_agreement_region() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for delta in [1e-3, 1.0 / 32.0, 0.09] {
        let s = smoothed(snap_delta(delta), 0);
        let (g, d) = (s.gamma_f64(), s.delta());
        let step = s.step();
        for _ in 0..100_000 {
            let x: f64 = rng.random_range(-3.0..3.0);
            let v = eval_smoothed(&s, x);
            assert!((0.0..=1.0).contains(&v));
            let f = x - x.floor();
            if (d..=g - d).contains(&f) || (g + d..=1.0 - d).contains(&f) {
                assert_eq!(v, step.eval(x), "x = {x}");
            }
        }
    }
}

#[test]
fn parseval() {
    let s = smoothed(1.0 / 32.0, 4000);
    let (g, d) = (s.gamma_f64(), s.delta());
    let energy = integrate(|x| eval_smoothed(&s, x).powi(2), &breaks(&s), 16);
    assert!((energy - (g - 2.0 * d / 3.0)).abs() <= 1e-8);
    let partial: f64 = (-4000..=4000i64).map(|j| {
        let (r, i) = s.coeff(j);
        r * r + i * i
    }).sum();
    assert!(partial <= energy + 1e-12 && energy <= g);
    assert!(energy - partial < 1e-6);
}

#[test]
fn invalid_deltas_are_rejected() {
    let g = golden_gamma();
    assert!(matches!(build_smoothed(&g, 0.0, 10), Err(Error::InvalidDelta(_))));
    assert!(matches!(build_smoothed(&g, 0.2, 10), Err(Error::InvalidDelta(_))));
    // min(γ, 1−γ)/2 ≈ 0.191 for γ = 1/φ, but Δ < 1/8 still binds; take γ small.
    let small = fixed(1, 10);
    assert!(matches!(build_smoothed(&small, 0.06, 10), Err(Error::InvalidDelta(_))));
    let p = BeattyParams::parse("quad:1,5,2", "0").unwrap();
    assert!(exceptional_count(&p, 100, 1e-30).is_err());
    assert_eq!(exceptional_count(&p, 100_000, 0.0).unwrap(), 0);
}

#[test]
fn smoothed_count_within_exceptional_bound() {
    for (a, b) in [("quad:1,5,2", "0"), ("quad:0,2,1", "1/2"), ("quad:7,2,3", "-7/10")] {
        let p = BeattyParams::parse(a, b).unwrap();
        for (x, k) in [(1000u64, 2u32), (20_000, 2), (20_000, 3)] {
            let delta = default_delta(x, k, 1.0, p.gamma_f64());
            let s = build_smoothed(&p.gamma(128), delta, 64).unwrap();
            let c = smoothed_beatty_count(&p, k, x, &s).unwrap();
            assert!(c.within_bound(), "{a} {b} x={x} k={k}: gap {} V {}", c.gap(), c.exceptional);
            let series = smoothed_beatty_series(&p, k, x, &s).unwrap();
            let q = (c.exact as f64).max(1.0) / p.gamma_f64();
            assert!((series - c.smoothed).abs() <= q * s.tail_bound() + 1e-6);
        }
    }
}

#[test]
fn exact_side_matches_beatty_count() {
    let p = BeattyParams::parse("quad:1,5,2", "0").unwrap();
    let s = build_smoothed(&p.gamma(128), 1.0 / 64.0, 0).unwrap();
    for x in (1..=10_000u64).step_by(613).chain([10_000]) {
        for k in [2u32, 3] {
            let c = smoothed_beatty_count(&p, k, x, &s).unwrap();
            let direct = count_kfree_beatty(&p, x, k).unwrap().count;
            assert!((c.exact as i64 - direct as i64).abs() <= 1, "x={x} k={k}");
        }
    }
}

#[test]
fn exceptional_count_grows_linearly_in_delta() {
    let p = BeattyParams::parse("quad:0,2,1", "0").unwrap();
    let m = 100_000i64;
    let pts: Vec<(f64, f64)> = (1..=10)
        .map(|i| {
            let d = snap_delta(0.01 * i as f64);
            (d, exceptional_count(&p, m, d).unwrap() as f64)
        })
        .collect();
    let fit = ols(&pts).unwrap();
    let expected = 4.0 * m as f64;
    assert!(fit.slope >= expected / 3.0 && fit.slope <= expected * 3.0, "{}", fit.slope);
}

/// `#{m <= M : {γm+δ} ∈ I}` from `f64` fractional parts, skipping points
/// within `1e-9` of an endpoint of `I`.
fn exceptional_oracle(gamma: f64, delta0: f64, m_max: i64, d: f64) -> (u64, u64) {
    let (mut count, mut unsure) = (0, 0);
    for m in 1..=m_max {
        let v = gamma * m as f64 + delta0;
        let f = v - v.floor();
        let ends = [d, gamma - d, gamma + d, 1.0 - d, 0.0, 1.0];
        if ends.iter().any(|e| (f - e).abs() < 1e-9) {
            unsure += 1;
            continue;
        }
        count += (f < d || (f > gamma - d && f < gamma + d) || f > 1.0 - d) as u64;
    }
    (count, unsure)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn exceptional_count_matches_float_scan(di in 1u32..120, b_num in -9i64..9, m_max in 1i64..20_000) {
        let p = BeattyParams::parse("quad:0,3,1", &format!("{b_num}/10")).unwrap();
        let d = snap_delta(di as f64 / 1000.0);
        let v = exceptional_count(&p, m_max, d).unwrap();
        let (oracle, unsure) = exceptional_oracle(p.gamma_f64(), p.delta_f64(), m_max, d);
        prop_assert!(v >= oracle && v <= oracle + unsure);
    }

    #[test]
    fn smoothed_value_in_unit_interval(x in -10.0f64..10.0, di in 1u32..190) {
        let s = smoothed(di as f64 / 1520.0, 0);
        let v = eval_smoothed(&s, x);
        prop_assert!((0.0..=1.0).contains(&v));
    }
}
