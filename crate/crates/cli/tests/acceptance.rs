//! Acceptance sweeps at their pinned tolerances and time limits. Prints one
//! PASS/FAIL line per criterion and exits nonzero if any fails.

use std::f64::consts::{PI, TAU};
use std::process::Command as Process;
use std::time::{Duration, Instant};

use beatty_kfree::approx::IrrationalSpec;
use beatty_kfree::arith::FixedReal;
use beatty_kfree::beatty::BeattyParams;
use beatty_kfree::discrepancy::{build_pointset, extreme_discrepancy, extreme_discrepancy_oracle, PointSet};
use beatty_kfree::expsum::{double_kfree_sum_hyperbola, double_kfree_sum_naive};
use beatty_kfree::kfree::{count_kfree, count_kfree_by_moebius, kfree_indicator_moebius, sieve_kfree, zeta};
use beatty_kfree::smoothing::{build_smoothed, coefficient, eval_smoothed, eval_truncated_series};
use beatty_kfree_cli::{execute, Cli, Outcome};
use clap::Parser;
use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// Runs a subcommand in-process and parses its CSV.
fn run_cli(args: &[&str]) -> Result<(Outcome, Vec<csv::StringRecord>, csv::StringRecord), String> {
    let cli = Cli::try_parse_from(std::iter::once("kfbeatty").chain(args.iter().copied())).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    let outcome = execute(&cli.command, &mut out).map_err(|e| e.to_string())?;
    let mut reader = csv::Reader::from_reader(out.as_slice());
    let header = reader.headers().map_err(|e| e.to_string())?.clone();
    let rows = reader.records().collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
    Ok((outcome, rows, header))
}

fn column(rows: &[csv::StringRecord], header: &csv::StringRecord, name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).expect("column");
    rows.iter().map(|r| r[i].parse().unwrap_or(f64::NAN)).collect()
}

fn c1_hyperbola() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let raw: u64 = rng.random();
        let theta = FixedReal::from_ratio(&BigInt::from(raw), &(BigInt::from(1) << 64), 128);
        let (h, x, k) = (rng.random_range(1..=20), rng.random_range(1..=2000), rng.random_range(2..=3));
        let y = rng.random_range(1.0..=x as f64);
        let naive = double_kfree_sum_naive(&theta, h, x, k).map_err(|e| e.to_string())?.value();
        let split = double_kfree_sum_hyperbola(&theta, h, x, k, y).map_err(|e| e.to_string())?.total();
        worst = worst.max((split.0 - naive.0).hypot(split.1 - naive.1));
    }
    ensure(worst <= 1e-6, format!("max |A+B-C - naive| = {worst:e}"))?;
    Ok(format!("max |A+B-C - naive| = {worst:e} over 100 trials"))
}

fn c2_moebius() -> Verdict {
    let n = 100_000;
    for k in 2..=4 {
        let table = sieve_kfree(k, 1, n).map_err(|e| e.to_string())?;
        for m in 1..=n {
            ensure(
                kfree_indicator_moebius(m, k) == table.is_kfree(m) as i64,
                format!("k = {k}, n = {m}"),
            )?;
        }
    }
    Ok(format!("n <= {n}, k in {{2, 3, 4}}"))
}

fn c3_membership() -> Verdict {
    let top = 1_000_000i64;
    for alpha in ["quad:1,5,2", "quad:0,2,1", "quad:0,3,1", "quad:7,2,3"] {
        let (p, d, q) = match alpha {
            "quad:1,5,2" => (1i128, 5i128, 2i128),
            "quad:0,2,1" => (0, 2, 1),
            "quad:0,3,1" => (0, 3, 1),
            _ => (7, 2, 3),
        };
        for (b1, b2) in [(0i128, 1i128), (1, 2), (-7, 10)] {
            let params = BeattyParams::parse(alpha, &format!("{b1}/{b2}")).map_err(|e| e.to_string())?;
            // Terms by exact integer square roots: ⌊(b2·p·n + b1·q + ⌊√(d n² b2²)⌋) / (q b2)⌋.
            let mut index = vec![0i64; top as usize + 1];
            for n in 1i128.. {
                let root = ((d * n * n * b2 * b2) as u128).sqrt() as i128;
                let t = (b2 * p * n + b1 * q + root).div_euclid(q * b2) as i64;
                if t > top {
                    break;
                }
                if t >= 1 {
                    index[t as usize] = n as i64;
                }
            }
            for m in 1..=top {
                let w = params.witness(m).map_err(|e| e.to_string())?;
                let want = (index[m as usize] > 0).then_some(index[m as usize]);
                ensure(w == want, format!("{alpha}, beta {b1}/{b2}, m = {m}: {w:?} vs {want:?}"))?;
            }
        }
    }
    Ok(format!("m <= {top}, 4 alphas x 3 betas"))
}

fn c4_counting() -> Verdict {
    const STORED: u64 = 607_926;
    let x = 1_000_000u64;
    let sieve = count_kfree(x, 2).map_err(|e| e.to_string())?;
    let moebius = count_kfree_by_moebius(x, 2).map_err(|e| e.to_string())?;
    ensure(sieve.count == STORED && moebius == STORED, format!("sieve {}, moebius {moebius}", sieve.count))?;
    let err = (STORED as f64 - x as f64 / zeta(2)).abs();
    ensure(err <= 2.0 * (x as f64).sqrt(), format!("|Q_2 - x/zeta(2)| = {err}"))?;
    Ok(format!("Q_2(10^6) = {STORED}, |error| = {err:.3}"))
}

fn c5_exponent() -> Verdict {
    let mut report = Vec::new();
    for (k, alpha) in [("2", "quad:0,2,1"), ("2", "quad:1,5,2"), ("3", "quad:0,2,1")] {
        let (outcome, rows, header) = run_cli(&["fit-exponent", "--k", k, "--alpha", alpha, "--grid", "1e3:1e7:3.1622776601683795"])?;
        ensure(rows.len() == 9, format!("{} grid points", rows.len()))?;
        let slope = column(&rows, &header, "slope")[0];
        let threshold = column(&rows, &header, "threshold")[0];
        ensure(outcome == Outcome::Pass, format!("k = {k}, {alpha}: slope {slope} vs {threshold}"))?;
        report.push(format!("k={k} {alpha}: {slope:.3} <= {threshold:.3}"));
    }
    Ok(report.join("; "))
}

fn c6_theorem2() -> Verdict {
    let (outcome, rows, header) = run_cli(&["expsum-sweep", "--k", "2", "--eps", "0.05", "--trials", "100"])?;
    let ratios = column(&rows, &header, "ratio");
    let max = ratios.iter().copied().fold(0.0, f64::max);
    ensure(outcome == Outcome::Pass, format!("{outcome:?}"))?;
    ensure(ratios.len() == 100 && ratios.iter().all(|r| r.is_finite()), "non-finite ratio")?;
    let agreement = column(&rows, &header, "agreement").into_iter().fold(0.0, f64::max);
    ensure(max <= 10.0, format!("max ratio {max}"))?;
    Ok(format!("max ratio {max:.4}, max |hyperbola - naive| {agreement:e}"))
}

fn c7_min_sums() -> Verdict {
    let (outcome, rows, header) = run_cli(&["expsum-sweep", "--bound", "min-sum", "--trials", "200"])?;
    let ratios = column(&rows, &header, "ratio");
    let max = ratios.iter().copied().fold(0.0, f64::max);
    ensure(outcome == Outcome::Pass && ratios.len() == 400, format!("{outcome:?}, {} rows", ratios.len()))?;
    ensure(max <= 8.0, format!("max ratio {max}"))?;
    Ok(format!("max ratio {max:.4} over 200 setups"))
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
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

fn integrate(f: impl Fn(f64) -> f64, breaks: &[f64], panels: usize, rule: &[(f64, f64)]) -> f64 {
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let h = (w[1] - w[0]) / panels as f64;
        for p in 0..panels {
            let (a, b) = (w[0] + p as f64 * h, w[0] + (p + 1) as f64 * h);
            let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
            total += rule.iter().map(|&(x, wt)| wt * f(mid + half * x)).sum::<f64>() * half;
        }
    }
    total
}

fn c8_smoothing() -> Verdict {
    let gamma = IrrationalSpec::golden_ratio().reciprocal().map_err(|e| e.to_string())?.approx(128);
    let s = build_smoothed(&gamma, 1.0 / 32.0, 200).map_err(|e| e.to_string())?;
    let (g, d) = (s.gamma_f64(), s.delta());
    let breaks = [0.0, d, g - d, g + d, 1.0 - d, 1.0];
    let rule = gauss_legendre(10);
    let mut quad_err: f64 = 0.0;
    for j in 1..=200i64 {
        let w = TAU * j as f64;
        let re = integrate(|x| eval_smoothed(&s, x) * (w * x).cos(), &breaks, 64, &rule);
        let im = integrate(|x| -eval_smoothed(&s, x) * (w * x).sin(), &breaks, 64, &rule);
        let (cr, ci) = s.coeff(j);
        quad_err = quad_err.max((cr - re).abs()).max((ci - im).abs());
    }
    ensure(quad_err <= 1e-10, format!("quadrature error {quad_err:e}"))?;

    for j in 1..=100_000u64 {
        let (r, i) = coefficient(g, 1e-3, j);
        let bound = (1.0 / (PI * j as f64)).min(1.0 / (2.0 * PI * PI * (j * j) as f64 * 1e-3));
        ensure(r.hypot(i) <= bound * (1.0 + 1e-12), format!("coefficient bound fails at j = {j}"))?;
    }

    let j_max = 512;
    let series = build_smoothed(&gamma, 1.0 / 32.0, j_max).map_err(|e| e.to_string())?;
    let tail = 1.0 / (PI * PI * j_max as f64 / 32.0);
    let series_err = (0..10_000)
        .map(|i| {
            let x = i as f64 / 10_000.0;
            (eval_truncated_series(&series, x) - eval_smoothed(&series, x)).abs()
        })
        .fold(0.0, f64::max);
    ensure(series_err <= tail, format!("series error {series_err} > {tail}"))?;

    let mut runs = 0;
    for (alpha, beta, k) in [("quad:1,5,2", "0", "2"), ("quad:0,2,1", "1/2", "2"), ("quad:7,2,3", "-7/10", "3")] {
        let (outcome, rows, header) =
            run_cli(&["smoothing-check", "--alpha", alpha, "--beta", beta, "--k", k, "--grid", "1e3:1e5:10", "--series"])?;
        let i = header.iter().position(|h| h == "within_bound").unwrap();
        ensure(outcome == Outcome::Pass && rows.iter().all(|r| &r[i] == "true"), format!("{alpha} {beta} k={k}"))?;
        runs += rows.len();
    }
    Ok(format!(
        "quadrature {quad_err:e}, bound j <= 1e5, series {series_err:.2e} <= {tail:.2e}, {runs} smoothed runs within V"
    ))
}

fn c9_discrepancy() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut sets: Vec<Vec<u64>> = Vec::new();
    for _ in 0..34 {
        let m = rng.random_range(1..=2000);
        let mut pts: Vec<u64> = (0..m).map(|_| rng.random()).collect();
        pts.sort_unstable();
        pts.dedup();
        sets.push(pts);
    }
    for alpha in ["quad:1,5,2", "quad:0,2,1", "quad:0,3,1", "quad:7,2,3", "quad:0,991,1"] {
        for b in [0i64, 1] {
            let a: IrrationalSpec = alpha.parse().map_err(|e: beatty_kfree::Error| e.to_string())?;
            let beta = BigRational::new(b.into(), 2.into());
            let m = rng.random_range(1..=2000);
            sets.push(build_pointset(&a, &beta, m, Default::default()).map_err(|e| e.to_string())?.points().to_vec());
        }
    }
    for m in [50u64, 500, 2000] {
        sets.push((0..m).map(|i| i * (u64::MAX / m)).collect());
        sets.push((0..m).map(|i| (1 << 60) + i * 1000).collect());
    }
    sets.truncate(50);
    ensure(sets.len() == 50, "too few sets")?;
    for pts in &sets {
        let ps = PointSet::from_grid(pts.clone()).map_err(|e| e.to_string())?;
        ensure(
            extreme_discrepancy(&ps).extreme_num == extreme_discrepancy_oracle(&ps),
            format!("fast and oracle differ at M = {}", ps.len()),
        )?;
    }
    let mut report = vec!["50 sets exact".to_string()];
    for alpha in ["quad:1,5,2", "quad:0,2,1"] {
        let (_, rows, header) = run_cli(&["discrepancy", "--alpha", alpha, "--grid", "100:1e6:3.1622776601683795"])?;
        let e = column(&rows, &header, "exponent")[0];
        ensure(e <= -0.85, format!("{alpha}: exponent {e}"))?;
        report.push(format!("{alpha}: {e:.3}"));
    }
    Ok(report.join("; "))
}

fn c10_determinism() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_kfbeatty");
    let dir = std::env::temp_dir().join(format!("kfbeatty-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let runs: &[&[&str]] = &[
        &["count", "--alpha", "quad:1,5,2", "--grid", "1e3:1e6:10"],
        &["fit-exponent", "--k", "3", "--grid", "1e3:1e6:3.1622776601683795"],
        &["expsum-sweep", "--trials", "30", "--x-max", "20000"],
        &["expsum-sweep", "--bound", "min-sum", "--trials", "30"],
        &["discrepancy", "--alpha", "quad:1,5,2", "--grid", "1:1e5:10"],
        &["smoothing-check", "--grid", "1e3:1e5:10", "--series"],
        &["selftest"],
    ];
    for args in runs {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let path = dir.join(format!("{}-{rep}.csv", args.join("_").replace([':', ','], "-")));
            let status = Process::new(bin)
                .args(*args)
                .args(["--seed", "17", "--threads", "2", "--out"])
                .arg(&path)
                .status()
                .map_err(|e| e.to_string())?;
            ensure(status.success(), format!("{args:?} exited with {status}"))?;
            outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
        }
        ensure(outputs[0] == outputs[1], format!("{args:?} differs between runs"))?;
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("{} commands byte-identical across two runs", runs.len()))
}

fn main() {
    let criteria: &[(&str, fn() -> Verdict, Duration)] = &[
        ("1 hyperbola identity", c1_hyperbola, Duration::from_secs(30)),
        ("2 moebius k-free identity", c2_moebius, Duration::from_secs(5)),
        ("3 membership equivalence", c3_membership, Duration::from_secs(60)),
        ("4 counting sanity", c4_counting, Duration::from_secs(5)),
        ("5 error exponent", c5_exponent, Duration::from_secs(600)),
        ("6 exponential sum bound sweep", c6_theorem2, Duration::from_secs(300)),
        ("7 min-sum bounds", c7_min_sums, Duration::from_secs(120)),
        ("8 smoothing", c8_smoothing, Duration::from_secs(60)),
        ("9 discrepancy", c9_discrepancy, Duration::from_secs(300)),
        ("10 determinism", c10_determinism, Duration::from_secs(600)),
    ];
    let mut failed = 0;
    for (name, f, limit) in criteria {
        let start = Instant::now();
        let result = f();
        let secs = start.elapsed();
        let verdict = match &result {
            Ok(_) if secs <= *limit => "PASS",
            _ => "FAIL",
        };
        let detail = match result {
            Ok(d) if secs <= *limit => d,
            Ok(d) => format!("{d}; over the {}s limit", limit.as_secs()),
            Err(e) => e,
        };
        if verdict == "FAIL" {
            failed += 1;
        }
        println!("{verdict} criterion {name} ({:.1}s): {detail}", secs.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
