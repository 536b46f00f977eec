//! Small-scale oracle suite. Each check compares a kernel against an
//! independent computation; the first failure ends the run.

use std::io::Write;

use beatty_kfree::approx::IrrationalSpec;
use beatty_kfree::arith::FixedReal;
use beatty_kfree::beatty::BeattyParams;
use beatty_kfree::discrepancy::{extreme_discrepancy, extreme_discrepancy_oracle, PointSet};
use beatty_kfree::expsum::{double_kfree_sum_hyperbola, double_kfree_sum_naive};
use beatty_kfree::kfree::{count_kfree, count_kfree_by_moebius, kfree_indicator_moebius, sieve_kfree};
use beatty_kfree::smoothing::{build_smoothed, eval_smoothed};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::table::{RunEcho, Table};
use crate::{CliError, Config, Outcome};

/// Reference data and kernels the checks compare against. Tests swap in
/// corrupted versions to confirm that failures are reported.
#[derive(Clone, Copy)]
pub struct Fixture {
    /// k-free flags for `1..=n`, index 0 unused.
    pub kfree_flags: fn(u32, u64) -> Vec<bool>,
    /// `Q_2(10^6)`.
    pub q2_million: u64,
}

fn sieve_flags(k: u32, n: u64) -> Vec<bool> {
    let table = sieve_kfree(k, 1, n).expect("small sieve");
    (0..=n).map(|m| m >= 1 && table.is_kfree(m)).collect()
}

impl Default for Fixture {
    fn default() -> Self {
        Fixture {
            kfree_flags: sieve_flags,
            q2_million: 607_926,
        }
    }
}

type Check = fn(&Fixture, &mut ChaCha8Rng) -> Result<String, String>;

pub const CHECKS: &[(&str, Check)] = &[
    ("moebius-indicator-identity", moebius_identity),
    ("squarefree-count", squarefree_count),
    ("hyperbola-identity", hyperbola_identity),
    ("membership-equivalence", membership_equivalence),
    ("coefficient-quadrature", coefficient_quadrature),
    ("discrepancy-oracle", discrepancy_oracle),
];

pub fn run(cfg: &Config, fixture: &Fixture, sink: &mut dyn Write) -> Result<Outcome, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut t = Table::new(sink, RunEcho::new("selftest", cfg, None), &["check", "status", "detail"])?;
    let mut outcome = Outcome::Pass;
    for (name, check) in CHECKS {
        let (status, detail) = match check(fixture, &mut rng) {
            Ok(d) => ("ok", d),
            Err(d) => ("FAIL", d),
        };
        t.row(&[name.to_string(), status.to_string(), detail.clone()])?;
        if status == "FAIL" {
            outcome = Outcome::Fail(format!("{name}: {detail}"));
            break;
        }
    }
    t.finish()?;
    Ok(outcome)
}

fn moebius_identity(f: &Fixture, _: &mut ChaCha8Rng) -> Result<String, String> {
    let n = 20_000;
    for k in 2..=4 {
        let flags = (f.kfree_flags)(k, n);
        for m in 1..=n {
            let ind = kfree_indicator_moebius(m, k);
            if ind != flags[m as usize] as i64 {
                return Err(format!("k = {k}, n = {m}: identity gives {ind}, sieve {}", flags[m as usize]));
            }
        }
    }
    Ok(format!("n <= {n}, k = 2..4"))
}

fn squarefree_count(f: &Fixture, _: &mut ChaCha8Rng) -> Result<String, String> {
    let x = 1_000_000;
    let sieve = count_kfree(x, 2).map_err(|e| e.to_string())?.count;
    let moebius = count_kfree_by_moebius(x, 2).map_err(|e| e.to_string())?;
    if sieve != moebius || sieve != f.q2_million {
        return Err(format!("sieve {sieve}, moebius {moebius}, reference {}", f.q2_million));
    }
    Ok(format!("Q_2(10^6) = {sieve}"))
}

fn hyperbola_identity(_: &Fixture, rng: &mut ChaCha8Rng) -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for _ in 0..25 {
        let raw: u64 = rng.random();
        let theta = FixedReal::from_ratio(&BigInt::from(raw), &(BigInt::from(1) << 64), 128);
        let h = rng.random_range(1..=20);
        let x = rng.random_range(1..=2000);
        let k = rng.random_range(2..=3);
        let y = rng.random_range(1.0..=x as f64);
        let naive = double_kfree_sum_naive(&theta, h, x, k).map_err(|e| e.to_string())?.value();
        let split = double_kfree_sum_hyperbola(&theta, h, x, k, y).map_err(|e| e.to_string())?.total();
        let err = (split.0 - naive.0).hypot(split.1 - naive.1);
        if !(err <= 1e-6) {
            return Err(format!("theta = {raw}/2^64, H = {h}, x = {x}, k = {k}, y = {y}: |diff| = {err}"));
        }
        worst = worst.max(err);
    }
    Ok(format!("max |diff| = {worst:e}"))
}

/// Marks the terms `⌊αn+β⌋ <= top` by walking `n`.
fn enumerate_terms(p: &BeattyParams, top: i64) -> Result<Vec<Option<i64>>, String> {
    let mut is_term = vec![None; top as usize + 1];
    for n in 1.. {
        let t = p.term(n).map_err(|e| e.to_string())?;
        if t > top {
            break;
        }
        if t >= 1 {
            is_term[t as usize] = Some(n);
        }
    }
    Ok(is_term)
}

fn membership_equivalence(_: &Fixture, _: &mut ChaCha8Rng) -> Result<String, String> {
    let top = 20_000;
    let mut cases = 0;
    for alpha in ["quad:1,5,2", "quad:0,2,1", "quad:0,3,1", "quad:7,2,3"] {
        for beta in ["0", "1/2", "-7/10"] {
            let p = BeattyParams::parse(alpha, beta).map_err(|e| e.to_string())?;
            let terms = enumerate_terms(&p, top)?;
            for m in 1..=top {
                let w = p.witness(m).map_err(|e| e.to_string())?;
                if w != terms[m as usize] {
                    return Err(format!("alpha {alpha}, beta {beta}, m = {m}: criterion {w:?}, enumeration {:?}", terms[m as usize]));
                }
            }
            cases += 1;
        }
    }
    Ok(format!("m <= {top} for {cases} (alpha, beta) pairs"))
}

/// Composite Simpson rule on each piece between consecutive breaks.
fn simpson(f: impl Fn(f64) -> f64, breaks: &[f64], panels: usize) -> f64 {
    breaks
        .windows(2)
        .map(|w| {
            let h = (w[1] - w[0]) / (2 * panels) as f64;
            let inner: f64 = (1..2 * panels)
                .map(|i| f(w[0] + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
                .sum();
            (f(w[0]) + f(w[1]) + inner) * h / 3.0
        })
        .sum()
}

fn coefficient_quadrature(_: &Fixture, _: &mut ChaCha8Rng) -> Result<String, String> {
    let gamma = IrrationalSpec::golden_ratio().reciprocal().map_err(|e| e.to_string())?.approx(128);
    let j_max = 30i64;
    let s = build_smoothed(&gamma, 1.0 / 32.0, j_max as usize).map_err(|e| e.to_string())?;
    let (g, d) = (s.gamma_f64(), s.delta());
    let breaks = [0.0, d, g - d, g + d, 1.0 - d, 1.0];
    let mut worst: f64 = 0.0;
    for j in 0..=j_max {
        let w = std::f64::consts::TAU * j as f64;
        let re = simpson(|x| eval_smoothed(&s, x) * (w * x).cos(), &breaks, 4000);
        let im = simpson(|x| -eval_smoothed(&s, x) * (w * x).sin(), &breaks, 4000);
        let (cr, ci) = s.coeff(j);
        let err = (cr - re).hypot(ci - im);
        if !(err <= 1e-9) {
            return Err(format!("j = {j}: closed form ({cr}, {ci}), quadrature ({re}, {im})"));
        }
        worst = worst.max(err);
    }
    Ok(format!("j <= {j_max}, max error {worst:e}"))
}

fn discrepancy_oracle(_: &Fixture, rng: &mut ChaCha8Rng) -> Result<String, String> {
    let beta = BigRational::new(BigInt::from(1), BigInt::from(3));
    let golden = beatty_kfree::discrepancy::build_pointset(
        &IrrationalSpec::golden_ratio(),
        &beta,
        300,
        Default::default(),
    )
    .map_err(|e| e.to_string())?;
    let mut sets = vec![golden.points().to_vec()];
    for _ in 0..20 {
        let m = rng.random_range(1..=300);
        let mut pts: Vec<u64> = (0..m).map(|_| rng.random()).collect();
        pts.sort_unstable();
        pts.dedup();
        sets.push(pts);
    }
    let n = sets.len();
    for pts in sets {
        let ps = PointSet::from_grid(pts).map_err(|e| e.to_string())?;
        let fast = extreme_discrepancy(&ps).extreme_num;
        let slow = extreme_discrepancy_oracle(&ps);
        if fast != slow {
            return Err(format!("M = {}: fast {fast}, oracle {slow}", ps.len()));
        }
    }
    Ok(format!("{n} point sets"))
}
