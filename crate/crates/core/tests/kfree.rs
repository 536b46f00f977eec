use beatty_kfree::kfree::{
    count_kfree, count_kfree_by_moebius, kfree_indicator_moebius, sieve_kfree, sieve_kfree_with,
    sieve_moebius, sieve_moebius_with, zeta, KFreeSieve, SieveConfig,
};
use num_integer::Integer;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `(μ(n), largest prime exponent)` by trial division.
fn factor_oracle(mut n: u64) -> (i8, u32) {
    let (mut mu, mut top) = (1i8, 0u32);
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            mu = -mu;
            top = top.max(e);
        }
        p += 1;
    }
    if n > 1 {
        mu = -mu;
        top = top.max(1);
    }
    (if top >= 2 { 0 } else { mu }, top)
}

#[test]
fn moebius_matches_trial_division() {
    let t = sieve_moebius(1, 100_000).unwrap();
    for n in 1..=100_000 {
        assert_eq!(t.get(n), factor_oracle(n).0, "n = {n}");
    }
}

#[test]
fn moebius_is_multiplicative() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let small = sieve_moebius(1, 10_000).unwrap();
    let mut checked = 0;
    while checked < 10_000 {
        let (m, n) = (rng.random_range(1..=10_000u64), rng.random_range(1..=10_000u64));
        if m.gcd(&n) != 1 {
            continue;
        }
        let mn = sieve_moebius(m * n, m * n).unwrap().get(m * n);
        assert_eq!(mn, small.get(m) * small.get(n), "m = {m}, n = {n}");
        checked += 1;
    }
}

#[test]
fn indicator_matches_sieve() {
    for k in [2, 3, 4] {
        let t = sieve_kfree(k, 1, 100_000).unwrap();
        for n in 1..=100_000 {
            let ind = kfree_indicator_moebius(n, k);
            assert_eq!(ind, t.is_kfree(n) as i64, "n = {n}, k = {k}");
            assert_eq!(t.is_kfree(n), factor_oracle(n).1 < k);
        }
    }
}

#[test]
fn squarefree_count_to_a_million() {
    assert_eq!(count_kfree(1_000_000, 2).unwrap().count, 607_926);
    assert_eq!(count_kfree_by_moebius(1_000_000, 2).unwrap(), 607_926);
    assert_eq!(sieve_kfree(2, 1, 1_000_000).unwrap().count(), 607_926);
}

#[test]
fn error_term_scales_like_kth_root() {
    for k in [2u32, 3] {
        let mut worst = 0f64;
        for x in [10_000u64, 100_000, 1_000_000, 10_000_000] {
            let c = count_kfree(x, k).unwrap();
            assert_eq!(c.count, count_kfree_by_moebius(x, k).unwrap());
            worst = worst.max(c.error.abs() / (x as f64).powf(1.0 / k as f64));
        }
        assert!(worst <= 2.0, "k = {k}: constant {worst}");
    }
}

#[test]
fn zeta_examples() {
    assert!((zeta(2) - 1.644_934_066_848).abs() < 1e-12);
    assert!((zeta(3) - 1.202_056_903_159).abs() < 1e-12);
    assert!(zeta(20) > 1.0 && zeta(20) < 1.0 + 2f64.powi(-19));
    for k in 2..30 {
        assert!(zeta(k + 1) < zeta(k));
    }
}

#[test]
fn reusable_sieve_matches_tables() {
    let s = KFreeSieve::new(2, 2_000_000).unwrap();
    let t = sieve_kfree(2, 1_500_000, 1_600_000).unwrap();
    assert_eq!(s.window(1_500_000, 1_600_000), t.flags());
    assert_eq!(s.count_window(1_500_000, 1_600_000), t.count());
}

#[test]
fn budget_errors_are_reported() {
    let cfg = SieveConfig { segment_len: 1 << 16, memory_budget: 1 << 10 };
    assert!(sieve_kfree_with(2, 1, 1 << 20, &cfg).is_err());
    assert!(sieve_moebius_with(1, 1 << 20, &cfg).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn segmented_equals_monolithic(lo in 1u64..5_000_000, len in 1u64..50_000, seg in 1u64..5000, k in 2u32..5) {
        let hi = lo + len - 1;
        let cfg = SieveConfig { segment_len: seg, ..Default::default() };
        let a = sieve_kfree_with(k, lo, hi, &cfg).unwrap();
        let b = sieve_kfree_with(k, lo, hi, &SieveConfig { segment_len: u64::MAX / 4, ..Default::default() }).unwrap();
        prop_assert_eq!(&a, &b);
        let ma = sieve_moebius_with(lo, hi, &cfg).unwrap();
        let mb = sieve_moebius(lo, hi).unwrap();
        prop_assert_eq!(ma.values(), mb.values());
        for n in (lo..=hi).step_by(997) {
            prop_assert_eq!(ma.get(n), factor_oracle(n).0);
            prop_assert_eq!(a.is_kfree(n), factor_oracle(n).1 < k);
        }
    }
}
