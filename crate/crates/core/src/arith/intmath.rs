//! Small integer helpers shared by the sieves and sum kernels.

/// Floor of the k-th root of `n`, for `k >= 1`.
pub fn iroot(n: u64, k: u32) -> u64 {
    assert!(k >= 1, "root order must be positive");
    if k == 1 || n < 2 {
        return n;
    }
    let mut r = (n as f64).powf(1.0 / k as f64).round() as u64;
    // Correct the float estimate in both directions.
    while r > 0 && pow_exceeds(r, k, n) {
        r -= 1;
    }
    while !pow_exceeds(r + 1, k, n) {
        r += 1;
    }
    r
}

/// True iff `base^k > n`, without overflow.
pub fn pow_exceeds(base: u64, k: u32, n: u64) -> bool {
    let mut acc: u64 = 1;
    for _ in 0..k {
        match acc.checked_mul(base) {
            Some(v) if v <= n => acc = v,
            Some(_) | None => return true,
        }
    }
    false
}

/// `base^k` or `None` on overflow.
pub fn checked_pow(base: u64, k: u32) -> Option<u64> {
    base.checked_pow(k)
}

/// Floor of the square root of a 128-bit integer.
pub fn isqrt_u128(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut r = (n as f64).sqrt() as u128;
    while r.checked_mul(r).is_none_or(|s| s > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|s| s <= n) {
        r += 1;
    }
    r
}

/// True iff `n` is a perfect square.
pub fn is_square_u128(n: u128) -> bool {
    let r = isqrt_u128(n);
    r * r == n
}

/// Möbius function by trial division. Only for oracles and small spot checks.
pub fn moebius_trial(mut n: u64) -> i8 {
    assert!(n >= 1);
    let mut mu = 1i8;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            mu = -mu;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        mu = -mu;
    }
    mu
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots() {
        assert_eq!(iroot(0, 2), 0);
        assert_eq!(iroot(1, 3), 1);
        assert_eq!(iroot(99, 2), 9);
        assert_eq!(iroot(100, 2), 10);
        assert_eq!(iroot(1_000_000, 3), 100);
        assert_eq!(iroot(999_999, 3), 99);
        assert_eq!(iroot(u64::MAX, 2), 4_294_967_295);
        assert_eq!(iroot(u64::MAX, 64), 1);
        for n in 0..5000u64 {
            let r = iroot(n, 2);
            assert!(r * r <= n && (r + 1) * (r + 1) > n);
        }
    }

    #[test]
    fn sqrt128() {
        for n in [0u128, 1, 2, 3, 4, 15, 16, 17, 1 << 100, (1 << 100) - 1, u128::MAX] {
            let r = isqrt_u128(n);
            assert!(r * r <= n);
            assert!((r + 1).checked_mul(r + 1).is_none_or(|s| s > n));
        }
        assert!(is_square_u128(144));
        assert!(!is_square_u128(145));
    }

    #[test]
    fn moebius_small() {
        let expected = [1, -1, -1, 0, -1, 1, -1, 0, 0, 1];
        for (i, &mu) in expected.iter().enumerate() {
            assert_eq!(moebius_trial(i as u64 + 1), mu);
        }
    }
}
