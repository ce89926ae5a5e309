//! Number-theoretic helpers: primes, `lcm[1..n]` and its logarithm.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

/// Above this bound `log2_lcm_upto` uses the prime number theorem estimate
/// `psi(n) ~ n` instead of sieving.
pub const PSI_SIEVE_LIMIT: u64 = 200_000_000;

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// Least common multiple, `None` on overflow.
pub fn lcm(a: u64, b: u64) -> Option<u64> {
    if a == 0 || b == 0 {
        return Some(0);
    }
    (a / gcd(a, b)).checked_mul(b)
}

/// `lcm[1..n]` as a machine integer, `None` on overflow. `lcm[1..0] = 1`.
pub fn lcm_upto_u64(n: u64) -> Option<u64> {
    (1..=n).try_fold(1u64, lcm)
}

/// Primes `<= n` by the sieve of Eratosthenes.
pub fn primes_upto(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i.saturating_mul(i);
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Exponent of the prime `p` in `lcm[1..n]`, i.e. `floor(log_p n)`.
pub fn prime_exponent_in_lcm(p: u64, n: u64) -> u32 {
    if p < 2 {
        return 0;
    }
    let mut e = 0;
    let mut pow = p;
    while pow <= n {
        e += 1;
        match pow.checked_mul(p) {
            Some(next) => pow = next,
            None => break,
        }
    }
    e
}

/// Exact `lcm[1..n]`. Cost is dominated by the final products, which are
/// balanced through a product tree.
pub fn lcm_upto(n: u64) -> BigUint {
    let factors: Vec<BigUint> = primes_upto(n)
        .into_iter()
        .map(|p| {
            let mut pow = p;
            while let Some(next) = pow.checked_mul(p) {
                if next > n {
                    break;
                }
                pow = next;
            }
            BigUint::from(pow)
        })
        .collect();
    product_tree(factors)
}

fn product_tree(mut xs: Vec<BigUint>) -> BigUint {
    if xs.is_empty() {
        return BigUint::one();
    }
    while xs.len() > 1 {
        let mut next = Vec::with_capacity(xs.len().div_ceil(2));
        let mut it = xs.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a * b),
                None => next.push(a),
            }
        }
        xs = next;
    }
    xs.pop().unwrap()
}

fn psi_cache() -> &'static Mutex<HashMap<u64, f64>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Chebyshev's `psi(n) = ln lcm[1..n]`, via a segmented sieve up to
/// [`PSI_SIEVE_LIMIT`] and `n` beyond it.
pub fn chebyshev_psi(n: u64) -> f64 {
    if n > PSI_SIEVE_LIMIT {
        return n as f64;
    }
    if let Some(v) = psi_cache().lock().unwrap().get(&n) {
        return *v;
    }
    let v = segmented_psi(n);
    psi_cache().lock().unwrap().insert(n, v);
    v
}

/// True when [`chebyshev_psi`] returns an estimate rather than a sieved sum.
pub fn psi_is_estimate(n: u64) -> bool {
    n > PSI_SIEVE_LIMIT
}

fn segmented_psi(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let root = (n as f64).sqrt() as u64 + 1;
    let small = primes_upto(root);
    let mut total = 0.0f64;
    let add_prime = |p: u64, total: &mut f64| {
        *total += prime_exponent_in_lcm(p, n) as f64 * (p as f64).ln();
    };
    for &p in &small {
        if p <= n {
            add_prime(p, &mut total);
        }
    }
    const SEG: u64 = 1 << 20;
    let mut lo = root + 1;
    let mut mark = vec![false; SEG as usize];
    while lo <= n {
        let hi = (lo + SEG - 1).min(n);
        let len = (hi - lo + 1) as usize;
        mark[..len].iter_mut().for_each(|m| *m = false);
        for &p in &small {
            let start = lo.div_ceil(p) * p;
            let mut j = start.max(p * p);
            while j <= hi {
                mark[(j - lo) as usize] = true;
                j += p;
            }
        }
        for (i, &m) in mark[..len].iter().enumerate() {
            if !m {
                // every prime above sqrt(n) appears with exponent one
                total += ((lo + i as u64) as f64).ln();
            }
        }
        lo = hi + 1;
    }
    total
}

/// `log2 lcm[1..n]`.
pub fn log2_lcm_upto(n: u64) -> f64 {
    chebyshev_psi(n) / std::f64::consts::LN_2
}

/// `log2` of an arbitrary big integer, accurate to about 1e-15 relative.
pub fn log2_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 64 {
        return (x.to_u64().unwrap() as f64).log2();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().unwrap() as f64;
    top.log2() + shift as f64
}

/// Factors `x` over primes `<= bound` by trial division. Returns `None` when a
/// cofactor larger than one remains.
pub fn factor_small(x: &BigUint, bound: u64) -> Option<Vec<(u64, u32)>> {
    if x.is_zero() {
        return None;
    }
    let mut rest = x.clone();
    let mut out = Vec::new();
    if let Some(v) = rest.to_u64() {
        return factor_u64(v, bound);
    }
    for p in primes_upto(bound) {
        let bp = BigUint::from(p);
        let mut e = 0;
        loop {
            let (q, r) = rest.div_rem(&bp);
            if !r.is_zero() {
                break;
            }
            rest = q;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        if rest.is_one() {
            return Some(out);
        }
    }
    None
}

fn factor_u64(mut v: u64, bound: u64) -> Option<Vec<(u64, u32)>> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p <= bound && v > 1 {
        if p.saturating_mul(p) > v {
            if v <= bound {
                out.push((v, 1));
                return Some(out);
            }
            return None;
        }
        let mut e = 0;
        while v % p == 0 {
            v /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if v == 1 {
        Some(out)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_lcm_upto(n: u64) -> BigUint {
        let mut acc = BigUint::one();
        for i in 1..=n {
            let bi = BigUint::from(i);
            acc = acc.lcm(&bi);
        }
        acc
    }

    #[test]
    fn small_lcm_values() {
        assert_eq!(lcm_upto_u64(0), Some(1));
        assert_eq!(lcm_upto_u64(6), Some(60));
        assert_eq!(lcm_upto_u64(16), Some(720_720));
        assert_eq!(lcm_upto(16), BigUint::from(720_720u64));
        assert_eq!(lcm_upto_u64(2), Some(2));
    }

    #[test]
    fn prime_exponents() {
        assert_eq!(prime_exponent_in_lcm(2, 16), 4);
        assert_eq!(prime_exponent_in_lcm(3, 16), 2);
        assert_eq!(prime_exponent_in_lcm(17, 16), 0);
    }

    #[test]
    fn psi_matches_exact_log() {
        for n in [1u64, 2, 10, 100, 1000, 5000] {
            let exact = log2_big(&lcm_upto(n));
            let sieved = log2_lcm_upto(n);
            assert!((exact - sieved).abs() < 1e-6 * exact.max(1.0), "n={n}");
        }
    }

    #[test]
    fn factoring() {
        assert_eq!(factor_small(&BigUint::from(360u32), 100), Some(vec![(2, 3), (3, 2), (5, 1)]));
        assert_eq!(factor_small(&BigUint::from(1009u32 * 2), 100), None);
        let big = lcm_upto(200) * BigUint::from(7u32);
        let f = factor_small(&big, 200).unwrap();
        assert!(f.contains(&(7, 3)));
    }

    proptest! {
        #[test]
        fn lcm_upto_agrees_with_fold(n in 0u64..60) {
            prop_assert_eq!(lcm_upto(n), naive_lcm_upto(n));
        }
    }
}
