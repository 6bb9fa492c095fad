//! Totient and Möbius sieves, Farey counting in intervals, and exact sums
//! over the totient.

use crate::error::{Error, Result};
use crate::frac::Rational;
use crate::intervals::RationalInterval;
use crate::numeric::{loglog, E_GAMMA};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;

/// Bytes per sieve entry: phi (u32), smallest prime factor (u32), mu (i8).
const BYTES_PER_ENTRY: usize = 9;

/// Default memory budget for sieve tables.
pub const DEFAULT_SIEVE_BUDGET: usize = 2 << 30;

/// Linear sieve of φ, μ and the smallest prime factor on 1..=limit.
#[derive(Clone, Debug)]
pub struct SieveTable {
    limit: usize,
    phi: Vec<u32>,
    mu: Vec<i8>,
    spf: Vec<u32>,
    primes: Vec<u32>,
}

pub fn build_sieve(limit: usize) -> Result<SieveTable> {
    build_sieve_with_budget(limit, DEFAULT_SIEVE_BUDGET)
}

pub fn build_sieve_with_budget(limit: usize, budget_bytes: usize) -> Result<SieveTable> {
    if limit == 0 {
        return Err(Error::Input("sieve limit must be at least 1".into()));
    }
    if limit > u32::MAX as usize - 1 {
        return Err(Error::Resource(format!("sieve limit {limit} exceeds 32-bit table entries")));
    }
    let need = (limit + 1).saturating_mul(BYTES_PER_ENTRY);
    if need > budget_bytes {
        return Err(Error::Resource(format!("sieve to {limit} needs ~{need} bytes, budget is {budget_bytes}")));
    }
    let mut phi = vec![0u32; limit + 1];
    let mut mu = vec![0i8; limit + 1];
    let mut spf = vec![0u32; limit + 1];
    let mut primes = Vec::new();
    phi[1] = 1;
    mu[1] = 1;
    for i in 2..=limit {
        if spf[i] == 0 {
            spf[i] = i as u32;
            phi[i] = i as u32 - 1;
            mu[i] = -1;
            primes.push(i as u32);
        }
        for &p in &primes {
            let m = i * p as usize;
            if p > spf[i] || m > limit {
                break;
            }
            spf[m] = p;
            if i % p as usize == 0 {
                phi[m] = phi[i] * p;
                mu[m] = 0;
            } else {
                phi[m] = phi[i] * (p - 1);
                mu[m] = -mu[i];
            }
        }
    }
    Ok(SieveTable { limit, phi, mu, spf, primes })
}

impl SieveTable {
    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn phi(&self, n: usize) -> u64 {
        self.phi[n] as u64
    }

    pub fn mu(&self, n: usize) -> i8 {
        self.mu[n]
    }

    pub fn smallest_prime_factor(&self, n: usize) -> u64 {
        self.spf[n] as u64
    }

    pub fn phi_slice(&self) -> &[u32] {
        &self.phi
    }

    pub fn mu_slice(&self) -> &[i8] {
        &self.mu
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    /// Prime factorization as (p, e) pairs in increasing p.
    pub fn factorize(&self, mut n: usize) -> Vec<(u64, u32)> {
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf[n] as usize;
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p as u64, e));
        }
        out
    }

    pub fn divisors(&self, n: usize) -> Vec<u64> {
        divisors_from(&self.factorize(n))
    }

    pub fn farey_count(&self, n: usize, interval: &RationalInterval) -> u64 {
        farey_count_factored(n as u64, &self.factorize(n), interval)
    }

    /// Σ_{n ≤ upto} φ(n).
    pub fn totient_sum(&self, upto: usize) -> u128 {
        self.phi[1..=upto].iter().map(|&v| v as u128).sum()
    }
}

/// Trial-division factorization for integers outside a sieve.
pub fn factorize_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Factorization of a big integer whose prime factors are all at most
/// `max_prime`. Returns `None` if a cofactor remains.
pub fn factorize_smooth(n: &BigUint, max_prime: u64) -> Option<Vec<(BigUint, u32)>> {
    let mut n = n.clone();
    let mut out = Vec::new();
    let mut p = 2u64;
    while p <= max_prime && !n.is_one() {
        let bp = BigUint::from(p);
        let mut e = 0;
        loop {
            let (q, r) = n.div_rem(&bp);
            if !r.is_zero() {
                break;
            }
            n = q;
            e += 1;
        }
        if e > 0 {
            out.push((bp, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    n.is_one().then_some(out)
}

/// φ from a factorization.
pub fn totient_from_factors(factors: &[(BigUint, u32)]) -> BigUint {
    let mut acc = BigUint::one();
    for (p, e) in factors {
        acc *= num_traits::pow(p.clone(), (*e - 1) as usize) * (p - 1u32);
    }
    acc
}

pub fn divisors_from(factors: &[(u64, u32)]) -> Vec<u64> {
    let mut divs = vec![1u64];
    for &(p, e) in factors {
        let len = divs.len();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                divs.push(divs[i] * pk);
            }
        }
    }
    divs.sort_unstable();
    divs
}

/// #{a ∈ [d] : lo ≤ a/d ≤ hi}.
pub fn theta(d: u64, interval: &RationalInterval) -> u64 {
    let lo = interval.lo.ceil_times(d).max(1);
    let hi = interval.hi.floor_times(d).min(d as i128);
    if hi >= lo {
        (hi - lo + 1) as u64
    } else {
        0
    }
}

/// #(Q_n ∩ I): reduced fractions a/n with a ∈ [n] lying in I.
pub fn farey_count(n: u64, interval: &RationalInterval) -> u64 {
    assert!(n >= 1, "n must be positive");
    farey_count_factored(n, &factorize_u64(n), interval)
}

fn farey_count_factored(n: u64, factors: &[(u64, u32)], interval: &RationalInterval) -> u64 {
    // Möbius inversion over squarefree divisors e of n: Σ μ(e) θ(n/e)
    let primes: Vec<u64> = factors.iter().map(|f| f.0).collect();
    let mut total: i64 = 0;
    for mask in 0u32..(1 << primes.len()) {
        let mut e = 1u64;
        for (i, p) in primes.iter().enumerate() {
            if mask >> i & 1 == 1 {
                e *= p;
            }
        }
        let t = theta(n / e, interval) as i64;
        if mask.count_ones() % 2 == 0 {
            total += t;
        } else {
            total -= t;
        }
    }
    total as u64
}

/// Least n0 ≤ `upto` such that #(Q_n ∩ I) ≥ ½·φ(n)·λ(I) for every n in
/// [n0, upto], or `None` if it fails at `upto` itself.
pub fn niederreiter_threshold(sieve: &SieveTable, interval: &RationalInterval, upto: usize) -> Option<usize> {
    assert!(upto <= sieve.limit());
    let len = interval.length().to_rational();
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let factor = half * len;
    let (fnum, fden) = (factor.numer().to_i128()?, factor.denom().to_i128()?);
    let mut n0 = None;
    for n in (1..=upto).rev() {
        let count = sieve.farey_count(n, interval) as i128;
        if count * fden >= fnum * sieve.phi(n) as i128 {
            n0 = Some(n);
        } else {
            break;
        }
    }
    n0
}

/// Σ_{n ≤ n_max} n/φ(n) as an exact reduced rational.
///
/// Uses n/φ(n) = Σ_{d | n} μ²(d)/φ(d), so the sum is
/// Σ_{d squarefree} ⌊N/d⌋/φ(d), grouped by the value of φ(d).
pub fn totient_ratio_sum(n_max: usize) -> Result<Rational> {
    let sieve = build_sieve(n_max)?;
    Ok(totient_ratio_sum_with(&sieve, n_max))
}

pub fn totient_ratio_sum_with(sieve: &SieveTable, n_max: usize) -> Rational {
    assert!(n_max >= 1 && n_max <= sieve.limit());
    let mut by_phi = vec![0u64; n_max + 1];
    for d in 1..=n_max {
        if sieve.mu(d) != 0 {
            by_phi[sieve.phi(d) as usize] += (n_max / d) as u64;
        }
    }
    let terms: Vec<(u64, u64)> =
        by_phi.iter().enumerate().filter(|(_, &a)| a > 0).map(|(v, &a)| (a, v as u64)).collect();
    sum_fractions(&terms, |v| sieve.factorize(v as usize))
}

/// Exact Σ num_i/den_i for machine-word terms whose denominators can be
/// factored cheaply. Works with denominators as prime-exponent vectors so
/// that no big gcd is ever taken.
pub fn sum_fractions<F>(terms: &[(u64, u64)], factor: F) -> Rational
where
    F: Fn(u64) -> Vec<(u64, u32)>,
{
    let mut nodes: Vec<(BigUint, Vec<(u64, u32)>)> = terms
        .iter()
        .filter(|(a, _)| *a != 0)
        .map(|&(a, d)| {
            let g = a.gcd(&d);
            let (a, d) = (a / g, d / g);
            (BigUint::from(a), factor(d))
        })
        .collect();
    if nodes.is_empty() {
        return Rational::zero();
    }
    while nodes.len() > 1 {
        let mut next = Vec::with_capacity(nodes.len().div_ceil(2));
        let mut it = nodes.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(combine(a, b)),
                None => next.push(a),
            }
        }
        nodes = next;
    }
    let (num, exps) = nodes.pop().unwrap();
    let (num, exps) = cancel_common(num, exps);
    let den = prime_power_product(&exps);
    Rational::new_raw(BigInt::from(num), BigInt::from(den))
}

fn combine(a: (BigUint, Vec<(u64, u32)>), b: (BigUint, Vec<(u64, u32)>)) -> (BigUint, Vec<(u64, u32)>) {
    let (na, ea) = a;
    let (nb, eb) = b;
    let mut merged = Vec::with_capacity(ea.len() + eb.len());
    let mut lift_a = Vec::new();
    let mut lift_b = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < ea.len() || j < eb.len() {
        let pa = ea.get(i).map(|x| x.0).unwrap_or(u64::MAX);
        let pb = eb.get(j).map(|x| x.0).unwrap_or(u64::MAX);
        if pa < pb {
            merged.push(ea[i]);
            lift_b.push(ea[i]);
            i += 1;
        } else if pb < pa {
            merged.push(eb[j]);
            lift_a.push(eb[j]);
            j += 1;
        } else {
            let (x, y) = (ea[i].1, eb[j].1);
            merged.push((pa, x.max(y)));
            if y > x {
                lift_a.push((pa, y - x));
            } else if x > y {
                lift_b.push((pa, x - y));
            }
            i += 1;
            j += 1;
        }
    }
    let num = na * prime_power_product(&lift_a) + nb * prime_power_product(&lift_b);
    (num, merged)
}

fn prime_power_product(exps: &[(u64, u32)]) -> BigUint {
    let mut words: Vec<BigUint> = Vec::new();
    let mut acc: u64 = 1;
    for &(p, e) in exps {
        for _ in 0..e {
            match acc.checked_mul(p) {
                Some(v) => acc = v,
                None => {
                    words.push(BigUint::from(acc));
                    acc = p;
                }
            }
        }
    }
    words.push(BigUint::from(acc));
    while words.len() > 1 {
        let mut next = Vec::with_capacity(words.len().div_ceil(2));
        let mut it = words.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => a * b,
                None => a,
            });
        }
        words = next;
    }
    words.pop().unwrap()
}

/// Removes every prime of the denominator that also divides the numerator.
fn cancel_common(mut num: BigUint, exps: Vec<(u64, u32)>) -> (BigUint, Vec<(u64, u32)>) {
    if num.is_zero() {
        return (num, Vec::new());
    }
    let mut divisible = Vec::new();
    for chunk in exps.chunks(512) {
        let modulus = prime_power_product(&chunk.iter().map(|&(p, _)| (p, 1)).collect::<Vec<_>>());
        let r = &num % &modulus;
        for &(p, _) in chunk {
            if (&r % p).is_zero() {
                divisible.push(p);
            }
        }
    }
    let mut out = Vec::with_capacity(exps.len());
    for (p, mut e) in exps {
        if divisible.binary_search(&p).is_ok() {
            while e > 0 {
                let (q, r) = num.div_rem(&BigUint::from(p));
                if !r.is_zero() {
                    break;
                }
                num = q;
                e -= 1;
            }
        }
        if e > 0 {
            out.push((p, e));
        }
    }
    (num, out)
}

/// H_m = Σ_{i ≤ m} 1/i, exact.
pub fn harmonic(m: u64) -> Rational {
    let terms: Vec<(u64, u64)> = (1..=m).map(|i| (1, i)).collect();
    sum_fractions(&terms, factorize_u64)
}

/// An integer n with φ(n) < n/(e^γ·loglog n).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiWitness {
    pub n: u64,
    pub phi: u64,
    pub factorization: Vec<(u64, u32)>,
    pub squarefree: bool,
    pub primorial: bool,
}

/// Relative safety margin applied to the floating-point inequality.
pub const WITNESS_MARGIN: f64 = 1e-9;

fn is_witness(n: u64, phi: u64) -> bool {
    let lhs = phi as f64 * E_GAMMA * loglog(n as f64);
    lhs < n as f64 * (1.0 - WITNESS_MARGIN)
}

/// All n in [16, search_limit] satisfying φ(n) < n/(e^γ·loglog n), with
/// the primorials in range listed first.
pub fn phi_extremal_witness(search_limit: u64) -> Result<Vec<PhiWitness>> {
    if search_limit < 16 {
        return Ok(Vec::new());
    }
    let sieve = build_sieve(search_limit as usize)?;
    let make = |n: u64, primorial: bool| {
        let factorization = sieve.factorize(n as usize);
        let squarefree = factorization.iter().all(|f| f.1 == 1);
        PhiWitness { n, phi: sieve.phi(n as usize), factorization, squarefree, primorial }
    };
    let mut out = Vec::new();
    let mut primorials = Vec::new();
    let mut q = 1u64;
    for &p in sieve.primes() {
        match q.checked_mul(p as u64) {
            Some(v) if v <= search_limit => q = v,
            _ => break,
        }
        if q >= 16 && is_witness(q, sieve.phi(q as usize)) {
            primorials.push(q);
            out.push(make(q, true));
        }
    }
    for n in 16..=search_limit {
        if primorials.contains(&n) {
            continue;
        }
        if is_witness(n, sieve.phi(n as usize)) {
            out.push(make(n, false));
        }
    }
    Ok(out)
}

/// Σ_{d | n} φ(d) for n given by its factorization, from the sieve.
pub fn divisor_phi_sum(sieve: &SieveTable, n: usize) -> u64 {
    sieve.divisors(n).iter().map(|&d| sieve.phi(d as usize)).sum()
}

/// Σ_{d | K} φ(d) for K given as a smooth big-integer factorization.
pub fn divisor_phi_sum_big(factors: &[(BigUint, u32)]) -> BigUint {
    // multiplicative: Σ_{k ≤ e} φ(p^k) = p^e
    factors.iter().fold(BigUint::one(), |acc, (p, e)| acc * num_traits::pow(p.clone(), *e as usize))
}

/// Per-prime multiplicity map, for reports.
pub fn factorization_string(factors: &[(u64, u32)]) -> String {
    let m: BTreeMap<u64, u32> = factors.iter().copied().collect();
    m.iter().map(|(p, e)| if *e == 1 { p.to_string() } else { format!("{p}^{e}") }).collect::<Vec<_>>().join("*")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frac::{rat, Frac};
    use crate::numeric::{THREE_OVER_PI_SQ, TOTIENT_RATIO_MEAN};
    use proptest::prelude::*;

    fn brute_phi(n: u64) -> u64 {
        (1..=n).filter(|a| a.gcd(&n) == 1).count() as u64
    }

    fn brute_farey(n: u64, i: &RationalInterval) -> u64 {
        (1..=n).filter(|&a| a.gcd(&n) == 1 && i.contains_fraction(a, n)).count() as u64
    }

    fn brute_mu(n: u64) -> i8 {
        let f = factorize_u64(n);
        if f.iter().any(|x| x.1 > 1) {
            0
        } else if f.len().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    #[test]
    fn sieve_base_and_primes() {
        let s = build_sieve(1).unwrap();
        assert_eq!(&s.phi_slice()[1..], &[1]);
        assert_eq!(&s.mu_slice()[1..], &[1]);
        let s = build_sieve(100).unwrap();
        assert_eq!(s.phi(12), brute_phi(12));
        assert_eq!(s.phi(12), 4);
        assert_eq!((s.phi(97), s.mu(97)), (96, -1));
        for n in 1..=100u64 {
            assert_eq!(s.phi(n as usize), brute_phi(n));
            assert_eq!(s.mu(n as usize), brute_mu(n));
        }
    }

    #[test]
    fn sieve_rejects_zero_and_budget() {
        assert!(matches!(build_sieve(0), Err(Error::Input(_))));
        assert!(build_sieve_with_budget(1000, 100).unwrap_err().is_resource());
    }

    #[test]
    fn divisor_identity_to_ten_thousand() {
        let s = build_sieve(10_000).unwrap();
        for n in 1..=10_000 {
            assert_eq!(divisor_phi_sum(&s, n), n as u64);
        }
    }

    #[test]
    fn farey_examples() {
        let unit = RationalInterval::unit();
        assert_eq!(farey_count(5, &unit), 4);
        let half = RationalInterval::new(Frac::ZERO, Frac::new(1, 2)).unwrap();
        assert_eq!(farey_count(6, &half), 1);
        let s = build_sieve(300).unwrap();
        for n in 1..=300 {
            assert_eq!(farey_count(n as u64, &unit), s.phi(n));
        }
    }

    #[test]
    fn farey_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let s = build_sieve(2000).unwrap();
        let intervals: Vec<RationalInterval> = (0..100)
            .map(|_| {
                let d = rng.random_range(1..200i128);
                let a = rng.random_range(0..=d);
                let b = rng.random_range(a..=d);
                RationalInterval::new(Frac::new(a, d), Frac::new(b, d)).unwrap()
            })
            .collect();
        for n in (1..=2000).step_by(7) {
            for i in &intervals {
                assert_eq!(s.farey_count(n, i), brute_farey(n as u64, i), "n={n} I={i}");
            }
        }
    }

    #[test]
    fn average_order_of_phi() {
        let n = 1_000_000;
        let s = build_sieve(n).unwrap();
        let ratio = s.totient_sum(n) as f64 / (n as f64 * n as f64);
        assert!((ratio - THREE_OVER_PI_SQ).abs() < 1e-3, "{ratio}");
    }

    #[test]
    fn niederreiter_window() {
        let s = build_sieve(10_000).unwrap();
        let i = RationalInterval::parse("[1/3, 2/3]").unwrap();
        let n0 = niederreiter_threshold(&s, &i, 10_000).unwrap();
        assert!(n0 <= 100, "n0 = {n0}");
    }

    #[test]
    fn totient_ratio_small() {
        assert_eq!(totient_ratio_sum(1).unwrap(), rat(1, 1));
        assert_eq!(totient_ratio_sum(3).unwrap(), rat(9, 2));
        let direct: Rational = (1..=60i64).map(|n| rat(n, brute_phi(n as u64) as i64)).sum();
        assert_eq!(totient_ratio_sum(60).unwrap(), direct);
    }

    #[test]
    fn totient_ratio_mean_value() {
        use num_traits::ToPrimitive;
        let n = 1_000_000;
        let v = totient_ratio_sum(n).unwrap();
        let mean = (v / Rational::from_integer(BigInt::from(n))).to_f64().unwrap();
        assert!((mean - TOTIENT_RATIO_MEAN).abs() < 1e-3, "{mean}");
    }

    #[test]
    fn harmonic_numbers() {
        assert_eq!(harmonic(1), rat(1, 1));
        assert_eq!(harmonic(3), rat(11, 6));
        assert_eq!(harmonic(5), rat(137, 60));
    }

    #[test]
    fn phi_witnesses() {
        assert!(phi_extremal_witness(15).unwrap().is_empty());
        let w = phi_extremal_witness(100_000).unwrap();
        assert!(w.iter().any(|x| x.n == 30030 && x.primorial));
        for x in &w {
            assert!(is_witness(x.n, x.phi));
            assert_eq!(x.phi, brute_phi(x.n));
            let prod: u64 = x.factorization.iter().map(|(p, e)| p.pow(*e)).product();
            assert_eq!(prod, x.n);
        }
        let first_plain = w.iter().position(|x| !x.primorial).unwrap_or(w.len());
        assert!(w[..first_plain].iter().all(|x| x.primorial));
    }

    #[test]
    fn smooth_factorization_of_factorials() {
        let k = BigUint::from(120u32);
        let f = factorize_smooth(&k, 5).unwrap();
        assert_eq!(totient_from_factors(&f), BigUint::from(32u32));
        assert_eq!(divisor_phi_sum_big(&f), k);
        assert!(factorize_smooth(&BigUint::from(14u32), 5).is_none());
    }

    proptest! {
        #[test]
        fn sum_fractions_matches_naive(terms in proptest::collection::vec((0u64..1000, 1u64..5000), 0..40)) {
            let naive: Rational = terms.iter().map(|&(a, d)| rat(a as i64, d as i64)).sum();
            let fast = sum_fractions(&terms, factorize_u64);
            prop_assert_eq!(fast.numer(), naive.numer());
            prop_assert_eq!(fast.denom(), naive.denom());
        }

        #[test]
        fn divisor_enumeration(n in 1u64..5000) {
            let divs = divisors_from(&factorize_u64(n));
            let brute: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
            prop_assert_eq!(divs, brute);
        }
    }
}
