//! Random numerator models: cardinality profiles f, counter-based random
//! streams, the uniform m-subset sampler, the coin-flip uniform subset
//! model, and exact hypergeometric moments.

use crate::arith::{build_sieve, factorize_smooth, factorize_u64, totient_from_factors};
use crate::error::{Error, Result};
use crate::frac::{parse_rational, Rational};
use crate::numeric::{f64_to_rational, loglog, loglog_big, Tau};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Trial-division bound used to evaluate φ at big keys.
pub const PHI_FACTOR_BUDGET: u64 = 1_000_000;

/// "Sweet spot" profile: large on a sparse key set, of
/// order n/loglog n elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct SweetSpot {
    pub keys: BTreeSet<BigUint>,
    pub tau: Tau,
    pub off_support: Rational,
}

impl SweetSpot {
    fn eval_big(&self, n: &BigUint) -> BigUint {
        let q = if self.keys.contains(n) {
            // upper end of the certified bracket, so the floor
            // f(n) ≥ n/(τ(n) loglog n) holds for the true real value
            f64_to_rational(self.tau.inv_tau_loglog(n).hi)
        } else {
            &self.off_support / f64_to_rational(loglog_big(n))
        };
        let v = (Rational::from_integer(BigInt::from(n.clone())) * q).ceil().to_integer();
        let v = v.to_biguint().unwrap_or_default();
        v.min(n.clone())
    }
}

/// The sequence f(n), 0 ≤ f(n) ≤ n.
#[derive(Clone, Debug, PartialEq)]
pub enum CardinalityProfile {
    Full,
    /// f(n) = min(c, n)
    Constant(u64),
    /// f(n) = ⌈p·n/q⌉ with 0 ≤ p/q ≤ 1
    Linear(Rational),
    Phi,
    /// Listed values, zero elsewhere.
    Explicit(BTreeMap<u64, u64>),
    SweetSpot(SweetSpot),
}

impl CardinalityProfile {
    pub fn linear(r: Rational) -> Result<CardinalityProfile> {
        if r < Rational::zero() || r > Rational::one() {
            return Err(Error::Input(format!("linear profile slope {r} must lie in [0,1]")));
        }
        Ok(CardinalityProfile::Linear(r))
    }

    pub fn explicit(map: BTreeMap<u64, u64>) -> Result<CardinalityProfile> {
        if let Some((n, f)) = map.iter().find(|(n, f)| **n == 0 || f > n) {
            return Err(Error::Validation(format!("explicit profile has f({n}) = {f} outside [0, n]")));
        }
        Ok(CardinalityProfile::Explicit(map))
    }

    /// Parses `full`, `constant 3`, `linear 1/2`, `phi`, `explicit file=path`
    /// or `explicit {1:1, 4:2}`.
    pub fn parse(s: &str) -> Result<CardinalityProfile> {
        let s = s.trim();
        let (head, rest) = s.split_once(char::is_whitespace).unwrap_or((s, ""));
        let rest = rest.trim();
        match head {
            "full" => Ok(CardinalityProfile::Full),
            "phi" => Ok(CardinalityProfile::Phi),
            "zero" => Ok(CardinalityProfile::Constant(0)),
            "constant" => rest
                .parse()
                .map(CardinalityProfile::Constant)
                .map_err(|_| Error::Input(format!("constant profile needs an integer, got {rest:?}"))),
            "linear" => CardinalityProfile::linear(parse_rational(rest)?),
            "explicit" => {
                if let Some(path) = rest.strip_prefix("file=") {
                    let text = std::fs::read_to_string(path.trim())
                        .map_err(|e| Error::Input(format!("cannot read profile file {path}: {e}")))?;
                    CardinalityProfile::explicit(parse_pairs(&text)?)
                } else {
                    let inner = rest.trim_start_matches('{').trim_end_matches('}');
                    CardinalityProfile::explicit(parse_pairs(&inner.replace(',', "\n"))?)
                }
            }
            _ => Err(Error::Input(format!(
                "unknown profile {s:?} (full | constant c | linear p/q | phi | explicit ...)"
            ))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            CardinalityProfile::Full => "full".into(),
            CardinalityProfile::Constant(c) => format!("constant {c}"),
            CardinalityProfile::Linear(r) => format!("linear {r}"),
            CardinalityProfile::Phi => "phi".into(),
            CardinalityProfile::Explicit(m) => format!("explicit ({} entries)", m.len()),
            CardinalityProfile::SweetSpot(s) => {
                format!("sweet-spot tau={} C={} ({} keys)", s.tau.name(), s.off_support, s.keys.len())
            }
        }
    }

    pub fn eval(&self, n: u64) -> u64 {
        assert!(n >= 1, "profile argument must be positive");
        match self {
            CardinalityProfile::Full => n,
            CardinalityProfile::Constant(c) => (*c).min(n),
            CardinalityProfile::Linear(r) => ceil_times(r, n),
            CardinalityProfile::Phi => factorize_u64(n).iter().map(|&(p, e)| p.pow(e - 1) * (p - 1)).product(),
            CardinalityProfile::Explicit(m) => m.get(&n).copied().unwrap_or(0),
            CardinalityProfile::SweetSpot(s) => s.eval_big(&BigUint::from(n)).to_u64().expect("f(n) ≤ n"),
        }
    }

    /// f at an arbitrary-precision argument.
    pub fn eval_big(&self, n: &BigUint) -> Result<BigUint> {
        if n.is_zero() {
            return Err(Error::Input("profile argument must be positive".into()));
        }
        if let Some(small) = n.to_u64() {
            if !matches!(self, CardinalityProfile::Phi) || small <= PHI_FACTOR_BUDGET * PHI_FACTOR_BUDGET {
                return Ok(BigUint::from(self.eval(small)));
            }
        }
        Ok(match self {
            CardinalityProfile::Full => n.clone(),
            CardinalityProfile::Constant(c) => BigUint::from(*c),
            CardinalityProfile::Linear(r) => {
                let v = (r * Rational::from_integer(BigInt::from(n.clone()))).ceil().to_integer();
                v.to_biguint().expect("nonnegative")
            }
            CardinalityProfile::Phi => {
                let f = factorize_smooth(n, PHI_FACTOR_BUDGET).ok_or_else(|| {
                    Error::Resource(format!("cannot factor {n} with primes up to {PHI_FACTOR_BUDGET}"))
                })?;
                totient_from_factors(&f)
            }
            CardinalityProfile::Explicit(_) => BigUint::zero(),
            CardinalityProfile::SweetSpot(s) => s.eval_big(n),
        })
    }

    /// f(n) for n in (lo, hi], using a sieve for the totient profile.
    pub fn values(&self, lo: u64, hi: u64) -> Result<Vec<u64>> {
        if hi <= lo {
            return Ok(Vec::new());
        }
        if matches!(self, CardinalityProfile::Phi) {
            let sieve = build_sieve(hi as usize)?;
            return Ok(sieve.phi_slice()[lo as usize + 1..=hi as usize].iter().map(|&v| v as u64).collect());
        }
        Ok((lo + 1..=hi).map(|n| self.eval(n)).collect())
    }
}

impl fmt::Display for CardinalityProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

fn ceil_times(r: &Rational, n: u64) -> u64 {
    let v = (r * Rational::from_integer(BigInt::from(n))).ceil().to_integer();
    v.to_u64().expect("ceil(r n) ≤ n")
}

fn parse_pairs(text: &str) -> Result<BTreeMap<u64, u64>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split([':', ' ', '\t', ',']).filter(|p| !p.is_empty()).collect();
        let bad = || Error::Input(format!("line {}: expected `n f`, got {line:?}", i + 1));
        if parts.len() != 2 {
            return Err(bad());
        }
        let n = parts[0].parse().map_err(|_| bad())?;
        let f = parts[1].parse().map_err(|_| bad())?;
        map.insert(n, f);
    }
    Ok(map)
}

/// Stream domains. Distinct experiments never share a key.
pub mod domain {
    pub const NUMERATORS: u64 = 1;
    pub const UNIFORM_SUBSETS: u64 = 2;
    pub const BINOMIAL: u64 = 3;
    pub const SAMPLE_POINTS: u64 = 4;
    pub const SAMPLER_CHECK: u64 = 5;
}

/// Key of a counter-based random stream: `(master_seed, domain, trial)`
/// fixes the generator seed and `n` selects the stream within it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StreamKey {
    pub master_seed: u64,
    pub domain: u64,
    pub trial: u64,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl StreamKey {
    pub fn new(master_seed: u64, domain: u64, trial: u64) -> StreamKey {
        StreamKey { master_seed, domain, trial }
    }

    pub fn seed_bytes(&self) -> [u8; 32] {
        let mut state = self.master_seed;
        let mut out = [0u8; 32];
        let words = [
            splitmix64(&mut state),
            splitmix64(&mut state) ^ self.domain.wrapping_mul(0xD6E8_FEB8_6659_FD93),
            splitmix64(&mut state) ^ self.trial.wrapping_mul(0xA076_1D64_78BD_642F),
            splitmix64(&mut state),
        ];
        for (i, w) in words.iter().enumerate() {
            out[8 * i..8 * i + 8].copy_from_slice(&w.to_le_bytes());
        }
        out
    }

    /// The generator for index `n`.
    pub fn stream(&self, n: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.seed_bytes());
        rng.set_stream(n);
        rng
    }
}

/// Uniform m-subset of [n], sorted. Every m-subset has probability exactly
/// 1/C(n,m) given uniform words from the stream.
pub fn sample_subset<R: Rng>(n: u64, m: u64, rng: &mut R) -> Result<Vec<u64>> {
    if n == 0 {
        return Err(Error::Input("n must be positive".into()));
    }
    if m > n {
        return Err(Error::Input(format!("subset size {m} exceeds n = {n}")));
    }
    let mut out = Vec::with_capacity(m as usize);
    for_each_selected(n, m, rng, |a| out.push(a));
    Ok(out)
}

/// Sequential selection sampling: element a is taken with probability
/// (m − chosen)/(n − a + 1), decided by an exact uniform integer draw.
/// Sparse draws (m < n/8) use Floyd's algorithm instead.
pub fn for_each_selected<R: Rng, F: FnMut(u64)>(n: u64, m: u64, rng: &mut R, mut f: F) {
    debug_assert!(m <= n);
    if m == n {
        (1..=n).for_each(f);
        return;
    }
    if m < n / 8 {
        // Floyd: m draws instead of a pass over [n]
        let mut chosen = std::collections::HashSet::with_capacity(m as usize);
        for j in n - m + 1..=n {
            let t = rng.random_range(1..=j);
            if !chosen.insert(t) {
                chosen.insert(j);
            }
        }
        let mut v: Vec<u64> = chosen.into_iter().collect();
        v.sort_unstable();
        v.into_iter().for_each(f);
        return;
    }
    let mut need = m;
    if n <= u32::MAX as u64 {
        let n32 = n as u32;
        let mut need32 = need as u32;
        for a in 1..=n32 {
            if need32 == 0 {
                return;
            }
            let remaining = n32 - a + 1;
            if need32 == remaining || rng.random_range(0..remaining) < need32 {
                f(a as u64);
                need32 -= 1;
            }
        }
        return;
    }
    for a in 1..=n {
        if need == 0 {
            return;
        }
        let remaining = n - a + 1;
        if need == remaining || rng.random_range(0..remaining) < need {
            f(a);
            need -= 1;
        }
    }
}

/// Uniform random subset of [n] by independent fair coins, sorted.
pub fn sample_uniform_subset<R: RngCore>(n: u64, rng: &mut R) -> Vec<u64> {
    let mut out = Vec::new();
    let mut a = 1;
    while a <= n {
        let word = rng.next_u64();
        let take = (n - a + 1).min(64);
        for b in 0..take {
            if word >> b & 1 == 1 {
                out.push(a + b);
            }
        }
        a += take;
    }
    out
}

/// #P_n under the uniform-subset model: a Binomial(n, 1/2) draw.
pub fn sample_binomial_half<R: RngCore>(n: u64, rng: &mut R) -> u64 {
    let mut count = 0u64;
    let mut left = n;
    while left > 0 {
        let take = left.min(64);
        let word = rng.next_u64();
        let mask = if take == 64 { u64::MAX } else { (1u64 << take) - 1 };
        count += (word & mask).count_ones() as u64;
        left -= take;
    }
    count
}

/// How P_n is drawn.
#[derive(Clone, Debug, PartialEq)]
pub enum ChoiceModel {
    /// Uniform f(n)-subset.
    Profile(CardinalityProfile),
    /// Uniform over all subsets of [n].
    UniformSubsets,
}

/// A realized P = (P_n), determined by the model and the stream key.
/// P_n is materialized on demand; distinct n use distinct streams.
#[derive(Clone, Debug)]
pub struct NumeratorChoice {
    pub model: ChoiceModel,
    pub key: StreamKey,
}

impl NumeratorChoice {
    pub fn new(profile: CardinalityProfile, master_seed: u64) -> NumeratorChoice {
        NumeratorChoice {
            model: ChoiceModel::Profile(profile),
            key: StreamKey::new(master_seed, domain::NUMERATORS, 0),
        }
    }

    pub fn uniform(master_seed: u64) -> NumeratorChoice {
        NumeratorChoice {
            model: ChoiceModel::UniformSubsets,
            key: StreamKey::new(master_seed, domain::UNIFORM_SUBSETS, 0),
        }
    }

    pub fn with_trial(mut self, trial: u64) -> NumeratorChoice {
        self.key.trial = trial;
        self
    }

    pub fn profile(&self) -> Option<&CardinalityProfile> {
        match &self.model {
            ChoiceModel::Profile(p) => Some(p),
            ChoiceModel::UniformSubsets => None,
        }
    }

    pub fn subset(&self, n: u64) -> Vec<u64> {
        match &self.model {
            ChoiceModel::Profile(p) => self.subset_of_size(n, p.eval(n)),
            ChoiceModel::UniformSubsets => sample_uniform_subset(n, &mut self.key.stream(n)),
        }
    }

    /// P_n when f(n) = m is already known.
    pub fn subset_of_size(&self, n: u64, m: u64) -> Vec<u64> {
        let mut out = Vec::with_capacity(m as usize);
        self.for_each_of_size(n, m, |a| out.push(a));
        out
    }

    pub fn for_each_of_size<F: FnMut(u64)>(&self, n: u64, m: u64, f: F) {
        for_each_selected(n, m, &mut self.key.stream(n), f)
    }

    /// P_n for n in (lo, hi].
    pub fn materialize(&self, lo: u64, hi: u64) -> BTreeMap<u64, Vec<u64>> {
        (lo + 1..=hi).map(|n| (n, self.subset(n))).collect()
    }
}

/// Mean mD/n and variance bound mD(n−D)/n² of the hypergeometric count of
/// distinguished elements in a uniform m-subset of an n-set with D
/// distinguished.
pub fn hypergeometric_moments(n: u64, m: u64, d: u64) -> Result<(Rational, Rational)> {
    if n == 0 || m > n || d > n {
        return Err(Error::Input(format!("hypergeometric parameters out of range: n={n} m={m} D={d}")));
    }
    let (n, m, d) = (BigInt::from(n), BigInt::from(m), BigInt::from(d));
    let mean = Rational::new(&m * &d, n.clone());
    let var = Rational::new(&m * &d * (&n - &d), &n * &n);
    Ok((mean, var))
}

/// Exact hypergeometric variance mD(n−D)(n−m)/(n²(n−1)).
pub fn hypergeometric_variance(n: u64, m: u64, d: u64) -> Rational {
    if n <= 1 {
        return Rational::zero();
    }
    let (n, m, d) = (BigInt::from(n), BigInt::from(m), BigInt::from(d));
    Rational::new(&m * &d * (&n - &d) * (&n - &m), &n * &n * (&n - 1))
}

/// One draw of X_N = Σ_{n ≤ N} #P_n under the uniform-subset model.
#[derive(Clone, Debug, PartialEq)]
pub struct BinomialTrial {
    pub n_max: u64,
    pub x: u64,
    pub expected: Rational,
    pub passed: bool,
}

pub fn binomial_concentration_trial(n_max: u64, key: StreamKey) -> BinomialTrial {
    let mut x = 0u64;
    for n in 1..=n_max {
        x += sample_binomial_half(n, &mut key.stream(n));
    }
    let expected = binomial_expectation(n_max);
    let passed = Rational::from_integer(BigInt::from(2 * x)) >= expected;
    BinomialTrial { n_max, x, expected, passed }
}

/// 𝔼 X_N = N(N+1)/4.
pub fn binomial_expectation(n_max: u64) -> Rational {
    Rational::new(BigInt::from(n_max) * BigInt::from(n_max + 1), BigInt::from(4))
}

/// σ²(X_N) = Σ n/4 = N(N+1)/8.
pub fn binomial_variance(n_max: u64) -> Rational {
    Rational::new(BigInt::from(n_max) * BigInt::from(n_max + 1), BigInt::from(8))
}

/// Chebyshev bound 4σ²/𝔼² on P(X_N < 𝔼/2).
pub fn binomial_chebyshev_bound(n_max: u64) -> Rational {
    let e = binomial_expectation(n_max);
    Rational::from_integer(BigInt::from(4)) * binomial_variance(n_max) / (&e * &e)
}

/// 1 − m/n ≤ (1 − 1/n)^m, exactly.
pub fn elementary_inequality(n: u64, m: u64) -> bool {
    let n_r = Rational::from_integer(BigInt::from(n));
    let lhs = Rational::one() - Rational::from_integer(BigInt::from(m)) / &n_r;
    let rhs = num_traits::pow(Rational::one() - n_r.recip(), m as usize);
    lhs <= rhs
}

/// C(n, k) as a big integer.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// f(n)/n · loglog n; used by reports on sweet-spot profiles.
pub fn density_times_loglog(f: u64, n: u64) -> f64 {
    f as f64 / n as f64 * loglog(n as f64)
}
