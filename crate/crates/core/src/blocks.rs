//! Block schemes N_t = k^t with exact block sums F_t, the ubiquity
//! function ρ = 1/F_t, and windowed checks of average-order conditions.

use crate::arith::{build_sieve, sum_fractions, SieveTable};
use crate::error::{Error, Result};
use crate::frac::Rational;
use crate::model::CardinalityProfile;
use num_bigint::BigInt;
use num_traits::{One, Signed};
use std::fmt;

/// Largest number of profile values a scheme will hold.
pub const MAX_SCHEME_SPAN: u64 = 500_000_000;

#[derive(Clone, Debug)]
pub struct BlockScheme {
    profile: CardinalityProfile,
    base: Option<u64>,
    t_min: u32,
    /// N_t for t = t_min ..= t_max + 1
    cuts: Vec<u64>,
    block_sums: Vec<u128>,
    /// f(n) for n ∈ (N_{t_min}, N_{t_max + 1}]
    values: Vec<u64>,
}

impl BlockScheme {
    /// Geometric scheme N_t = k^t over t ∈ [t_min, t_max].
    pub fn build(profile: CardinalityProfile, k: u64, t_min: u32, t_max: u32) -> Result<BlockScheme> {
        if k < 2 {
            return Err(Error::Input(format!("block base k = {k} must be at least 2")));
        }
        if t_max < t_min {
            return Err(Error::Input(format!("empty t-range [{t_min}, {t_max}]")));
        }
        let mut cuts = Vec::new();
        for t in t_min..=t_max + 1 {
            let n = k.checked_pow(t).ok_or_else(|| Error::Resource(format!("cut point {k}^{t} exceeds 64 bits")))?;
            cuts.push(n);
        }
        let mut s = BlockScheme::from_cuts(profile, cuts, t_min)?;
        s.base = Some(k);
        Ok(s)
    }

    /// Scheme over a user-supplied strictly increasing list of cut points,
    /// indexed from `t_min`.
    pub fn from_cuts(profile: CardinalityProfile, cuts: Vec<u64>, t_min: u32) -> Result<BlockScheme> {
        if cuts.len() < 2 || cuts.windows(2).any(|w| w[0] >= w[1]) || cuts[0] == 0 {
            return Err(Error::Input("cut points must be positive, strictly increasing, at least two".into()));
        }
        let (lo, hi) = (cuts[0], *cuts.last().unwrap());
        if hi - lo > MAX_SCHEME_SPAN {
            return Err(Error::Resource(format!("scheme spans {} integers, limit {MAX_SCHEME_SPAN}", hi - lo)));
        }
        let values = profile.values(lo, hi)?;
        let mut block_sums = Vec::with_capacity(cuts.len() - 1);
        for (i, w) in cuts.windows(2).enumerate() {
            let s: u128 = values[(w[0] - lo) as usize..(w[1] - lo) as usize].iter().map(|&v| v as u128).sum();
            if s == 0 {
                return Err(Error::DegenerateBlock { t: t_min + i as u32 });
            }
            block_sums.push(s);
        }
        Ok(BlockScheme { profile, base: None, t_min, cuts, block_sums, values })
    }

    pub fn profile(&self) -> &CardinalityProfile {
        &self.profile
    }

    pub fn base(&self) -> Option<u64> {
        self.base
    }

    pub fn t_min(&self) -> u32 {
        self.t_min
    }

    pub fn t_max(&self) -> u32 {
        self.t_min + self.block_sums.len() as u32 - 1
    }

    pub fn t_range(&self) -> std::ops::RangeInclusive<u32> {
        self.t_min..=self.t_max()
    }

    fn idx(&self, t: u32) -> usize {
        assert!(self.t_range().contains(&t), "t = {t} outside scheme range");
        (t - self.t_min) as usize
    }

    /// N_t
    pub fn cut(&self, t: u32) -> u64 {
        self.cuts[self.idx(t)]
    }

    /// N_{t+1}
    pub fn next_cut(&self, t: u32) -> u64 {
        self.cuts[self.idx(t) + 1]
    }

    /// F_t
    pub fn block_sum(&self, t: u32) -> u128 {
        self.block_sums[self.idx(t)]
    }

    /// f(n) for n ∈ (N_t, N_{t+1}], starting at n = N_t + 1.
    pub fn block_values(&self, t: u32) -> &[u64] {
        let lo = (self.cut(t) - self.cuts[0]) as usize;
        let hi = (self.next_cut(t) - self.cuts[0]) as usize;
        &self.values[lo..hi]
    }

    pub fn f(&self, n: u64) -> u64 {
        let (lo, hi) = (self.cuts[0], *self.cuts.last().unwrap());
        assert!(n > lo && n <= hi, "n = {n} outside scheme");
        self.values[(n - lo - 1) as usize]
    }

    /// ρ for block t: 1/F_t.
    pub fn radius(&self, t: u32) -> Rational {
        Rational::new(BigInt::one(), BigInt::from(self.block_sum(t)))
    }

    /// ρ(n) = 1/F_t for n ∈ (N_t, N_{t+1}].
    pub fn rho(&self, n: u64) -> Option<Rational> {
        self.t_range().find(|&t| n > self.cut(t) && n <= self.next_cut(t)).map(|t| self.radius(t))
    }

    /// Σ_{n∈(N_t,N_{t+1}]} f(n)φ(n)/n, exact.
    pub fn sum_f_phi_over_n(&self, t: u32, sieve: &SieveTable) -> Rational {
        let start = self.cut(t) + 1;
        let terms: Vec<(u64, u64)> = self
            .block_values(t)
            .iter()
            .enumerate()
            .map(|(i, &f)| {
                let n = start + i as u64;
                (f * sieve.phi(n as usize), n)
            })
            .collect();
        sum_fractions(&terms, |d| sieve.factorize(d as usize))
    }

    pub fn sieve(&self) -> Result<SieveTable> {
        build_sieve(*self.cuts.last().unwrap() as usize)
    }
}

/// One t of a windowed check.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowRow {
    pub t: u32,
    pub values: Vec<Rational>,
    pub holds: bool,
}

/// Result of checking an inequality over the tested t-window: the least t
/// from which it holds through the end of the window, plus every row.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowReport {
    pub check: &'static str,
    pub columns: Vec<&'static str>,
    pub constants: Vec<(&'static str, Rational)>,
    pub rows: Vec<WindowRow>,
    pub holds_from: Option<u32>,
}

impl WindowReport {
    fn new(
        check: &'static str,
        columns: Vec<&'static str>,
        constants: Vec<(&'static str, Rational)>,
        rows: Vec<WindowRow>,
    ) -> WindowReport {
        let mut holds_from = None;
        for r in rows.iter().rev() {
            if r.holds {
                holds_from = Some(r.t);
            } else {
                break;
            }
        }
        WindowReport { check, columns, constants, rows, holds_from }
    }

    pub fn holds_throughout(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }
}

impl fmt::Display for WindowReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.check)?;
        for (k, v) in &self.constants {
            write!(f, " {k}={v}")?;
        }
        match self.holds_from {
            Some(t) => write!(f, ": holds from t = {t}"),
            None => write!(f, ": does not hold at the end of the window"),
        }
    }
}

fn int(v: u128) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// F_t ≥ a·N_{t+1}².
pub fn classify_linear(scheme: &BlockScheme, a: &Rational) -> WindowReport {
    let rows = scheme
        .t_range()
        .map(|t| {
            let n1 = scheme.next_cut(t) as u128;
            let ratio = int(scheme.block_sum(t)) / int(n1 * n1);
            let holds = &ratio >= a;
            WindowRow { t, values: vec![ratio], holds }
        })
        .collect();
    WindowReport::new("linear-on-average", vec!["F_t/N_{t+1}^2"], vec![("a", a.clone())], rows)
}

/// c1·N_{t+1} ≤ F_t ≤ c2·N_t.
pub fn classify_bounded(scheme: &BlockScheme, c1: &Rational, c2: &Rational) -> WindowReport {
    let rows = scheme
        .t_range()
        .map(|t| {
            let f = int(scheme.block_sum(t));
            let lower = &f / int(scheme.next_cut(t) as u128);
            let upper = &f / int(scheme.cut(t) as u128);
            let holds = &lower >= c1 && &upper <= c2;
            WindowRow { t, values: vec![lower, upper], holds }
        })
        .collect();
    WindowReport::new(
        "bounded-on-average",
        vec!["F_t/N_{t+1}", "F_t/N_t"],
        vec![("c1", c1.clone()), ("c2", c2.clone())],
        rows,
    )
}

/// F_t ≤ λ·F_{t+1}; the last t of the window has no successor and is
/// not tested.
pub fn check_regularity(scheme: &BlockScheme, lambda: &Rational) -> WindowReport {
    let rows = scheme
        .t_range()
        .take_while(|&t| t < scheme.t_max())
        .map(|t| {
            let ratio = int(scheme.block_sum(t)) / int(scheme.block_sum(t + 1));
            let holds = &ratio <= lambda;
            WindowRow { t, values: vec![ratio], holds }
        })
        .collect();
    WindowReport::new("regularity", vec!["F_t/F_{t+1}"], vec![("lambda", lambda.clone())], rows)
}

/// Σ f(n)φ(n)/n ≥ c·F_t per block.
pub fn check_sum_f_phi(scheme: &BlockScheme, c: &Rational) -> Result<WindowReport> {
    let sieve = scheme.sieve()?;
    let rows = scheme
        .t_range()
        .map(|t| {
            let ratio = scheme.sum_f_phi_over_n(t, &sieve) / int(scheme.block_sum(t));
            let holds = &ratio >= c;
            WindowRow { t, values: vec![ratio], holds }
        })
        .collect();
    Ok(WindowReport::new("sum-f-phi", vec!["sum f phi/n / F_t"], vec![("c", c.clone())], rows))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseMode {
    Linear,
    Bounded,
}

/// Least block base for which the proof inequalities hold: in linear mode
/// a/2 − 1/(2k²) ≥ a/4 and a/(4k²) < 1; in bounded mode k > b/a and
/// a − b/k ≥ a/2.
pub fn suggest_base(a: &Rational, b: &Rational, mode: BaseMode) -> Result<u64> {
    if !a.is_positive() {
        return Err(Error::Input(format!("a = {a} must be positive")));
    }
    let two = int(2);
    let four = int(4);
    match mode {
        BaseMode::Linear => {
            let mut k = 2u64;
            loop {
                let kk = int(k as u128 * k as u128);
                let lhs = a / &two - (&two * &kk).recip();
                if lhs >= a / &four && a / (&four * &kk) < Rational::one() {
                    return Ok(k);
                }
                k += 1;
            }
        }
        BaseMode::Bounded => {
            if b <= a {
                return Err(Error::Input(format!("bounded mode needs a < b, got a={a} b={b}")));
            }
            let mut k = (b / a).floor().to_integer().try_into().unwrap_or(u64::MAX - 1) + 1;
            loop {
                let kr = int(k as u128);
                if a - b / &kr >= a / &two {
                    return Ok(k);
                }
                k += 1;
            }
        }
    }
}

/// The counting step inside the norm comparison: if every x_i² ≤ c1·d and
/// |x|² ≥ c2·d², then x has at least (c2/c1)·d nonzero entries. Returns
/// `None` when the hypotheses fail.
pub fn norm_comparison(x: &[i64], c1: &Rational, c2: &Rational) -> Option<bool> {
    let d = int(x.len() as u128);
    let sq = |v: i64| int((v as i128 * v as i128) as u128);
    if x.iter().any(|&v| sq(v) > c1 * &d) {
        return None;
    }
    let norm2: Rational = x.iter().map(|&v| sq(v)).sum();
    if norm2 < c2 * &d * &d {
        return None;
    }
    let nonzero = int(x.iter().filter(|&&v| v != 0).count() as u128);
    Some(nonzero >= c2 / c1 * d)
}

/// Σ_t F_t over the window, for the telescoping check.
pub fn total_block_sum(scheme: &BlockScheme) -> u128 {
    scheme.t_range().map(|t| scheme.block_sum(t)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frac::rat;
    use crate::numeric::THREE_OVER_PI_SQ;
    use num_traits::ToPrimitive;
    use proptest::prelude::*;

    #[test]
    fn block_sums_closed_forms() {
        let s = BlockScheme::build(CardinalityProfile::Constant(1), 2, 0, 12).unwrap();
        for t in s.t_range() {
            assert_eq!(s.block_sum(t), 1u128 << t);
        }
        let s = BlockScheme::build(CardinalityProfile::Full, 2, 0, 12).unwrap();
        for t in s.t_range() {
            assert_eq!(s.block_sum(t), (3 * (1u128 << (2 * t)) + (1u128 << t)) / 2);
        }
    }

    #[test]
    fn phi_block_mean_value() {
        let s = BlockScheme::build(CardinalityProfile::Phi, 2, 10, 10).unwrap();
        let (n0, n1) = (s.cut(10) as f64, s.next_cut(10) as f64);
        let expect = THREE_OVER_PI_SQ * (n1 * n1 - n0 * n0);
        let got = s.block_sum(10) as f64;
        assert!((got - expect).abs() / expect < 0.05);
    }

    #[test]
    fn degenerate_block_rejected() {
        let e = BlockScheme::build(CardinalityProfile::Constant(0), 2, 3, 5).unwrap_err();
        assert_eq!(e, Error::DegenerateBlock { t: 3 });
        assert!(BlockScheme::build(CardinalityProfile::Full, 1, 0, 3).is_err());
    }

    #[test]
    fn linear_classification() {
        let full = BlockScheme::build(CardinalityProfile::Full, 2, 0, 14).unwrap();
        let r = classify_linear(&full, &rat(1, 4));
        assert_eq!(r.holds_from, Some(0));
        let last = r.rows.last().unwrap().values[0].to_f64().unwrap();
        assert!((last - 0.375).abs() < 1e-3);
        let one = BlockScheme::build(CardinalityProfile::Constant(1), 2, 0, 14).unwrap();
        assert_eq!(classify_linear(&one, &rat(1, 4)).holds_from, None);
        let phi = BlockScheme::build(CardinalityProfile::Phi, 4, 2, 9).unwrap();
        assert_eq!(classify_linear(&phi, &rat(1, 10)).holds_from, Some(2));
    }

    #[test]
    fn bounded_classification() {
        let one = BlockScheme::build(CardinalityProfile::Constant(1), 2, 0, 14).unwrap();
        assert_eq!(classify_bounded(&one, &rat(1, 2), &rat(1, 1)).holds_from, Some(0));
        let full = BlockScheme::build(CardinalityProfile::Full, 2, 0, 14).unwrap();
        assert_eq!(classify_bounded(&full, &rat(1, 2), &rat(100, 1)).holds_from, None);
        let three = BlockScheme::build(CardinalityProfile::Constant(3), 2, 2, 10).unwrap();
        for t in three.t_range() {
            assert_eq!(three.block_sum(t), 3u128 << t);
        }
        assert_eq!(classify_bounded(&three, &rat(3, 2), &rat(3, 1)).holds_from, Some(2));
    }

    #[test]
    fn regularity() {
        let full = BlockScheme::build(CardinalityProfile::Full, 2, 0, 12).unwrap();
        assert_eq!(check_regularity(&full, &rat(1, 2)).holds_from, Some(0));
        let one = BlockScheme::build(CardinalityProfile::Constant(1), 2, 0, 12).unwrap();
        assert_eq!(check_regularity(&one, &rat(3, 4)).holds_from, Some(0));
        let flat = BlockScheme::from_cuts(CardinalityProfile::Constant(1), vec![1, 5, 9, 13], 0).unwrap();
        assert_eq!(check_regularity(&flat, &rat(1, 2)).holds_from, None);
    }

    #[test]
    fn base_suggestions() {
        assert_eq!(suggest_base(&rat(1, 1), &rat(0, 1), BaseMode::Linear).unwrap(), 2);
        assert_eq!(suggest_base(&rat(2, 1), &rat(0, 1), BaseMode::Linear).unwrap(), 2);
        assert_eq!(suggest_base(&rat(1, 1), &rat(3, 1), BaseMode::Bounded).unwrap(), 6);
        assert!(suggest_base(&rat(1, 100), &rat(0, 1), BaseMode::Linear).unwrap() >= 15);
    }

    #[test]
    fn sum_f_phi_constant() {
        for p in [CardinalityProfile::Full, CardinalityProfile::Phi] {
            let s = BlockScheme::build(p, 2, 5, 12).unwrap();
            let r = check_sum_f_phi(&s, &rat(3, 10)).unwrap();
            assert!(r.holds_throughout(), "{r}");
        }
    }

    #[test]
    fn telescoping() {
        let s = BlockScheme::build(CardinalityProfile::Phi, 3, 1, 8).unwrap();
        let direct: u128 = (s.cut(1) + 1..=s.next_cut(8)).map(|n| CardinalityProfile::Phi.eval(n) as u128).sum();
        assert_eq!(total_block_sum(&s), direct);
        assert_eq!(s.rho(s.cut(4) + 1).unwrap(), s.radius(4));
    }

    #[test]
    fn norm_comparison_exhaustive_small() {
        // all vectors with entries in {-2..2} for d ≤ 6, a grid of constants
        for d in 1..=6usize {
            let total = 5usize.pow(d as u32);
            for code in 0..total {
                let mut c = code;
                let x: Vec<i64> = (0..d)
                    .map(|_| {
                        let v = (c % 5) as i64 - 2;
                        c /= 5;
                        v
                    })
                    .collect();
                for (c1, c2) in [(rat(1, 1), rat(1, 4)), (rat(4, 1), rat(1, 2)), (rat(2, 3), rat(1, 5))] {
                    if let Some(ok) = norm_comparison(&x, &c1, &c2) {
                        assert!(ok, "x={x:?}");
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn norm_comparison_random(x in proptest::collection::vec(-6i64..=6, 1..=20), c1n in 1i64..40, c2n in 1i64..40) {
            let c1 = rat(c1n, 4);
            let c2 = rat(c2n, 40);
            if let Some(ok) = norm_comparison(&x, &c1, &c2) {
                prop_assert!(ok);
            }
        }
    }
}
