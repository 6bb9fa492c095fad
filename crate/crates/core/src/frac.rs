//! Exact rationals with machine-word numerator and denominator.
//!
//! `Frac` is the endpoint type of the interval engine. Denominators are kept
//! unreduced so that every endpoint generated from one radius and one
//! denominator shares a denominator, which makes comparisons a single
//! integer compare. Arithmetic is checked; comparisons fall back to big
//! integers when cross-multiplication overflows.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

/// Exact big rational used for measures and reported values.
pub type Rational = BigRational;

/// Build a big rational from two machine integers.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parse `"a/b"`, `"a"` or a finite decimal like `"0.25"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Input(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Input(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.trim_start().starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let r = Rational::new(n, d);
        return Ok(if neg { -r } else { r });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

#[derive(Clone, Copy, Debug)]
pub struct Frac {
    num: i128,
    den: i128,
}

impl Frac {
    pub const ZERO: Frac = Frac { num: 0, den: 1 };
    pub const ONE: Frac = Frac { num: 1, den: 1 };

    /// `num/den`; the denominator must be nonzero. Not reduced.
    pub fn new(num: i128, den: i128) -> Frac {
        assert!(den != 0, "zero denominator");
        if den < 0 {
            Frac { num: -num, den: -den }
        } else {
            Frac { num, den }
        }
    }

    pub fn from_int(n: i128) -> Frac {
        Frac { num: n, den: 1 }
    }

    pub fn num(&self) -> i128 {
        self.num
    }

    pub fn den(&self) -> i128 {
        self.den
    }

    pub fn from_rational(r: &Rational) -> Result<Frac> {
        match (r.numer().to_i128(), r.denom().to_i128()) {
            (Some(n), Some(d)) => Ok(Frac::new(n, d)),
            _ => {
                Err(Error::Resource(format!("rational {r} exceeds the 128-bit endpoint range of the interval engine")))
            }
        }
    }

    pub fn to_rational(&self) -> Rational {
        Rational::new(BigInt::from(self.num), BigInt::from(self.den))
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn reduced(self) -> Frac {
        let g = self.num.gcd(&self.den);
        if g <= 1 {
            self
        } else {
            Frac { num: self.num / g, den: self.den / g }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn is_negative(&self) -> bool {
        self.num < 0
    }

    fn add_impl(self, o: Frac, sign: i128) -> Option<Frac> {
        if self.den == o.den {
            let n = self.num.checked_add(sign.checked_mul(o.num)?)?;
            return Some(Frac { num: n, den: self.den });
        }
        let g = self.den.gcd(&o.den);
        let l = (self.den / g).checked_mul(o.den)?;
        let a = self.num.checked_mul(l / self.den)?;
        let b = o.num.checked_mul(l / o.den)?.checked_mul(sign)?;
        Some(Frac { num: a.checked_add(b)?, den: l })
    }

    pub fn checked_add(self, o: Frac) -> Option<Frac> {
        self.add_impl(o, 1).or_else(|| self.reduced().add_impl(o.reduced(), 1))
    }

    pub fn checked_sub(self, o: Frac) -> Option<Frac> {
        self.add_impl(o, -1).or_else(|| self.reduced().add_impl(o.reduced(), -1))
    }

    pub fn try_add(self, o: Frac) -> Result<Frac> {
        self.checked_add(o).ok_or_else(|| overflow(self, o))
    }

    pub fn try_sub(self, o: Frac) -> Result<Frac> {
        self.checked_sub(o).ok_or_else(|| overflow(self, o))
    }

    pub fn min(self, o: Frac) -> Frac {
        if o < self {
            o
        } else {
            self
        }
    }

    pub fn max(self, o: Frac) -> Frac {
        if o > self {
            o
        } else {
            self
        }
    }

    /// floor(self · 2^bits)
    pub fn floor_scaled(&self, bits: u32) -> BigInt {
        let n = BigInt::from(self.num) << bits;
        n.div_floor(&BigInt::from(self.den))
    }

    /// ceil(self · 2^bits)
    pub fn ceil_scaled(&self, bits: u32) -> BigInt {
        let n = BigInt::from(self.num) << bits;
        -((-n).div_floor(&BigInt::from(self.den)))
    }

    /// floor(self · 2^bits) in machine arithmetic when it fits.
    pub fn floor_scaled_i128(&self, bits: u32) -> i128 {
        match self.num.checked_mul(1i128 << bits) {
            Some(n) => n.div_euclid(self.den),
            None => self.floor_scaled(bits).to_i128().expect("grid index fits in i128"),
        }
    }

    /// floor(self · d)
    pub fn floor_times(&self, d: u64) -> i128 {
        match self.num.checked_mul(d as i128) {
            Some(n) => n.div_euclid(self.den),
            None => (BigInt::from(self.num) * BigInt::from(d))
                .div_floor(&BigInt::from(self.den))
                .to_i128()
                .expect("scaled value fits in i128"),
        }
    }

    /// ceil(self · d)
    pub fn ceil_times(&self, d: u64) -> i128 {
        -Frac::new(-self.num, self.den).floor_times(d)
    }

    pub fn ceil_scaled_i128(&self, bits: u32) -> i128 {
        match self.num.checked_mul(1i128 << bits) {
            Some(n) => -((-n).div_euclid(self.den)),
            None => self.ceil_scaled(bits).to_i128().expect("grid index fits in i128"),
        }
    }
}

fn overflow(a: Frac, b: Frac) -> Error {
    Error::Resource(format!("endpoint arithmetic overflow combining {a} and {b}"))
}

impl fmt::Display for Frac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.reduced();
        if r.den == 1 {
            write!(f, "{}", r.num)
        } else {
            write!(f, "{}/{}", r.num, r.den)
        }
    }
}

impl Ord for Frac {
    fn cmp(&self, other: &Frac) -> Ordering {
        if self.den == other.den {
            return self.num.cmp(&other.num);
        }
        if let (Some(a), Some(b)) = (self.num.checked_mul(other.den), other.num.checked_mul(self.den)) {
            return a.cmp(&b);
        }
        let (x, y) = (self.to_f64(), other.to_f64());
        let scale = x.abs().max(y.abs());
        if (x - y).abs() > 1e-9 * scale {
            return x.partial_cmp(&y).expect("finite");
        }
        let a = BigInt::from(self.num) * BigInt::from(other.den);
        let b = BigInt::from(other.num) * BigInt::from(self.den);
        a.cmp(&b)
    }
}

impl PartialOrd for Frac {
    fn partial_cmp(&self, other: &Frac) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Frac {
    fn eq(&self, other: &Frac) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Frac {}

/// Exact accumulator for sums of many `Frac`s with few distinct
/// denominators. Numerators are summed per denominator in machine words and
/// combined into one big rational only at the end.
#[derive(Default, Debug, Clone)]
pub struct MeasureSum {
    buckets: HashMap<i128, i128>,
    spill: Rational,
}

impl MeasureSum {
    pub fn new() -> MeasureSum {
        MeasureSum { buckets: HashMap::new(), spill: Rational::zero() }
    }

    pub fn add(&mut self, f: Frac) {
        self.push(f.num, f.den);
    }

    pub fn sub(&mut self, f: Frac) {
        match f.num.checked_neg() {
            Some(n) => self.push(n, f.den),
            None => self.spill -= f.to_rational(),
        }
    }

    /// Adds `hi - lo`.
    pub fn add_len(&mut self, lo: Frac, hi: Frac) {
        self.add(hi);
        self.sub(lo);
    }

    fn push(&mut self, num: i128, den: i128) {
        let slot = self.buckets.entry(den).or_insert(0);
        match slot.checked_add(num) {
            Some(v) => *slot = v,
            None => {
                self.spill += Rational::new(BigInt::from(*slot), BigInt::from(den));
                self.spill += Rational::new(BigInt::from(num), BigInt::from(den));
                *slot = 0;
            }
        }
    }

    pub fn merge(&mut self, other: MeasureSum) {
        for (den, num) in other.buckets {
            self.push(num, den);
        }
        self.spill += other.spill;
    }

    pub fn total(&self) -> Rational {
        let mut terms: Vec<Rational> = self
            .buckets
            .iter()
            .filter(|(_, n)| **n != 0)
            .map(|(d, n)| Rational::new(BigInt::from(*n), BigInt::from(*d)))
            .collect();
        terms.push(self.spill.clone());
        sum_balanced(terms)
    }
}

/// Sum of rationals by pairwise (balanced) reduction, which keeps
/// intermediate denominators small compared to a left fold.
pub fn sum_balanced(mut terms: Vec<Rational>) -> Rational {
    if terms.is_empty() {
        return Rational::zero();
    }
    while terms.len() > 1 {
        let mut next = Vec::with_capacity(terms.len().div_ceil(2));
        let mut it = terms.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a + b),
                None => next.push(a),
            }
        }
        terms = next;
    }
    terms.pop().unwrap()
}

/// min(a, b) for rationals.
pub fn rmin(a: Rational, b: Rational) -> Rational {
    if a <= b {
        a
    } else {
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse_rational(" 7 ").unwrap(), rat(7, 1));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), rat(-3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1.").is_err());
    }

    #[test]
    fn unreduced_compare_equal() {
        assert_eq!(Frac::new(1, 2), Frac::new(3, 6));
        assert!(Frac::new(1, 3) < Frac::new(1, 2));
        assert!(Frac::new(-1, 3) < Frac::ZERO);
        assert_eq!(Frac::new(2, -4), Frac::new(-1, 2));
    }

    #[test]
    fn big_fallback_compare() {
        let a = Frac::new(i128::MAX / 3, i128::MAX / 2);
        let b = Frac::new(i128::MAX / 3 - 1, i128::MAX / 2);
        assert!(b < a);
        let c = Frac::new(2, 3);
        assert_eq!(a.cmp(&c), a.to_rational().cmp(&c.to_rational()));
    }

    #[test]
    fn measure_sum_spills_exactly() {
        let mut m = MeasureSum::new();
        let big = Frac::new(i128::MAX / 2 + 7, 3);
        m.add(big);
        m.add(big);
        m.add(big);
        let expect = big.to_rational() * rat(3, 1);
        assert_eq!(m.total(), expect);
    }

    proptest! {
        #[test]
        fn ordering_matches_big_rationals(a in -1000i64..1000, b in 1i64..1000, c in -1000i64..1000, d in 1i64..1000) {
            let x = Frac::new(a as i128, b as i128);
            let y = Frac::new(c as i128, d as i128);
            prop_assert_eq!(x.cmp(&y), rat(a, b).cmp(&rat(c, d)));
            prop_assert_eq!(x.checked_add(y).unwrap().to_rational(), rat(a, b) + rat(c, d));
            prop_assert_eq!(x.checked_sub(y).unwrap().to_rational(), rat(a, b) - rat(c, d));
        }

        #[test]
        fn scaled_floor_ceil(a in 0i64..10_000, b in 1i64..10_000, bits in 0u32..40) {
            let x = Frac::new(a as i128, b as i128);
            let scaled = rat(a, b) * Rational::from_integer(BigInt::from(1u64 << bits));
            prop_assert_eq!(BigInt::from(x.floor_scaled_i128(bits)), scaled.floor().to_integer());
            prop_assert_eq!(BigInt::from(x.ceil_scaled_i128(bits)), scaled.ceil().to_integer());
        }
    }
}
