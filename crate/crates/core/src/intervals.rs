//! Exact Lebesgue measure of finite unions of open subintervals of [0,1].
//!
//! An [`IntervalSet`] is kept normalized: components sorted, pairwise
//! disjoint, and never abutting (abutting open intervals are merged, which
//! changes the set by single points only). Balls are clipped to [0,1]; there
//! is no wraparound.
//!
//! Large unions can instead be enclosed on a dyadic grid
//! ([`DyadicSet`]), which yields a certified `[lower, upper]` bracket of the
//! exact measure.

use crate::error::{Error, Result};
use crate::frac::{parse_rational, Frac, MeasureSum, Rational};
use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Zero};
use std::fmt;

/// Default component count above which exact materialization is refused.
pub const DEFAULT_COMPONENT_THRESHOLD: usize = 10_000_000;

/// Default dyadic resolution (grid step 2^-bits) for certified mode.
pub const DEFAULT_DYADIC_BITS: u32 = 48;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureMode {
    Exact,
    Certified,
}

impl MeasureMode {
    pub fn parse(s: &str) -> Result<MeasureMode> {
        match s.trim() {
            "exact" => Ok(MeasureMode::Exact),
            "certified" => Ok(MeasureMode::Certified),
            other => Err(Error::Input(format!("unknown mode {other:?} (exact|certified)"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MeasureMode::Exact => "exact",
            MeasureMode::Certified => "certified",
        }
    }
}

/// Engine settings shared by every measure computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EngineConfig {
    pub mode: MeasureMode,
    pub component_threshold: usize,
    pub dyadic_bits: u32,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            mode: MeasureMode::Exact,
            component_threshold: DEFAULT_COMPONENT_THRESHOLD,
            dyadic_bits: DEFAULT_DYADIC_BITS,
        }
    }
}

impl EngineConfig {
    pub fn certified() -> EngineConfig {
        EngineConfig { mode: MeasureMode::Certified, ..Default::default() }
    }
}

/// Either an exact value or a certified enclosure of it.
#[derive(Clone, Debug, PartialEq)]
pub enum MeasureValue {
    Exact(Rational),
    Bracket { lower: Rational, upper: Rational },
}

impl MeasureValue {
    pub fn lower(&self) -> &Rational {
        match self {
            MeasureValue::Exact(v) => v,
            MeasureValue::Bracket { lower, .. } => lower,
        }
    }

    pub fn upper(&self) -> &Rational {
        match self {
            MeasureValue::Exact(v) => v,
            MeasureValue::Bracket { upper, .. } => upper,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            MeasureValue::Exact(v) => Some(v),
            MeasureValue::Bracket { .. } => None,
        }
    }

    pub fn contains(&self, r: &Rational) -> bool {
        self.lower() <= r && r <= self.upper()
    }

    pub fn width(&self) -> Rational {
        self.upper() - self.lower()
    }

    pub fn midpoint_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        let m = (self.lower() + self.upper()) / Rational::from_integer(BigInt::from(2));
        m.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for MeasureValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureValue::Exact(v) => write!(f, "{v}"),
            MeasureValue::Bracket { lower, upper } => write!(f, "[{lower}, {upper}]"),
        }
    }
}

/// A closed interval [lo, hi] ⊆ [0,1] with rational endpoints, used for the
/// test intervals I of the counting statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RationalInterval {
    pub lo: Frac,
    pub hi: Frac,
}

impl RationalInterval {
    pub fn new(lo: Frac, hi: Frac) -> Result<RationalInterval> {
        if lo < Frac::ZERO || hi > Frac::ONE || lo > hi {
            return Err(Error::Input(format!("interval [{lo}, {hi}] is not inside [0,1]")));
        }
        Ok(RationalInterval { lo: lo.reduced(), hi: hi.reduced() })
    }

    pub fn unit() -> RationalInterval {
        RationalInterval { lo: Frac::ZERO, hi: Frac::ONE }
    }

    pub fn from_rationals(lo: &Rational, hi: &Rational) -> Result<RationalInterval> {
        RationalInterval::new(Frac::from_rational(lo)?, Frac::from_rational(hi)?)
    }

    /// Parse `"[1/3, 2/3]"` or `"1/3 2/3"`.
    pub fn parse(s: &str) -> Result<RationalInterval> {
        let t = s.trim().trim_start_matches('[').trim_end_matches(']');
        let parts: Vec<&str> = t.split([',', ' ']).filter(|p| !p.is_empty()).collect();
        if parts.len() != 2 {
            return Err(Error::Input(format!("expected two endpoints in interval {s:?}")));
        }
        RationalInterval::from_rationals(&parse_rational(parts[0])?, &parse_rational(parts[1])?)
    }

    /// Dyadic interval [p/2^s, (p+1)/2^s].
    pub fn dyadic(level: u32, index: u64) -> RationalInterval {
        let d = 1i128 << level;
        RationalInterval { lo: Frac::new(index as i128, d), hi: Frac::new(index as i128 + 1, d) }
    }

    /// All dyadic intervals with lengths 2^-min_level ..= 2^-max_level.
    pub fn dyadic_suite(min_level: u32, max_level: u32) -> Vec<RationalInterval> {
        let mut v = Vec::new();
        for s in min_level..=max_level {
            for p in 0..(1u64 << s) {
                v.push(RationalInterval::dyadic(s, p));
            }
        }
        v
    }

    pub fn length(&self) -> Frac {
        self.hi.checked_sub(self.lo).expect("interval length fits").reduced()
    }

    /// Whether a/n lies in [lo, hi].
    pub fn contains_fraction(&self, a: u64, n: u64) -> bool {
        let x = Frac::new(a as i128, n as i128);
        self.lo <= x && x <= self.hi
    }

    pub fn as_set(&self) -> IntervalSet {
        IntervalSet::from_sorted_components(vec![(self.lo, self.hi)])
    }
}

impl fmt::Display for RationalInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Normalized finite union of open subintervals of [0,1] with exact measure.
#[derive(Clone, Debug)]
pub struct IntervalSet {
    components: Vec<(Frac, Frac)>,
    measure: Rational,
}

impl PartialEq for IntervalSet {
    fn eq(&self, other: &IntervalSet) -> bool {
        self.components == other.components
    }
}

impl Default for IntervalSet {
    fn default() -> Self {
        IntervalSet::empty()
    }
}

impl IntervalSet {
    pub fn empty() -> IntervalSet {
        IntervalSet { components: Vec::new(), measure: Rational::zero() }
    }

    pub fn unit() -> IntervalSet {
        IntervalSet::from_sorted_components(vec![(Frac::ZERO, Frac::ONE)])
    }

    /// Normalizes arbitrary (possibly overlapping, unsorted) open intervals,
    /// clipping to [0,1] and dropping empty ones.
    pub fn from_intervals(mut raw: Vec<(Frac, Frac)>) -> IntervalSet {
        raw.retain(|(lo, hi)| lo < hi);
        raw.sort_by_key(|a| a.0);
        let clipped = raw.into_iter().filter_map(|(lo, hi)| {
            let lo = lo.max(Frac::ZERO);
            let hi = hi.min(Frac::ONE);
            (lo < hi).then_some((lo, hi))
        });
        IntervalSet::from_sorted_components(merge_sorted(clipped).collect())
    }

    fn from_sorted_components(components: Vec<(Frac, Frac)>) -> IntervalSet {
        let mut acc = MeasureSum::new();
        for (lo, hi) in &components {
            acc.add_len(*lo, *hi);
        }
        IntervalSet { components, measure: acc.total() }
    }

    /// Union of the balls (c - radius, c + radius) ∩ [0,1] over all centers.
    pub fn thicken(centers: &[Rational], radius: &Rational) -> Result<IntervalSet> {
        let r = Frac::from_rational(radius)?;
        let mut cs = Vec::with_capacity(centers.len());
        for c in centers {
            let f = Frac::from_rational(c)?;
            if f < Frac::ZERO || f > Frac::ONE {
                return Err(Error::Input(format!("center {c} outside [0,1]")));
            }
            cs.push(f);
        }
        thicken_fracs(cs, r)
    }

    pub fn components(&self) -> &[(Frac, Frac)] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn measure(&self) -> &Rational {
        &self.measure
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut merged = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.len() || j < other.len() {
            let take_left = j >= other.len() || (i < self.len() && self.components[i].0 <= other.components[j].0);
            if take_left {
                merged.push(self.components[i]);
                i += 1;
            } else {
                merged.push(other.components[j]);
                j += 1;
            }
        }
        IntervalSet::from_sorted_components(merge_sorted(merged.into_iter()).collect())
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.len() && j < other.len() {
            let (a_lo, a_hi) = self.components[i];
            let (b_lo, b_hi) = other.components[j];
            let lo = a_lo.max(b_lo);
            let hi = a_hi.min(b_hi);
            if lo < hi {
                out.push((lo, hi));
            }
            if a_hi < b_hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalSet::from_sorted_components(out)
    }

    /// Measure-theoretic containment: every component of `self` lies inside
    /// one component of `other`.
    pub fn is_subset_of(&self, other: &IntervalSet) -> bool {
        let mut j = 0;
        for (lo, hi) in &self.components {
            while j < other.len() && other.components[j].1 <= *lo {
                j += 1;
            }
            if j == other.len() {
                return false;
            }
            let (olo, ohi) = other.components[j];
            if !(olo <= *lo && *hi <= ohi) {
                return false;
            }
        }
        true
    }

    /// Outward or inward rounding to the dyadic grid of step 2^-bits.
    pub fn to_dyadic(&self, bits: u32, outward: bool) -> DyadicSet {
        DyadicSet::from_fracs(self.components.iter().copied(), bits, outward)
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (lo, hi)) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({lo}, {hi})")?;
        }
        write!(f, "}} measure {}", self.measure)
    }
}

/// Merges intervals sorted by left endpoint; overlapping or abutting
/// intervals are joined.
pub fn merge_sorted<I>(iter: I) -> impl Iterator<Item = (Frac, Frac)>
where
    I: Iterator<Item = (Frac, Frac)>,
{
    let mut iter = iter.peekable();
    std::iter::from_fn(move || {
        let (lo, mut hi) = iter.next()?;
        while let Some(&(nlo, nhi)) = iter.peek() {
            if nlo <= hi {
                if nhi > hi {
                    hi = nhi;
                }
                iter.next();
            } else {
                break;
            }
        }
        Some((lo, hi))
    })
}

pub(crate) fn thicken_fracs(mut centers: Vec<Frac>, r: Frac) -> Result<IntervalSet> {
    if r.is_negative() {
        return Err(Error::Input("negative radius".into()));
    }
    if r.is_zero() || centers.is_empty() {
        return Ok(IntervalSet::empty());
    }
    centers.sort();
    let mut raw = Vec::with_capacity(centers.len());
    for c in centers {
        let lo = c.try_sub(r)?.max(Frac::ZERO);
        let hi = c.try_add(r)?.min(Frac::ONE);
        if lo < hi {
            raw.push((lo, hi));
        }
    }
    Ok(IntervalSet::from_sorted_components(merge_sorted(raw.into_iter()).collect()))
}

/// One truncation layer A_n^P: balls of `radius` around a/n for a in
/// `numerators` ⊆ [n].
pub fn approx_set(n: u64, numerators: &[u64], radius: &Rational) -> Result<IntervalSet> {
    if n == 0 {
        return Err(Error::Input("denominator must be positive".into()));
    }
    if let Some(a) = numerators.iter().find(|&&a| a == 0 || a > n) {
        return Err(Error::Input(format!("numerator {a} outside [1, {n}]")));
    }
    let r = Frac::from_rational(radius)?;
    let centers = numerators.iter().map(|&a| Frac::new(a as i128, n as i128)).collect();
    thicken_fracs(centers, r)
}

/// λ(∪_{a∈[n]} B(a/n, radius) ∩ [0,1]) in closed form, valid for any size
/// of `n`.
pub fn full_residue_measure(n: &BigInt, radius: &Rational) -> Rational {
    assert!(n > &BigInt::zero(), "n must be positive");
    if radius <= &Rational::zero() {
        return Rational::zero();
    }
    let n_r = Rational::from_integer(n.clone());
    let two_r = radius * Rational::from_integer(BigInt::from(2));
    let inv_n = n_r.recip();
    if two_r < inv_n {
        &two_r * &n_r - radius
    } else {
        let v = Rational::one() - inv_n + radius;
        if v > Rational::one() {
            Rational::one()
        } else {
            v
        }
    }
}

/// Union of intervals on the dyadic grid of step 2^-bits, as integer grid
/// coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicSet {
    bits: u32,
    components: Vec<(u64, u64)>,
}

impl DyadicSet {
    /// Rounds each interval outward (`outward = true`, a superset) or inward
    /// (a subset) and merges. Input must be sorted by left endpoint.
    pub fn from_fracs<I>(iter: I, bits: u32, outward: bool) -> DyadicSet
    where
        I: Iterator<Item = (Frac, Frac)>,
    {
        assert!(bits <= 62, "dyadic resolution limited to 2^-62");
        let mut comps: Vec<(u64, u64)> = Vec::new();
        for (lo, hi) in iter {
            let (l, h) = if outward {
                (lo.floor_scaled_i128(bits), hi.ceil_scaled_i128(bits))
            } else {
                (lo.ceil_scaled_i128(bits), hi.floor_scaled_i128(bits))
            };
            let l = l.max(0) as u64;
            let h = h.min(1i128 << bits) as u64;
            if l >= h {
                continue;
            }
            match comps.last_mut() {
                Some(last) if l <= last.1 => last.1 = last.1.max(h),
                _ => comps.push((l, h)),
            }
        }
        DyadicSet { bits, components: comps }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn measure(&self) -> Rational {
        let total: u128 = self.components.iter().map(|(l, h)| (h - l) as u128).sum();
        Ratio::new(BigInt::from(total), BigInt::one() << self.bits)
    }

    /// Measure of the intersection with the grid-aligned closed interval.
    pub fn measure_within(&self, lo: u64, hi: u64) -> u128 {
        let start = self.components.partition_point(|c| c.1 <= lo);
        let mut total = 0u128;
        for &(l, h) in &self.components[start..] {
            if l >= hi {
                break;
            }
            total += (h.min(hi) - l.max(lo)) as u128;
        }
        total
    }
}

/// Certified bracket for a union of sorted intervals, rounding to the grid
/// in both directions.
pub fn certified_bracket(sorted: &[(Frac, Frac)], bits: u32) -> MeasureValue {
    let outer = DyadicSet::from_fracs(sorted.iter().copied(), bits, true);
    let inner = DyadicSet::from_fracs(sorted.iter().copied(), bits, false);
    MeasureValue::Bracket { lower: inner.measure(), upper: outer.measure() }
}

/// Streaming accumulator for the measure of a sorted sequence of
/// intervals, exact or as a dyadic bracket.
pub struct SweepAccumulator {
    mode: MeasureMode,
    bits: u32,
    exact: MeasureSum,
    current: Option<(Frac, Frac)>,
    inner: u128,
    outer: u128,
    outer_hi: i128,
    components: usize,
}

impl SweepAccumulator {
    pub fn new(cfg: &EngineConfig) -> SweepAccumulator {
        SweepAccumulator {
            mode: cfg.mode,
            bits: cfg.dyadic_bits,
            exact: MeasureSum::new(),
            current: None,
            inner: 0,
            outer: 0,
            outer_hi: i128::MIN,
            components: 0,
        }
    }

    /// Adds (lo, hi); intervals must arrive sorted by `lo`.
    pub fn push(&mut self, lo: Frac, hi: Frac) {
        if lo >= hi {
            return;
        }
        match &mut self.current {
            Some((_, chi)) if lo <= *chi => {
                if hi > *chi {
                    *chi = hi;
                }
            }
            _ => {
                if let Some((clo, chi)) = self.current.take() {
                    self.flush(clo, chi);
                }
                self.current = Some((lo, hi));
            }
        }
    }

    fn flush(&mut self, lo: Frac, hi: Frac) {
        self.components += 1;
        match self.mode {
            MeasureMode::Exact => self.exact.add_len(lo, hi),
            MeasureMode::Certified => {
                let (il, ih) = (lo.ceil_scaled_i128(self.bits), hi.floor_scaled_i128(self.bits));
                if ih > il {
                    self.inner += (ih - il) as u128;
                }
                let (ol, oh) = (lo.floor_scaled_i128(self.bits).max(self.outer_hi), hi.ceil_scaled_i128(self.bits));
                if oh > ol {
                    self.outer += (oh - ol) as u128;
                }
                self.outer_hi = self.outer_hi.max(oh);
            }
        }
    }

    /// Number of merged components and the measure of their union.
    pub fn finish(mut self) -> (usize, MeasureValue) {
        if let Some((lo, hi)) = self.current.take() {
            self.flush(lo, hi);
        }
        let value = match self.mode {
            MeasureMode::Exact => MeasureValue::Exact(self.exact.total()),
            MeasureMode::Certified => {
                let scale = BigInt::one() << self.bits;
                MeasureValue::Bracket {
                    lower: Ratio::new(BigInt::from(self.inner), scale.clone()),
                    upper: Ratio::new(BigInt::from(self.outer), scale),
                }
            }
        };
        (self.components, value)
    }
}

/// Fractions a/n with 32-bit parts, sorted by value. Ball unions around
/// them are measured by a sweep without materializing the union.
#[derive(Clone, Debug, Default)]
pub struct CenterSet {
    centers: Vec<(u32, u32)>,
}

fn cmp_center(x: &(u32, u32), y: &(u32, u32)) -> std::cmp::Ordering {
    (x.0 as u64 * y.1 as u64).cmp(&(y.0 as u64 * x.1 as u64))
}

impl CenterSet {
    pub fn new(mut centers: Vec<(u32, u32)>) -> CenterSet {
        centers.sort_unstable_by(cmp_center);
        CenterSet { centers }
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn as_slice(&self) -> &[(u32, u32)] {
        &self.centers
    }

    /// λ(window ∩ ∪ B(c, radius)) and the number of merged components.
    pub fn union_measure_within(
        &self,
        radius: Frac,
        window: &RationalInterval,
        cfg: &EngineConfig,
    ) -> Result<(usize, MeasureValue)> {
        if radius.is_negative() {
            return Err(Error::Input("negative radius".into()));
        }
        let r = radius.reduced();
        let (rn, rd) = (r.num(), r.den());
        let start_bound = window.lo.try_sub(r)?;
        let stop_bound = window.hi.try_add(r)?;
        let start = self.centers.partition_point(|&(a, n)| Frac::new(a as i128, n as i128) <= start_bound);
        let mut acc = SweepAccumulator::new(cfg);
        if r.is_zero() {
            return Ok(acc.finish());
        }
        for &(a, n) in &self.centers[start..] {
            let (a, n) = (a as i128, n as i128);
            if Frac::new(a, n) >= stop_bound {
                break;
            }
            let den = n * rd;
            let lo = Frac::new(a * rd - n * rn, den).max(window.lo);
            let hi = Frac::new(a * rd + n * rn, den).min(window.hi);
            acc.push(lo, hi);
        }
        Ok(acc.finish())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frac::rat;
    use proptest::prelude::*;

    fn f(a: i128, b: i128) -> Frac {
        Frac::new(a, b)
    }

    #[test]
    fn thicken_two_centers() {
        let s = IntervalSet::thicken(&[rat(1, 2), rat(1, 3)], &rat(1, 4)).unwrap();
        assert_eq!(s.components(), &[(f(1, 12), f(3, 4))]);
        assert_eq!(s.measure(), &rat(2, 3));
    }

    #[test]
    fn thicken_zero_radius_is_empty() {
        let s = IntervalSet::thicken(&[rat(1, 2)], &rat(0, 1)).unwrap();
        assert!(s.is_empty());
        assert_eq!(s.measure(), &rat(0, 1));
    }

    #[test]
    fn thicken_clips_at_one() {
        let s = IntervalSet::thicken(&[rat(1, 1)], &rat(1, 8)).unwrap();
        assert_eq!(s.components(), &[(f(7, 8), f(1, 1))]);
        assert_eq!(s.measure(), &rat(1, 8));
    }

    #[test]
    fn thicken_rejects_outside_centers() {
        assert!(IntervalSet::thicken(&[rat(3, 2)], &rat(1, 8)).is_err());
    }

    #[test]
    fn large_radius_caps_at_one() {
        let s = IntervalSet::thicken(&[rat(1, 2)], &rat(3, 4)).unwrap();
        assert_eq!(s.measure(), &rat(1, 1));
        let s = approx_set(3, &[1, 2, 3], &rat(1, 2)).unwrap();
        assert_eq!(s.measure(), &rat(1, 1));
    }

    #[test]
    fn approx_set_examples() {
        assert!(approx_set(5, &[], &rat(1, 3)).unwrap().is_empty());
        let s = approx_set(2, &[1, 2], &rat(1, 8)).unwrap();
        assert_eq!(s.measure(), &rat(3, 8));
        assert!(approx_set(4, &[5], &rat(1, 8)).is_err());
        assert!(approx_set(4, &[0], &rat(1, 8)).is_err());
    }

    #[test]
    fn full_residue_examples() {
        assert_eq!(full_residue_measure(&BigInt::from(2), &rat(1, 8)), rat(3, 8));
        assert_eq!(full_residue_measure(&BigInt::from(5), &rat(1, 10)), rat(9, 10));
        assert_eq!(full_residue_measure(&BigInt::from(7), &rat(0, 1)), rat(0, 1));
        assert_eq!(full_residue_measure(&BigInt::from(1), &rat(5, 1)), rat(1, 1));
    }

    #[test]
    fn measure_of_empty_and_identity_intersection() {
        assert_eq!(IntervalSet::empty().measure(), &rat(0, 1));
        let s = IntervalSet::thicken(&[rat(1, 5), rat(4, 5)], &rat(1, 20)).unwrap();
        assert_eq!(s.intersect(&IntervalSet::unit()), s);
    }

    #[test]
    fn abutting_components_merge() {
        let s = IntervalSet::from_intervals(vec![(f(0, 1), f(1, 4)), (f(1, 4), f(1, 2))]);
        assert_eq!(s.len(), 1);
        assert_eq!(s.measure(), &rat(1, 2));
    }

    #[test]
    fn subset_detection() {
        let big = IntervalSet::from_intervals(vec![(f(0, 1), f(1, 2)), (f(3, 4), f(1, 1))]);
        let small = IntervalSet::from_intervals(vec![(f(1, 8), f(1, 4)), (f(7, 8), f(1, 1))]);
        assert!(small.is_subset_of(&big));
        assert!(!big.is_subset_of(&small));
        let straddle = IntervalSet::from_intervals(vec![(f(1, 4), f(5, 8))]);
        assert!(!straddle.is_subset_of(&big));
    }

    #[test]
    fn dyadic_bracket_encloses_exact() {
        let s = IntervalSet::thicken(&[rat(1, 3), rat(5, 7)], &rat(1, 11)).unwrap();
        let b = certified_bracket(s.components(), 20);
        assert!(b.contains(s.measure()));
        assert!(b.width() <= rat(4, 1 << 20));
    }

    #[test]
    fn dyadic_suite_sizes() {
        let suite = RationalInterval::dyadic_suite(1, 4);
        assert_eq!(suite.len(), 2 + 4 + 8 + 16);
        assert_eq!(suite[0], RationalInterval::parse("[0, 1/2]").unwrap());
    }

    #[test]
    fn center_sweep_matches_thicken() {
        let pairs: Vec<(u32, u32)> = (1..=30u32).flat_map(|n| (1..=n).step_by(3).map(move |a| (a, n))).collect();
        let cs = CenterSet::new(pairs.clone());
        let r = Frac::new(1, 97);
        let rats: Vec<Rational> = pairs.iter().map(|&(a, n)| rat(a as i64, n as i64)).collect();
        let full = IntervalSet::thicken(&rats, &r.to_rational()).unwrap();
        for w in RationalInterval::dyadic_suite(0, 3) {
            let (_, exact) = cs.union_measure_within(r, &w, &EngineConfig::default()).unwrap();
            let expect = full.intersect(&w.as_set());
            assert_eq!(exact.exact().unwrap(), expect.measure());
            let (_, cert) = cs.union_measure_within(r, &w, &EngineConfig::certified()).unwrap();
            assert!(cert.contains(expect.measure()));
            assert!(
                cert.width()
                    <= rat(2 * expect.len() as i64 + 2, 1)
                        * Rational::new(BigInt::one(), BigInt::one() << DEFAULT_DYADIC_BITS)
            );
        }
    }

    fn arb_set() -> impl Strategy<Value = IntervalSet> {
        proptest::collection::vec((0i128..60, 1i128..20, 1i128..30), 0..12).prop_map(|v| {
            IntervalSet::from_intervals(
                v.into_iter().map(|(a, len, den)| (Frac::new(a, 60), Frac::new(a * den + len, 60 * den))).collect(),
            )
        })
    }

    proptest! {
        #[test]
        fn inclusion_exclusion(s1 in arb_set(), s2 in arb_set()) {
            let u = s1.union(&s2);
            let i = s1.intersect(&s2);
            prop_assert_eq!(u.measure() + i.measure(), s1.measure() + s2.measure());
            prop_assert!(i.is_subset_of(&s1) && i.is_subset_of(&s2));
            prop_assert!(s1.is_subset_of(&u));
            prop_assert!(i.measure() <= s1.measure() && s1.measure() <= u.measure());
        }

        #[test]
        fn union_bound(sets in proptest::collection::vec(arb_set(), 1..6)) {
            let mut u = IntervalSet::empty();
            let mut total = Rational::zero();
            for s in &sets {
                u = u.union(s);
                total += s.measure();
            }
            prop_assert!(u.measure() <= &total);
            prop_assert!(u.measure() <= &rat(1, 1));
        }

        #[test]
        fn normalized_invariants(s in arb_set()) {
            for w in s.components().windows(2) {
                prop_assert!(w[0].1 < w[1].0);
            }
            for (lo, hi) in s.components() {
                prop_assert!(Frac::ZERO <= *lo && lo < hi && *hi <= Frac::ONE);
            }
        }
    }
}
