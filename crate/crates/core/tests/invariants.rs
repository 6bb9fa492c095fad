//! Cross-module properties checked against small independent oracles.

use dlab_core::arith::farey_count;
use dlab_core::intervals::{approx_set, EngineConfig};
use dlab_core::model::{CardinalityProfile, NumeratorChoice};
use dlab_core::psi::{catlin_transform, series_partial, witness_lifting, CatlinBound, PsiSpec};
use dlab_core::ubiquity::truncated_limsup_measure;
use dlab_core::{IntervalSet, Rational, RationalInterval};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use proptest::prelude::*;
use std::collections::BTreeMap;

fn r(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Measure of a union of open intervals clipped to [0,1], by sorting the
/// endpoints and sweeping a coverage counter.
fn sweep_measure(intervals: &[(Rational, Rational)]) -> Rational {
    let mut events: Vec<(Rational, i32)> = Vec::new();
    for (a, b) in intervals {
        let a = a.clone().max(Rational::zero());
        let b = b.clone().min(Rational::one());
        if a < b {
            events.push((a, 1));
            events.push((b, -1));
        }
    }
    events.sort();
    let (mut depth, mut total, mut last) = (0, Rational::zero(), Rational::zero());
    for (x, d) in events {
        if depth > 0 {
            total += &x - &last;
        }
        depth += d;
        last = x;
    }
    total
}

fn balls(n: u64, numerators: &[u64], radius: &Rational) -> Vec<(Rational, Rational)> {
    numerators
        .iter()
        .map(|&a| {
            let c = r(a as i64, n as i64);
            (&c - radius, &c + radius)
        })
        .collect()
}

#[test]
fn farey_spacing_at_one_hundred() {
    let q = 100u64;
    let mut fracs: Vec<(u64, u64)> =
        (1..=q).flat_map(|n| (0..=n).filter(move |&a| gcd(a, n) == 1).map(move |a| (a, n))).collect();
    fracs.sort_by(|x, y| (x.0 * y.1).cmp(&(y.0 * x.1)));
    for w in fracs.windows(2) {
        let ((a, n), (b, m)) = (w[0], w[1]);
        // b/m − a/n = (bn − am)/(nm) ≥ 1/q²
        let gap_num = b * n - a * m;
        assert!(gap_num * q * q >= n * m, "{a}/{n} and {b}/{m}");
    }
    // 0/1 is the only listed fraction with a numerator outside [n]
    assert_eq!(fracs.len() as u64 - 1, (1..=q).map(|n| farey_count(n, &RationalInterval::unit())).sum::<u64>());
}

fn arb_layer() -> impl Strategy<Value = (u64, Vec<u64>, i64)> {
    (1u64..40).prop_flat_map(|n| {
        (Just(n), proptest::sample::subsequence((1..=n).collect::<Vec<_>>(), 0..=n as usize), 0i64..60)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn layers_match_sweep_and_union_bound(layers in proptest::collection::vec(arb_layer(), 1..6)) {
        let mut union = IntervalSet::empty();
        let mut sum = Rational::zero();
        let mut all = Vec::new();
        for (n, nums, j) in &layers {
            let radius = r(*j, 16 * (*n as i64) * (*n as i64));
            let s = approx_set(*n, nums, &radius).unwrap();
            let raw = balls(*n, nums, &radius);
            prop_assert_eq!(s.measure(), &sweep_measure(&raw));
            sum += s.measure();
            union = union.union(&s);
            all.extend(raw);
        }
        prop_assert_eq!(union.measure(), &sweep_measure(&all));
        prop_assert!(union.measure() <= &sum);
    }

    #[test]
    fn measure_is_monotone_under_inclusion((n, nums, j) in arb_layer(), extra in 1u64..40) {
        let radius = r(j, 8 * (n as i64) * (n as i64));
        let small = approx_set(n, &nums, &radius).unwrap();
        let other = approx_set(extra, &(1..=extra).collect::<Vec<_>>(), &r(1, 4 * extra as i64 * extra as i64)).unwrap();
        let big = small.union(&other);
        prop_assert!(small.is_subset_of(&big));
        prop_assert!(small.measure() <= big.measure());
        prop_assert!(small.intersect(&other).measure() <= small.measure());
    }

    #[test]
    fn series_partial_nondecreasing(cn in 1i64..5, an in 1i64..4, ad in 1i64..3, n in 1u64..300, step in 1u64..50) {
        let psi = PsiSpec::closed_form(r(cn, 1), r(an, ad), Rational::zero(), true).unwrap();
        for f in [CardinalityProfile::Full, CardinalityProfile::Phi, CardinalityProfile::Constant(2)] {
            let a = series_partial(&f, &psi, &BigUint::from(n)).unwrap();
            let b = series_partial(&f, &psi, &BigUint::from(n + step)).unwrap();
            prop_assert!(a <= b);
        }
    }

    #[test]
    fn truncated_measure_monotone(seed in 0u64..1000, n0 in 0u64..20, n1 in 21u64..60, more in 1u64..20) {
        let psi = PsiSpec::parse("closed_form c=1 alpha=2").unwrap();
        let choice = NumeratorChoice::new(CardinalityProfile::linear(r(1, 2)).unwrap(), seed);
        let cfg = EngineConfig::default();
        let base = truncated_limsup_measure(&choice, &psi, n0, n1, &cfg).unwrap();
        let longer = truncated_limsup_measure(&choice, &psi, n0, n1 + more, &cfg).unwrap();
        let later = truncated_limsup_measure(&choice, &psi, n0 + 1, n1, &cfg).unwrap();
        prop_assert!(base.value.upper() <= longer.value.lower());
        prop_assert!(later.value.upper() <= base.value.lower());
        prop_assert!(base.within_union_bound());
    }

    #[test]
    fn sparse_witnesses_lift(
        entries in proptest::collection::btree_map(1u64..120, 1i64..40, 1..8),
        points in proptest::collection::vec((0i64..=997, 997i64..=997), 1..40),
    ) {
        let map: BTreeMap<BigUint, Rational> =
            entries.iter().map(|(k, v)| (BigUint::from(*k), r(1, *v * (*k as i64)))).collect();
        let psi = PsiSpec::sparse(map).unwrap();
        let xs: Vec<Rational> = points.iter().map(|(a, d)| r(*a, *d)).collect();
        let dens: Vec<BigUint> = (1u64..=60).map(BigUint::from).collect();
        let rep = witness_lifting(&psi, &xs, &dens).unwrap();
        prop_assert!(rep.pointwise_ok);
        prop_assert_eq!(rep.lifted, rep.witnesses);
        for n in 1u64..=60 {
            let v = catlin_transform(&psi, &BigUint::from(n), CatlinBound::Support).unwrap();
            prop_assert!(psi.eval_u64(n).unwrap() <= v.value);
        }
    }
}
