//! Approximation functions Ψ, the series Σ f(n)Ψ(n), and the Catlin
//! transform Ψ̄(n) = max_k Ψ(kn).

use crate::error::{Error, Result};
use crate::frac::{parse_rational, sum_balanced, Rational};
use crate::model::CardinalityProfile;
use crate::numeric::{exp, f64_to_rational, ln, ln_big, Bracket};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Ψ as a closed-form family, a finite sparse table, or zero.
#[derive(Clone, Debug, PartialEq)]
pub enum PsiSpec {
    /// Ψ(n) = c / (n^alpha · (ln n)^beta)
    ClosedForm {
        c: Rational,
        alpha: Rational,
        beta: Rational,
        monotone: bool,
    },
    /// Ψ(k) = value for listed k, zero elsewhere.
    SparseMap(BTreeMap<BigUint, Rational>),
    Zero,
}

/// Points on which the monotone flag of a closed form is validated.
const MONOTONE_SAMPLES: u64 = 2000;

impl PsiSpec {
    /// A closed form; `monotone` is validated on n = 2..=2000.
    pub fn closed_form(c: Rational, alpha: Rational, beta: Rational, monotone: bool) -> Result<PsiSpec> {
        if !c.is_positive() {
            return Err(Error::Input(format!("closed-form constant c = {c} must be positive")));
        }
        let psi = PsiSpec::ClosedForm { c, alpha, beta, monotone };
        if monotone && !psi.sampled_nonincreasing(2, MONOTONE_SAMPLES) {
            return Err(Error::Validation(format!(
                "{psi} is flagged monotone but increases on [2, {MONOTONE_SAMPLES}]"
            )));
        }
        Ok(psi)
    }

    pub fn sparse(map: BTreeMap<BigUint, Rational>) -> Result<PsiSpec> {
        if let Some((k, v)) = map.iter().find(|(k, v)| k.is_zero() || v.is_negative()) {
            return Err(Error::Input(format!("sparse entry {k}:{v} must have positive key and nonnegative value")));
        }
        Ok(PsiSpec::SparseMap(map))
    }

    /// Parses `closed_form c=1 alpha=2 beta=1 [monotone=true]`,
    /// `sparse {6:1/12, 120:1/480}` or `zero`.
    pub fn parse(s: &str) -> Result<PsiSpec> {
        let s = s.trim();
        if s == "zero" {
            return Ok(PsiSpec::Zero);
        }
        if let Some(rest) = s.strip_prefix("closed_form") {
            let (mut c, mut alpha, mut beta) = (Rational::one(), Rational::one(), Rational::zero());
            let mut monotone = None;
            for tok in rest.split_whitespace() {
                let (k, v) = tok
                    .split_once('=')
                    .ok_or_else(|| Error::Input(format!("expected key=value in closed_form, got {tok:?}")))?;
                match k {
                    "c" => c = parse_rational(v)?,
                    "alpha" => alpha = parse_rational(v)?,
                    "beta" => beta = parse_rational(v)?,
                    "monotone" => monotone = Some(parse_bool(v)?),
                    _ => return Err(Error::Input(format!("unknown closed_form parameter {k:?}"))),
                }
            }
            let default_mono = alpha.is_positive() && !beta.is_negative();
            return PsiSpec::closed_form(c, alpha, beta, monotone.unwrap_or(default_mono));
        }
        if let Some(rest) = s.strip_prefix("sparse") {
            let inner = rest.trim().trim_start_matches('{').trim_end_matches('}');
            let mut map = BTreeMap::new();
            for entry in inner.split(',').map(str::trim).filter(|e| !e.is_empty()) {
                let (k, v) = entry
                    .split_once(':')
                    .ok_or_else(|| Error::Input(format!("expected key:value in sparse map, got {entry:?}")))?;
                let key: BigUint = k.trim().parse().map_err(|_| Error::Input(format!("bad sparse key {k:?}")))?;
                map.insert(key, parse_rational(v)?);
            }
            return PsiSpec::sparse(map);
        }
        Err(Error::Input(format!("unknown psi {s:?} (closed_form ... | sparse {{...}} | zero)")))
    }

    pub fn is_monotone(&self) -> bool {
        match self {
            PsiSpec::ClosedForm { monotone, .. } => *monotone,
            PsiSpec::Zero => true,
            PsiSpec::SparseMap(_) => false,
        }
    }

    /// Ψ(n) as a rational. Exact for sparse maps and for closed forms with
    /// integer alpha and beta = 0; otherwise within 1e-12 relative error,
    /// deterministically.
    pub fn eval(&self, n: &BigUint) -> Result<Rational> {
        if n.is_zero() {
            return Err(Error::Input("Ψ is defined on positive integers".into()));
        }
        match self {
            PsiSpec::Zero => Ok(Rational::zero()),
            PsiSpec::SparseMap(m) => Ok(m.get(n).cloned().unwrap_or_else(Rational::zero)),
            PsiSpec::ClosedForm { c, alpha, beta, .. } => {
                if !beta.is_zero() && n.is_one() {
                    return Err(Error::Domain("Ψ(1) is undefined when beta ≠ 0 (ln 1 = 0)".into()));
                }
                if beta.is_zero() && alpha.is_integer() {
                    let e = alpha.to_integer();
                    let nn = BigInt::from(n.clone());
                    let p = num_traits::pow(nn, e.abs().to_usize().expect("small exponent"));
                    let p = Rational::from_integer(p);
                    return Ok(if e.is_negative() { c * p } else { c / p });
                }
                Ok(f64_to_rational(self.eval_f64_big(n)))
            }
        }
    }

    pub fn eval_u64(&self, n: u64) -> Result<Rational> {
        self.eval(&BigUint::from(n))
    }

    fn eval_f64_big(&self, n: &BigUint) -> f64 {
        match self {
            PsiSpec::ClosedForm { c, alpha, beta, .. } => {
                let ln_n = ln_big(n);
                let a = alpha.to_f64().unwrap_or(f64::NAN);
                let b = beta.to_f64().unwrap_or(f64::NAN);
                let log_term = if b == 0.0 { 0.0 } else { b * ln(ln_n) };
                c.to_f64().unwrap_or(f64::NAN) * exp(-a * ln_n - log_term)
            }
            _ => self.eval(n).ok().and_then(|v| v.to_f64()).unwrap_or(0.0),
        }
    }

    /// Certified enclosure of the real value Ψ(n).
    pub fn eval_bracket(&self, n: &BigUint) -> Result<Bracket> {
        let v = self.eval(n)?;
        let exact = match self {
            PsiSpec::ClosedForm { alpha, beta, .. } => beta.is_zero() && alpha.is_integer(),
            _ => true,
        };
        let f = v.to_f64().unwrap_or(0.0);
        Ok(if exact { Bracket::from_rational(&v) } else { Bracket::around(f) })
    }

    fn sampled_nonincreasing(&self, from: u64, to: u64) -> bool {
        let mut prev: Option<Rational> = None;
        for n in from..=to {
            let Ok(v) = self.eval_u64(n) else { return false };
            if let Some(p) = &prev {
                if &v > p {
                    return false;
                }
            }
            prev = Some(v);
        }
        true
    }

    /// Keys of a sparse map in increasing order.
    pub fn support(&self) -> Vec<&BigUint> {
        match self {
            PsiSpec::SparseMap(m) => m.keys().collect(),
            _ => Vec::new(),
        }
    }
}

fn parse_bool(v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Input(format!("expected a boolean, got {v:?}"))),
    }
}

impl fmt::Display for PsiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PsiSpec::Zero => write!(f, "zero"),
            PsiSpec::ClosedForm { c, alpha, beta, monotone } => {
                write!(f, "closed_form c={c} alpha={alpha} beta={beta} monotone={monotone}")
            }
            PsiSpec::SparseMap(m) => {
                write!(f, "sparse {{")?;
                for (i, (k, v)) in m.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{k}:{v}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

/// Σ_{n ≤ N} f(n)·Ψ(n). Sparse maps sum over their support only; closed
/// forms with beta ≠ 0 start at n = 2.
pub fn series_partial(f: &CardinalityProfile, psi: &PsiSpec, n_max: &BigUint) -> Result<Rational> {
    match psi {
        PsiSpec::Zero => Ok(Rational::zero()),
        PsiSpec::SparseMap(m) => {
            let mut terms = Vec::new();
            for (k, v) in m.range(..=n_max.clone()) {
                let fk = f.eval_big(k)?;
                terms.push(Rational::from_integer(BigInt::from(fk)) * v);
            }
            Ok(sum_balanced(terms))
        }
        PsiSpec::ClosedForm { beta, .. } => {
            let n_max = n_max
                .to_u64()
                .ok_or_else(|| Error::Resource(format!("closed-form series to {n_max} is not enumerable")))?;
            let start = if beta.is_zero() { 1 } else { 2 };
            let fs = f.values(start - 1, n_max)?;
            let mut terms = Vec::with_capacity(fs.len());
            for (i, fv) in fs.into_iter().enumerate() {
                if fv > 0 {
                    terms.push(Rational::from_integer(BigInt::from(fv)) * psi.eval_u64(start + i as u64)?);
                }
            }
            Ok(sum_balanced(terms))
        }
    }
}

/// Upper limit on multipliers for the Catlin maximum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CatlinBound {
    /// Over the finite support (sparse maps) or k = 1 (monotone forms).
    Support,
    /// k ≤ bound.
    Finite(u64),
}

/// Ψ̄(n) with the multiplier attaining it.
#[derive(Clone, Debug, PartialEq)]
pub struct CatlinValue {
    pub value: Rational,
    /// Least k with Ψ(kn) = value, if the value is positive.
    pub multiplier: Option<BigUint>,
    /// False when only a lower bound over a finite range of k is known.
    pub exact: bool,
}

pub fn catlin_transform(psi: &PsiSpec, n: &BigUint, bound: CatlinBound) -> Result<CatlinValue> {
    if n.is_zero() {
        return Err(Error::Input("Ψ̄ is defined on positive integers".into()));
    }
    match psi {
        PsiSpec::Zero => Ok(CatlinValue { value: Rational::zero(), multiplier: None, exact: true }),
        PsiSpec::SparseMap(m) => {
            let mut best: Option<(Rational, BigUint)> = None;
            for (k, v) in m.iter() {
                if !v.is_positive() || !k.is_multiple_of(n) {
                    continue;
                }
                let mult = k / n;
                let better = match &best {
                    None => true,
                    Some((bv, bm)) => v > bv || (v == bv && &mult < bm),
                };
                if better {
                    best = Some((v.clone(), mult));
                }
            }
            Ok(match best {
                Some((value, k)) => CatlinValue { value, multiplier: Some(k), exact: true },
                None => CatlinValue { value: Rational::zero(), multiplier: None, exact: true },
            })
        }
        PsiSpec::ClosedForm { monotone: true, .. } => {
            let value = psi.eval(n)?;
            let multiplier = value.is_positive().then(BigUint::one);
            Ok(CatlinValue { value, multiplier, exact: true })
        }
        PsiSpec::ClosedForm { .. } => {
            let CatlinBound::Finite(kmax) = bound else {
                return Err(Error::Input("Ψ̄ of a non-monotone closed form needs a finite multiplier bound".into()));
            };
            let mut best = (Rational::zero(), None);
            for k in 1..=kmax.max(1) {
                let v = psi.eval(&(n * k))?;
                if v > best.0 {
                    best = (v, Some(BigUint::from(k)));
                }
            }
            Ok(CatlinValue { value: best.0, multiplier: best.1, exact: false })
        }
    }
}

/// Outcome of lifting one Ψ̄-approximation to a Ψ-approximation.
#[derive(Clone, Debug, PartialEq)]
pub struct Lift {
    pub a: BigUint,
    pub n: BigUint,
    pub k: BigUint,
    pub holds: bool,
}

/// If |x − a/n| < Ψ̄(n), checks |x − ka/(kn)| < Ψ(kn) for the multiplier k
/// realizing Ψ̄(n). `None` when (a, n) is not a Ψ̄-witness for x.
pub fn lift_witness(psi: &PsiSpec, x: &Rational, a: &BigUint, n: &BigUint) -> Result<Option<Lift>> {
    let bar = catlin_transform(psi, n, CatlinBound::Support)?;
    let Some(k) = bar.multiplier else { return Ok(None) };
    let dist =
        |num: &BigUint, den: &BigUint| (x - Rational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))).abs();
    if dist(a, n) >= bar.value {
        return Ok(None);
    }
    let (ka, kn) = (a * &k, n * &k);
    let holds = dist(&ka, &kn) < psi.eval(&kn)?;
    Ok(Some(Lift { a: a.clone(), n: n.clone(), k, holds }))
}

/// Summary of lifting every Ψ̄-witness among the given points and
/// denominators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftingReport {
    pub points: usize,
    pub denominators: usize,
    pub witnesses: usize,
    pub lifted: usize,
    pub pointwise_ok: bool,
}

/// For each point x and denominator n, tries the numerators nearest x·n.
/// Also checks Ψ(n) ≤ Ψ̄(n) on every denominator.
pub fn witness_lifting(psi: &PsiSpec, points: &[Rational], denominators: &[BigUint]) -> Result<LiftingReport> {
    let mut report = LiftingReport {
        points: points.len(),
        denominators: denominators.len(),
        witnesses: 0,
        lifted: 0,
        pointwise_ok: true,
    };
    for n in denominators {
        let bar = catlin_transform(psi, n, CatlinBound::Support)?;
        if psi.eval(n)? > bar.value {
            report.pointwise_ok = false;
        }
        if bar.multiplier.is_none() {
            continue;
        }
        let nr = BigInt::from(n.clone());
        for x in points {
            let base = (x * Rational::from_integer(nr.clone())).floor().to_integer();
            for delta in 0..=1i32 {
                let a = &base + delta;
                if a < BigInt::one() || a > nr {
                    continue;
                }
                let a = a.to_biguint().expect("positive");
                if let Some(l) = lift_witness(psi, x, &a, n)? {
                    report.witnesses += 1;
                    if l.holds {
                        report.lifted += 1;
                    }
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frac::rat;
    use proptest::prelude::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(PsiSpec::Zero.eval_u64(5).unwrap(), rat(0, 1));
        let s = PsiSpec::parse("sparse {6:1/12}").unwrap();
        assert_eq!(s.eval_u64(6).unwrap(), rat(1, 12));
        assert_eq!(s.eval_u64(7).unwrap(), rat(0, 1));
        let c = PsiSpec::parse("closed_form c=1 alpha=2 beta=0").unwrap();
        assert_eq!(c.eval_u64(10).unwrap(), rat(1, 100));
        let l = PsiSpec::parse("closed_form c=1 alpha=1 beta=1").unwrap();
        assert!(matches!(l.eval_u64(1), Err(Error::Domain(_))));
        let v = l.eval_u64(100).unwrap().to_f64().unwrap();
        let truth = 1.0 / (100.0 * 100f64.ln());
        assert!((v - truth).abs() <= 1e-12 * truth);
    }

    #[test]
    fn parse_errors_and_display_roundtrip() {
        assert!(PsiSpec::parse("closed_form c=1 gamma=2").is_err());
        assert!(PsiSpec::parse("sparse {x:1}").is_err());
        assert!(PsiSpec::parse("closed_form c=1 alpha=-1 monotone=true").is_err());
        let s = PsiSpec::parse("sparse {6:1/12, 120:1/480}").unwrap();
        assert_eq!(PsiSpec::parse(&s.to_string()).unwrap(), s);
    }

    #[test]
    fn series_examples() {
        let s = PsiSpec::parse("sparse {1:1, 2:1/2, 3:1/3, 4:1/4}").unwrap();
        assert_eq!(series_partial(&CardinalityProfile::Constant(1), &s, &big(4)).unwrap(), rat(25, 12));
        let c = PsiSpec::parse("closed_form c=1 alpha=2 beta=0").unwrap();
        assert_eq!(series_partial(&CardinalityProfile::Full, &c, &big(3)).unwrap(), rat(11, 6));
        let ce = PsiSpec::parse("sparse {6:1/12, 3:1/12, 2:1/12}").unwrap();
        assert_eq!(series_partial(&CardinalityProfile::Full, &ce, &big(6)).unwrap(), rat(11, 12));
    }

    #[test]
    fn catlin_examples() {
        let s = PsiSpec::parse("sparse {6:1/6}").unwrap();
        let v = catlin_transform(&s, &big(2), CatlinBound::Support).unwrap();
        assert_eq!(v.value, rat(1, 6));
        assert_eq!(v.multiplier, Some(big(3)));
        assert_eq!(catlin_transform(&s, &big(4), CatlinBound::Support).unwrap().value, rat(0, 1));
        let m = PsiSpec::parse("closed_form c=1 alpha=2").unwrap();
        let v = catlin_transform(&m, &big(7), CatlinBound::Support).unwrap();
        assert_eq!((v.value, v.multiplier, v.exact), (rat(1, 49), Some(big(1)), true));
        let up = PsiSpec::parse("closed_form c=1 alpha=-1 monotone=false").unwrap();
        let v = catlin_transform(&up, &big(3), CatlinBound::Finite(10)).unwrap();
        assert_eq!((v.value, v.exact), (rat(30, 1), false));
        assert!(catlin_transform(&up, &big(3), CatlinBound::Support).is_err());
    }

    #[test]
    fn catlin_ties_take_smallest_multiplier() {
        let s = PsiSpec::parse("sparse {6:1/6, 12:1/6}").unwrap();
        let v = catlin_transform(&s, &big(3), CatlinBound::Support).unwrap();
        assert_eq!(v.multiplier, Some(big(2)));
    }

    #[test]
    fn lifting_small_sparse() {
        let s = PsiSpec::parse("sparse {6:1/12, 3:1/12, 2:1/12}").unwrap();
        let points: Vec<Rational> = (0..50).map(|i| rat(i, 49)).collect();
        let dens: Vec<BigUint> = (1..=6).map(big).collect();
        let r = witness_lifting(&s, &points, &dens).unwrap();
        assert!(r.witnesses > 0);
        assert_eq!(r.witnesses, r.lifted);
        assert!(r.pointwise_ok);
    }

    proptest! {
        #[test]
        fn psi_below_catlin(entries in proptest::collection::btree_map(1u64..200, 1i64..50, 1..10), n in 1u64..200) {
            let map = entries.into_iter().map(|(k, v)| (big(k), rat(1, v))).collect();
            let s = PsiSpec::sparse(map).unwrap();
            let bar = catlin_transform(&s, &big(n), CatlinBound::Support).unwrap();
            prop_assert!(s.eval_u64(n).unwrap() <= bar.value);
        }

        #[test]
        fn series_monotone_in_n(n in 1u64..60) {
            let c = PsiSpec::parse("closed_form c=1 alpha=3/2 beta=1").unwrap();
            let a = series_partial(&CardinalityProfile::Phi, &c, &big(n)).unwrap();
            let b = series_partial(&CardinalityProfile::Phi, &c, &big(n + 1)).unwrap();
            prop_assert!(a <= b);
        }
    }
}
