//! The sparse counterexample Ψ built from factorial blocks K_j = M_j!,
//! k_i = K_j/i, Ψ(k_i) = c_j/K_j, with its finite verification ledger.

use crate::arith::{divisors_from, factorize_smooth, harmonic, totient_from_factors};
use crate::error::{Error, Result};
use crate::frac::{parse_rational, sum_balanced, Rational};
use crate::intervals::{approx_set, full_residue_measure, IntervalSet};
use crate::model::{domain, CardinalityProfile, StreamKey, SweetSpot};
use crate::numeric::{ln, ln_factorial, Bracket, Tau, Verdict};
use crate::psi::{catlin_transform, witness_lifting, CatlinBound, LiftingReport, PsiSpec};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Largest M_j accepted; keys of block j take about M_j² log M_j bits.
pub const MAX_M: u64 = 5000;

/// Largest K_j handled by enumeration of intervals.
pub const ENUMERATION_LIMIT: u64 = 100_000;

/// Cap on the divisor count when enumerating Σ_{d|K} φ(d).
pub const DIVISOR_BUDGET: u64 = 1 << 20;

/// Summable sequences c_j, j ≥ 1.
#[derive(Clone, Debug, PartialEq)]
pub enum CSeq {
    /// c_j = r^j with 0 < r < 1
    Geometric(Rational),
    /// c_j = 1/j²
    InverseSquare,
    /// Listed values for j = 1, 2, ...
    List(Vec<Rational>),
}

impl CSeq {
    /// `geometric 1/2`, `inverse_square` or `list 1/2, 1/4`.
    pub fn parse(s: &str) -> Result<CSeq> {
        let s = s.trim();
        if s == "inverse_square" {
            return Ok(CSeq::InverseSquare);
        }
        if let Some(r) = s.strip_prefix("geometric") {
            let r = parse_rational(r)?;
            if !r.is_positive() || r >= Rational::one() {
                return Err(Error::Input(format!("geometric ratio {r} must lie in (0,1)")));
            }
            return Ok(CSeq::Geometric(r));
        }
        if let Some(rest) = s.strip_prefix("list") {
            let v = rest
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(parse_rational)
                .collect::<Result<Vec<_>>>()?;
            if v.is_empty() || v.iter().any(|c| !c.is_positive()) {
                return Err(Error::Input("c list must be nonempty with positive entries".into()));
            }
            return Ok(CSeq::List(v));
        }
        Err(Error::Input(format!("unknown c sequence {s:?} (geometric r | inverse_square | list ...)")))
    }

    pub fn get(&self, j: usize) -> Result<Rational> {
        assert!(j >= 1);
        match self {
            CSeq::Geometric(r) => Ok(num_traits::pow(r.clone(), j)),
            CSeq::InverseSquare => Ok(Rational::new(BigInt::one(), BigInt::from(j * j))),
            CSeq::List(v) => {
                v.get(j - 1).cloned().ok_or_else(|| Error::Input(format!("c list has no entry for j = {j}")))
            }
        }
    }

    /// How Σ c_j converges; comparison metadata, not a proof for input data.
    pub fn convergence(&self) -> &'static str {
        match self {
            CSeq::Geometric(_) => "geometric series, ratio < 1",
            CSeq::InverseSquare => "p-series with p = 2",
            CSeq::List(_) => "finite list",
        }
    }
}

impl fmt::Display for CSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CSeq::Geometric(r) => write!(f, "geometric {r}"),
            CSeq::InverseSquare => f.write_str("inverse_square"),
            CSeq::List(v) => {
                let parts: Vec<String> = v.iter().map(|c| c.to_string()).collect();
                write!(f, "list {}", parts.join(", "))
            }
        }
    }
}

/// One block j: K_j = M_j!, keys k_i = K_j/i for i = 1..M_j.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub j: usize,
    pub m: u64,
    pub k: BigUint,
    pub c: Rational,
    pub keys: Vec<BigUint>,
    /// Ψ(k_i) = c_j/K_j
    pub value: Rational,
}

impl Block {
    /// c_j / τ((M_j − 1)!), which should be large for infinitely many j.
    pub fn c_over_tau(&self, tau: Tau) -> Bracket {
        let t = Bracket::around(tau.from_ln(ln_factorial(self.m - 1)));
        Bracket::from_rational(&self.c) / t
    }

    pub fn small_k(&self) -> Option<u64> {
        self.k.to_u64().filter(|&k| k <= ENUMERATION_LIMIT)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CounterexampleSpec {
    pub c: CSeq,
    pub tau: Tau,
    pub m: Vec<u64>,
    pub blocks: Vec<Block>,
    pub psi: PsiSpec,
}

impl CounterexampleSpec {
    pub fn build(c: CSeq, tau: Tau, m: Vec<u64>) -> Result<CounterexampleSpec> {
        if m.first() != Some(&0) {
            return Err(Error::Validation("M must start with M_0 = 0".into()));
        }
        if m.len() < 2 {
            return Err(Error::Validation("M needs at least one block (M_1)".into()));
        }
        for (j, w) in m.windows(2).enumerate() {
            if w[1] < w[0] + 2 {
                return Err(Error::Validation(format!(
                    "consecutive M_{} = {} and M_{} = {} must differ by at least 2",
                    j,
                    w[0],
                    j + 1,
                    w[1]
                )));
            }
        }
        if let Some(&big) = m.iter().find(|&&v| v > MAX_M) {
            return Err(Error::Resource(format!("M_j = {big} exceeds the supported maximum {MAX_M}")));
        }
        let mut blocks = Vec::with_capacity(m.len() - 1);
        let mut map = BTreeMap::new();
        let mut fact = BigUint::one();
        let mut done = 1u64;
        for (j, &mj) in m.iter().enumerate().skip(1) {
            while done < mj {
                done += 1;
                fact *= done;
            }
            let cj = c.get(j)?;
            let value = &cj / Rational::from_integer(BigInt::from(fact.clone()));
            let keys: Vec<BigUint> = (1..=mj).map(|i| &fact / i).collect();
            for key in &keys {
                if map.insert(key.clone(), value.clone()).is_some() {
                    return Err(Error::Internal(format!("key {key} collides across blocks")));
                }
            }
            blocks.push(Block { j, m: mj, k: fact.clone(), c: cj, keys, value });
        }
        Ok(CounterexampleSpec { c, tau, m, blocks, psi: PsiSpec::sparse(map)? })
    }

    pub fn block(&self, j: usize) -> Result<&Block> {
        self.blocks
            .get(j.wrapping_sub(1))
            .ok_or_else(|| Error::Input(format!("block {j} outside 1..={}", self.blocks.len())))
    }

    fn first(&self, count: usize) -> &[Block] {
        &self.blocks[..count.min(self.blocks.len())]
    }

    pub fn support(&self) -> BTreeSet<BigUint> {
        self.blocks.iter().flat_map(|b| b.keys.iter().cloned()).collect()
    }
}

/// Exact key distinctness and ordering facts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyReport {
    pub keys: usize,
    pub distinct: usize,
    pub within_blocks_decreasing: bool,
    pub across_blocks_separated: bool,
}

impl KeyReport {
    pub fn holds(&self) -> bool {
        self.keys == self.distinct && self.within_blocks_decreasing && self.across_blocks_separated
    }
}

pub fn verify_keys(spec: &CounterexampleSpec) -> KeyReport {
    let keys = spec.blocks.iter().map(|b| b.keys.len()).sum();
    let within = spec.blocks.iter().all(|b| {
        b.keys.windows(2).all(|w| w[0] > w[1])
            && b.keys.first() == Some(&b.k)
            && b.keys.last().map(|k| k * b.m) == Some(b.k.clone())
    });
    let across = spec.blocks.windows(2).all(|w| w[1].keys.last().expect("nonempty") > &w[0].k);
    KeyReport {
        keys,
        distinct: spec.support().len(),
        within_blocks_decreasing: within,
        across_blocks_separated: across,
    }
}

/// λ(A_{K_j}(Ψ)) for one block.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerRow {
    pub j: usize,
    pub c: Rational,
    pub measure: Rational,
    /// 2c_j − c_j/K_j on the subunit branch.
    pub closed_form: Option<Rational>,
    /// c_j ≥ 1/2: the balls overlap and the measure is capped.
    pub capped: bool,
    /// Enumerated measure when K_j is small.
    pub enumerated: Option<Rational>,
}

impl LayerRow {
    pub fn bound(&self) -> Rational {
        &self.c * Rational::from_integer(BigInt::from(2))
    }

    pub fn holds(&self) -> bool {
        self.measure <= self.bound()
            && self.closed_form.as_ref().is_none_or(|v| v == &self.measure)
            && self.enumerated.as_ref().is_none_or(|v| v == &self.measure)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasureLedger {
    pub rows: Vec<LayerRow>,
    pub total: Rational,
    pub bound: Rational,
    /// λ(∪_j A_{K_j}) when every K_j is enumerable.
    pub union: Option<Rational>,
}

impl MeasureLedger {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(LayerRow::holds)
            && self.total <= self.bound
            && self.union.as_ref().is_none_or(|u| u <= &self.bound && u <= &self.total)
    }
}

fn full_layer(k: u64, radius: &Rational) -> Result<IntervalSet> {
    approx_set(k, &(1..=k).collect::<Vec<_>>(), radius)
}

pub fn verify_measure_vanishing(spec: &CounterexampleSpec, blocks: usize) -> Result<MeasureLedger> {
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let mut rows = Vec::new();
    let mut union = Some(IntervalSet::empty());
    for b in spec.first(blocks) {
        let k = BigInt::from(b.k.clone());
        let measure = full_residue_measure(&k, &b.value);
        let capped = b.c >= half;
        let closed_form = (!capped).then(|| &b.c * Rational::from_integer(BigInt::from(2)) - &b.value);
        let enumerated = match b.small_k() {
            Some(kk) => {
                let set = full_layer(kk, &b.value)?;
                let m = set.measure().clone();
                union = union.map(|u| u.union(&set));
                Some(m)
            }
            None => {
                union = None;
                None
            }
        };
        rows.push(LayerRow { j: b.j, c: b.c.clone(), measure, closed_form, capped, enumerated });
    }
    let total = sum_balanced(rows.iter().map(|r| r.measure.clone()).collect());
    let bound = sum_balanced(rows.iter().map(LayerRow::bound).collect());
    Ok(MeasureLedger { rows, total, bound, union: union.map(|u| u.measure().clone()) })
}

/// A_{k_i}(Ψ) ⊂ A_{K_j}(Ψ) for one i.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContainmentCheck {
    pub i: u64,
    /// Decided by the interval engine (true) or by the divisibility
    /// argument (false).
    pub exact: bool,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContainmentReport {
    pub j: usize,
    pub checks: Vec<ContainmentCheck>,
}

impl ContainmentReport {
    pub fn holds(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn exact(&self) -> bool {
        self.checks.iter().all(|c| c.exact)
    }

    /// A short description of how the containment was established.
    pub fn witness(&self) -> String {
        if self.exact() {
            format!("interval engine, {} subsets", self.checks.len())
        } else {
            format!("centers a/k_i = (a·i)/K_j with equal radii, {} divisibility checks", self.checks.len())
        }
    }
}

pub fn verify_containment(spec: &CounterexampleSpec, j: usize) -> Result<ContainmentReport> {
    let b = spec.block(j)?;
    let mut checks = Vec::with_capacity(b.keys.len());
    let radius_of = |k: &BigUint| spec.psi.eval(k);
    if let Some(kk) = b.small_k() {
        let top = full_layer(kk, &b.value)?;
        for (idx, key) in b.keys.iter().enumerate() {
            let key = key.to_u64().expect("divides K_j");
            let layer = full_layer(key, &radius_of(&BigUint::from(key))?)?;
            let holds = layer.is_subset_of(&top) && (idx > 0 || layer == top);
            checks.push(ContainmentCheck { i: idx as u64 + 1, exact: true, holds });
        }
    } else {
        for (idx, key) in b.keys.iter().enumerate() {
            let i = idx as u64 + 1;
            let holds = key * i == b.k && radius_of(key)? == b.value;
            checks.push(ContainmentCheck { i, exact: false, holds });
        }
    }
    Ok(ContainmentReport { j, checks })
}

/// λ(∪_j ∪_i A_{k_i}) and λ(∪_j A_{K_j}) over enumerable blocks.
pub fn union_collapse(spec: &CounterexampleSpec, blocks: usize) -> Result<Option<(Rational, Rational)>> {
    let mut all = IntervalSet::empty();
    let mut tops = IntervalSet::empty();
    for b in spec.first(blocks) {
        let Some(kk) = b.small_k() else { return Ok(None) };
        tops = tops.union(&full_layer(kk, &b.value)?);
        for key in &b.keys {
            let key = key.to_u64().expect("divides K_j");
            all = all.union(&full_layer(key, &b.value)?);
        }
    }
    Ok(Some((all.measure().clone(), tops.measure().clone())))
}

/// One row of the divergence ledger.
#[derive(Clone, Debug, PartialEq)]
pub struct DivergenceRow {
    pub j: usize,
    pub m: u64,
    /// S_j = Σ_i f(k_i)·c_j/K_j
    pub s: Rational,
    /// Σ_i c_j/(i·τ(k_i)·loglog k_i)
    pub l1: Bracket,
    /// c_j·H_{M_j}/(τ(k_{M_j})·loglog k_1)
    pub l2: Bracket,
    /// c_j·ln M_j/(τ((M_j−1)!)·loglog(M_j!))
    pub l3: Bracket,
    pub s_ge_l1: Verdict,
    pub l1_ge_l2: Verdict,
    pub l2_ge_l3: Verdict,
    pub c_over_tau: Bracket,
}

impl DivergenceRow {
    pub fn chain(&self) -> Verdict {
        self.s_ge_l1.and(self.l1_ge_l2).and(self.l2_ge_l3)
    }
}

fn loglog_from_ln(ln_n: f64) -> Bracket {
    Bracket::around(ln(ln_n.max(ln(16.0))))
}

pub fn divergence_ledger(
    spec: &CounterexampleSpec,
    f: &CardinalityProfile,
    blocks: usize,
) -> Result<Vec<DivergenceRow>> {
    let tau = spec.tau;
    spec.first(blocks)
        .iter()
        .map(|b| {
            let kr = Rational::from_integer(BigInt::from(b.k.clone()));
            let mut terms = Vec::with_capacity(b.keys.len());
            for key in &b.keys {
                let fk = f.eval_big(key)?;
                terms.push(Rational::from_integer(BigInt::from(fk)) * &b.c / &kr);
            }
            let s = sum_balanced(terms);
            let c = Bracket::from_rational(&b.c);
            let ln_k = ln_factorial(b.m);
            let mut l1 = Bracket::exact(0.0);
            for (idx, key) in b.keys.iter().enumerate() {
                l1 = l1 + c * tau.inv_tau_loglog(key) / Bracket::exact(idx as f64 + 1.0);
            }
            let ln_last = ln_factorial(b.m - 1);
            let denom = Bracket::around(tau.from_ln(ln_last)) * loglog_from_ln(ln_k);
            let l2 = c * Bracket::from_rational(&harmonic(b.m)) / denom;
            let l3 = c * Bracket::around(ln(b.m as f64)) / denom;
            let sb = Bracket::from_rational(&s);
            Ok(DivergenceRow {
                j: b.j,
                m: b.m,
                s_ge_l1: sb.ge(&l1),
                l1_ge_l2: l1.ge(&l2),
                l2_ge_l3: l2.ge(&l3),
                s,
                l1,
                l2,
                l3,
                c_over_tau: b.c_over_tau(tau),
            })
        })
        .collect()
}

/// Σ_i φ(k_i)·c_j/K_j for one block, with the divisor identity.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiBlockRow {
    pub j: usize,
    pub c: Rational,
    pub value: Rational,
    /// Σ_{d|K_j} φ(d) = K_j by enumeration; `None` past the divisor budget.
    pub divisor_identity: Option<bool>,
}

impl PhiBlockRow {
    pub fn ratio(&self) -> Rational {
        &self.value / &self.c
    }

    pub fn holds(&self) -> bool {
        self.value <= self.c && self.divisor_identity != Some(false)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhiSeriesReport {
    pub rows: Vec<PhiBlockRow>,
    pub total: Rational,
    pub c_total: Rational,
}

impl PhiSeriesReport {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(PhiBlockRow::holds) && self.total <= self.c_total
    }
}

pub fn phi_series_check(spec: &CounterexampleSpec, blocks: usize) -> Result<PhiSeriesReport> {
    let mut rows = Vec::new();
    for b in spec.first(blocks) {
        let mut phis = Vec::with_capacity(b.keys.len());
        for key in &b.keys {
            let f =
                factorize_smooth(key, b.m).ok_or_else(|| Error::Internal(format!("{key} is not {}-smooth", b.m)))?;
            phis.push(Rational::from_integer(BigInt::from(totient_from_factors(&f))));
        }
        let value = sum_balanced(phis) * &b.value;
        let kf = factorize_smooth(&b.k, b.m).expect("M_j! is M_j-smooth");
        let count: u64 = kf.iter().map(|(_, e)| *e as u64 + 1).product();
        let divisor_identity = (count <= DIVISOR_BUDGET).then(|| {
            let small: Vec<(u64, u32)> = kf.iter().map(|(p, e)| (p.to_u64().expect("prime ≤ M_j"), *e)).collect();
            if let Some(k) = b.k.to_u64() {
                let total: u64 = divisors_from(&small).into_iter().map(|d| CardinalityProfile::Phi.eval(d)).sum();
                return total == k;
            }
            let mut total = BigUint::zero();
            for d in divisors_big(&kf) {
                total += totient_from_factors(&d);
            }
            total == b.k
        });
        rows.push(PhiBlockRow { j: b.j, c: b.c.clone(), value, divisor_identity });
    }
    let total = sum_balanced(rows.iter().map(|r| r.value.clone()).collect());
    let c_total = sum_balanced(rows.iter().map(|r| r.c.clone()).collect());
    Ok(PhiSeriesReport { rows, total, c_total })
}

fn divisors_big(factors: &[(BigUint, u32)]) -> Vec<Vec<(BigUint, u32)>> {
    let mut out = vec![Vec::new()];
    for (p, e) in factors {
        let mut next = Vec::with_capacity(out.len() * (*e as usize + 1));
        for d in &out {
            for k in 0..=*e {
                let mut d = d.clone();
                if k > 0 {
                    d.push((p.clone(), k));
                }
                next.push(d);
            }
        }
        out = next;
    }
    out
}

/// f(n) = min(n, ⌈n/(τ(n) loglog n)⌉) on the keys and
/// min(n, ⌈C·n/loglog n⌉) elsewhere.
pub fn sweet_spot_profile(spec: &CounterexampleSpec, off_support: Rational) -> Result<CardinalityProfile> {
    if !off_support.is_positive() {
        return Err(Error::Input(format!("off-support constant {off_support} must be positive")));
    }
    Ok(CardinalityProfile::SweetSpot(SweetSpot { keys: spec.support(), tau: spec.tau, off_support }))
}

/// Every Ψ̄-witness among `points` sample points lifts to a Ψ-witness.
/// Half the points are uniform u/2^53; the rest sit inside a ball
/// B(a/d, Ψ̄(d)) for a divisor d of some K_j, so witnesses occur.
pub fn catlin_lifting_check(spec: &CounterexampleSpec, points: usize, seed: u64) -> Result<LiftingReport> {
    let mut denominators = BTreeSet::new();
    for b in &spec.blocks {
        let f = factorize_smooth(&b.k, b.m).expect("M_j! is M_j-smooth");
        let count: u64 = f.iter().map(|(_, e)| *e as u64 + 1).product();
        if count > DIVISOR_BUDGET {
            return Err(Error::Resource(format!("K_{} has {count} divisors", b.j)));
        }
        for d in divisors_big(&f) {
            denominators.insert(d.iter().fold(BigUint::one(), |acc, (p, e)| acc * p.pow(*e)));
        }
    }
    let denominators: Vec<BigUint> = denominators.into_iter().collect();
    let mut rng = StreamKey::new(seed, domain::SAMPLE_POINTS, 1).stream(0);
    let scale = BigInt::one() << 53u32;
    let mut xs = Vec::with_capacity(points);
    for idx in 0..points {
        if idx % 2 == 0 {
            let u: u64 = rng.random_range(0..1u64 << 53);
            xs.push(Rational::new(BigInt::from(u), scale.clone()));
            continue;
        }
        let d = &denominators[rng.random_range(0..denominators.len())];
        let bar = catlin_transform(&spec.psi, d, CatlinBound::Support)?.value;
        let dd = BigInt::from(d.clone());
        let a = BigInt::from(rng.random_range(0..=d.to_u64().unwrap_or(u64::MAX)));
        let a = if a > dd { dd.clone() } else { a };
        let off: i64 = rng.random_range(-(1i64 << 40) + 1..1i64 << 40);
        let x = Rational::new(a, dd) + bar * Rational::new(BigInt::from(off), BigInt::one() << 40u32);
        let x = x.max(Rational::zero()).min(Rational::one());
        xs.push(x);
    }
    witness_lifting(&spec.psi, &xs, &denominators)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frac::rat;
    use crate::psi::series_partial;

    fn spec(m: &[u64]) -> CounterexampleSpec {
        CounterexampleSpec::build(CSeq::Geometric(rat(1, 2)), Tau::InvSqrtLogLog, m.to_vec()).unwrap()
    }

    fn nums(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn builds_factorial_blocks() {
        let s = spec(&[0, 3, 5]);
        assert_eq!(s.blocks[0].keys, nums(&[6, 3, 2]));
        assert_eq!(s.blocks[0].value, rat(1, 12));
        assert_eq!(s.blocks[1].keys, nums(&[120, 60, 40, 30, 24]));
        assert_eq!(s.blocks[1].value, rat(1, 480));
        assert_eq!(s.psi.eval_u64(40).unwrap(), rat(1, 480));
        assert_eq!(s.psi.eval_u64(7).unwrap(), rat(0, 1));
        assert!(s.blocks[1].keys.last().unwrap() > &s.blocks[0].k);
        assert!(verify_keys(&s).holds());
    }

    #[test]
    fn rejects_bad_sequences() {
        let b = |m: Vec<u64>| CounterexampleSpec::build(CSeq::InverseSquare, Tau::InvSqrtLogLog, m);
        assert!(matches!(b(vec![0, 3, 4]), Err(Error::Validation(_))));
        assert!(matches!(b(vec![1, 3]), Err(Error::Validation(_))));
        assert!(matches!(b(vec![0]), Err(Error::Validation(_))));
        assert!(b(vec![0, 2, 4, 7]).is_ok());
    }

    #[test]
    fn c_sequences() {
        assert_eq!(CSeq::parse("geometric 1/2").unwrap().get(3).unwrap(), rat(1, 8));
        assert_eq!(CSeq::parse("inverse_square").unwrap().get(3).unwrap(), rat(1, 9));
        let l = CSeq::parse("list 1/2, 1/4").unwrap();
        assert_eq!(l.get(2).unwrap(), rat(1, 4));
        assert!(l.get(3).is_err());
        assert!(CSeq::parse("geometric 1").is_err());
        assert_eq!(CSeq::parse(&l.to_string()).unwrap(), l);
    }

    #[test]
    fn layer_measure_examples() {
        let s = CounterexampleSpec::build(CSeq::parse("list 1/4").unwrap(), Tau::InvSqrtLogLog, vec![0, 3]).unwrap();
        let m = verify_measure_vanishing(&s, 1).unwrap();
        assert_eq!(m.rows[0].measure, rat(11, 24));
        assert_eq!(m.rows[0].enumerated, Some(rat(11, 24)));
        assert!(m.holds());

        let s = CounterexampleSpec::build(CSeq::parse("list 1/2, 1/4").unwrap(), Tau::InvSqrtLogLog, vec![0, 3, 5])
            .unwrap();
        let m = verify_measure_vanishing(&s, 2).unwrap();
        assert!(m.rows[0].capped && !m.rows[1].capped);
        assert_eq!(m.rows[0].measure, rat(11, 12));
        assert_eq!(m.rows[1].measure, rat(1, 2) - rat(1, 480));
        assert_eq!(m.bound, rat(3, 2));
        assert_eq!(m.total, rat(11, 12) + rat(1, 2) - rat(1, 480));
        assert!(m.holds());
    }

    #[test]
    fn containment_and_collapse() {
        let s = spec(&[0, 3, 5, 8]);
        for j in 1..=3 {
            let c = verify_containment(&s, j).unwrap();
            assert!(c.holds() && c.exact(), "{c:?}");
        }
        let (all, tops) = union_collapse(&s, 3).unwrap().unwrap();
        assert_eq!(all, tops);
        let big = spec(&[0, 3, 5, 8, 10]);
        let c = verify_containment(&big, 4).unwrap();
        assert!(c.holds() && !c.exact());
        assert!(union_collapse(&big, 4).unwrap().is_none());
        assert!(verify_measure_vanishing(&big, 4).unwrap().holds());
    }

    #[test]
    fn phi_series_blocks() {
        let s = spec(&[0, 3, 5, 8]);
        let r = phi_series_check(&s, 3).unwrap();
        assert_eq!(r.rows[0].ratio(), rat(5, 6));
        assert_eq!(r.rows[1].ratio(), rat(2, 3));
        assert!(r.rows.iter().all(|row| row.divisor_identity == Some(true)));
        assert!(r.holds());
        let direct = series_partial(&CardinalityProfile::Phi, &s.psi, &s.blocks[2].k).unwrap();
        assert_eq!(direct, r.total);
    }

    #[test]
    fn divergence_chain() {
        let s = spec(&[0, 3, 5, 8]);
        let f = sweet_spot_profile(&s, rat(1, 1)).unwrap();
        for row in divergence_ledger(&s, &f, 3).unwrap() {
            assert!(row.chain().holds(), "{row:?}");
        }
        let full = divergence_ledger(&s, &CardinalityProfile::Full, 3).unwrap();
        for (row, b) in full.iter().zip(&s.blocks) {
            assert_eq!(row.s, &b.c * harmonic(b.m));
        }
        let zero = CardinalityProfile::Constant(0);
        assert!(divergence_ledger(&s, &zero, 3).unwrap().iter().all(|r| r.s.is_zero()));
    }

    #[test]
    fn sweet_spot_values() {
        let s = spec(&[0, 3, 5]);
        let f = sweet_spot_profile(&s, rat(1, 1)).unwrap();
        let want = (120.0 / crate::numeric::loglog(120.0).sqrt()).ceil() as u64;
        assert_eq!(f.eval(120), want);
        assert_eq!(f.eval(7), 7);
        for n in 16..3000u64 {
            if !s.support().contains(&BigUint::from(n)) {
                assert!(crate::model::density_times_loglog(f.eval(n), n) <= 2.0 + 1e-12);
            }
        }
        assert!(sweet_spot_profile(&s, rat(0, 1)).is_err());
    }

    #[test]
    fn lifting_holds() {
        let s = spec(&[0, 3, 5, 8]);
        let r = catlin_lifting_check(&s, 200, 9).unwrap();
        assert!(r.witnesses >= 50, "{r:?}");
        assert_eq!(r.lifted, r.witnesses);
        assert!(r.pointwise_ok);
    }
}
