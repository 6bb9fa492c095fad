//! Per-block counting statistics X_t(I) and Z_t(I), Chebyshev
//! concentration experiments, local ubiquity density ratios, and measures
//! of truncated limsup sets.

use crate::arith::{sum_fractions, theta, SieveTable};
use crate::blocks::BlockScheme;
use crate::error::{Error, Result};
use crate::frac::{sum_balanced, Frac, Rational};
use crate::intervals::{CenterSet, EngineConfig, MeasureMode, MeasureValue, RationalInterval, SweepAccumulator};
use crate::model::{hypergeometric_variance, ChoiceModel, NumeratorChoice};
use crate::numeric::{exp, f64_to_rational};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

fn int(v: impl Into<BigInt>) -> Rational {
    Rational::from_integer(v.into())
}

fn check_model(choice: &NumeratorChoice, scheme: &BlockScheme) -> Result<()> {
    match &choice.model {
        ChoiceModel::Profile(p) if p != scheme.profile() => {
            Err(Error::Input(format!("numerator profile {p} differs from the scheme profile {}", scheme.profile())))
        }
        _ => Ok(()),
    }
}

/// Calls `f(n, a)` for every n in block t and a ∈ P_n.
pub fn for_each_chosen<F: FnMut(u64, u64)>(choice: &NumeratorChoice, scheme: &BlockScheme, t: u32, mut f: F) {
    let start = scheme.cut(t) + 1;
    for (i, &m) in scheme.block_values(t).iter().enumerate() {
        let n = start + i as u64;
        match &choice.model {
            ChoiceModel::Profile(_) => choice.for_each_of_size(n, m, |a| f(n, a)),
            ChoiceModel::UniformSubsets => choice.subset(n).into_iter().for_each(|a| f(n, a)),
        }
    }
}

/// Per-n bitsets of the distinguished numerators: a ∈ [n], gcd(a, n) = 1,
/// a/n ∈ I.
#[derive(Clone, Debug)]
pub struct DistinguishedMasks {
    start: u64,
    masks: Vec<Vec<u64>>,
    counts: Vec<u64>,
}

impl DistinguishedMasks {
    pub fn new(scheme: &BlockScheme, t: u32, interval: &RationalInterval) -> DistinguishedMasks {
        let start = scheme.cut(t) + 1;
        let end = scheme.next_cut(t);
        let mut masks = Vec::with_capacity((end - start + 1) as usize);
        let mut counts = Vec::with_capacity(masks.capacity());
        for n in start..=end {
            let lo = interval.lo.ceil_times(n).max(1) as u64;
            let hi = interval.hi.floor_times(n).min(n as i128);
            let mut bits = vec![0u64; (n as usize + 1).div_ceil(64)];
            let mut count = 0;
            if hi >= lo as i128 {
                for a in lo..=hi as u64 {
                    if a.gcd(&n) == 1 {
                        bits[(a / 64) as usize] |= 1 << (a % 64);
                        count += 1;
                    }
                }
            }
            masks.push(bits);
            counts.push(count);
        }
        DistinguishedMasks { start, masks, counts }
    }

    pub fn contains(&self, n: u64, a: u64) -> bool {
        self.masks[(n - self.start) as usize][(a / 64) as usize] >> (a % 64) & 1 == 1
    }

    /// D_n = #(Q_n ∩ I)
    pub fn count(&self, n: u64) -> u64 {
        self.counts[(n - self.start) as usize]
    }
}

/// X_t(I) = Σ_{n in block} #{a ∈ P_n : gcd(a,n) = 1, a/n ∈ I}.
pub fn count_x_t(choice: &NumeratorChoice, interval: &RationalInterval, scheme: &BlockScheme, t: u32) -> Result<u64> {
    check_model(choice, scheme)?;
    let masks = DistinguishedMasks::new(scheme, t, interval);
    Ok(x_with_masks(choice, scheme, t, &masks))
}

fn x_with_masks(choice: &NumeratorChoice, scheme: &BlockScheme, t: u32, masks: &DistinguishedMasks) -> u64 {
    let mut x = 0;
    for_each_chosen(choice, scheme, t, |n, a| {
        if masks.contains(n, a) {
            x += 1;
        }
    });
    x
}

/// Grid cells I_ℓ = [ℓ/N_t, (ℓ+1)/N_t) for ℓ ∈ (ℓ1, ℓ2] inside I.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    pub level: u64,
    pub l1: i128,
    pub l2: i128,
}

impl Grid {
    /// The grid of block t, or `None` when I is too short at this level
    /// (no cell, or the cells cover less than half of I).
    pub fn new(interval: &RationalInterval, level: u64) -> Option<Grid> {
        let l1 = interval.lo.ceil_times(level) - 1;
        let l2 = interval.hi.floor_times(level) - 1;
        if l2 <= l1 {
            return None;
        }
        let covered = Frac::new(l2 - l1, level as i128);
        let half = Frac::new(interval.length().num(), 2 * interval.length().den());
        (covered >= half).then_some(Grid { level, l1, l2 })
    }

    pub fn cells(&self) -> u64 {
        (self.l2 - self.l1) as u64
    }

    /// Index in 0..cells of the cell holding a/n, if any.
    pub fn cell_of(&self, a: u64, n: u64) -> Option<u64> {
        let l = (a as u128 * self.level as u128 / n as u128) as i128;
        (l > self.l1 && l <= self.l2).then(|| (l - self.l1 - 1) as u64)
    }
}

/// Outcome of Z_t(I): hit count, or below the threshold t0 at this level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZCount {
    Count { hit: u64, cells: u64 },
    BelowT0,
}

/// Z_t(I): number of grid cells containing a chosen a/n from block t.
pub fn count_z_t(
    choice: &NumeratorChoice,
    interval: &RationalInterval,
    scheme: &BlockScheme,
    t: u32,
) -> Result<ZCount> {
    check_model(choice, scheme)?;
    let Some(grid) = Grid::new(interval, scheme.cut(t)) else { return Ok(ZCount::BelowT0) };
    let bits = z_hits(choice, scheme, t, &grid);
    let hit = bits.iter().map(|w| w.count_ones() as u64).sum();
    Ok(ZCount::Count { hit, cells: grid.cells() })
}

fn z_hits(choice: &NumeratorChoice, scheme: &BlockScheme, t: u32, grid: &Grid) -> Vec<u64> {
    let mut bits = vec![0u64; (grid.cells() as usize).div_ceil(64)];
    for_each_chosen(choice, scheme, t, |n, a| {
        if let Some(c) = grid.cell_of(a, n) {
            bits[(c / 64) as usize] |= 1 << (c % 64);
        }
    });
    bits
}

/// (ℓ2 − ℓ1)·(1 − (1 − 1/N_{t+1})^{F_t}), a lower bound on 𝔼 Z_t.
/// Exact when the power is small enough to expand, otherwise the weaker
/// (ℓ2 − ℓ1)·(1 − e^{−F_t/N_{t+1}}) rounded down.
pub fn z_expectation_bound(cells: u64, next_cut: u64, block_sum: u128) -> Rational {
    let bits = block_sum as f64 * (next_cut as f64).log2();
    if bits <= 4.0e6 {
        let q = Rational::one() - int(next_cut).recip();
        let miss = num_traits::pow(q, block_sum as usize);
        return int(cells) * (Rational::one() - miss);
    }
    let e = exp(-(block_sum as f64) / next_cut as f64);
    let upper_miss = e * (1.0 + 1e-12) + f64::MIN_POSITIVE;
    int(cells) * f64_to_rational((1.0 - upper_miss).max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Statistic {
    X,
    Z,
}

impl Statistic {
    pub fn as_str(self) -> &'static str {
        match self {
            Statistic::X => "X_t",
            Statistic::Z => "Z_t",
        }
    }
}

/// Result of a Chebyshev concentration experiment over independent trials.
#[derive(Clone, Debug, PartialEq)]
pub struct ChebyshevReport {
    pub statistic: Statistic,
    pub t: u32,
    pub interval: RationalInterval,
    pub trials: u64,
    pub block_sum: u128,
    /// Exact 𝔼 of the statistic when known.
    pub expectation: Option<Rational>,
    pub expectation_bound: Rational,
    /// Whether the expectation bound is the proof's bound (true) or a
    /// fallback to the exact mean because a hypothesis failed on the block.
    pub bound_from_proof: bool,
    pub variance_bound: Option<Rational>,
    pub exact_variance: Option<Rational>,
    pub failures: u64,
    pub chebyshev_bound: Rational,
    pub values: Vec<u64>,
    pub below_t0: bool,
}

impl ChebyshevReport {
    pub fn empirical_rate(&self) -> Rational {
        Rational::new(BigInt::from(self.failures), BigInt::from(self.trials.max(1)))
    }

    pub fn passed(&self) -> bool {
        self.below_t0 || self.empirical_rate() <= self.chebyshev_bound
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().map(|&v| v as f64).sum::<f64>() / self.values.len().max(1) as f64
    }

    pub fn sample_sd(&self) -> f64 {
        let m = self.mean();
        let n = self.values.len();
        if n < 2 {
            return 0.0;
        }
        let ss: f64 = self.values.iter().map(|&v| (v as f64 - m).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    }

    /// |mean − 𝔼| ≤ 3σ/√R when the exact moments are known.
    pub fn mean_within_3_sigma(&self) -> Option<bool> {
        let e = self.expectation.as_ref()?.to_f64()?;
        let v = self.exact_variance.as_ref()?.to_f64()?;
        let se = (v / self.trials as f64).sqrt();
        Some((self.mean() - e).abs() <= 3.0 * se + 1e-9)
    }

    /// Sample mean ≥ expectation bound − 3 standard errors.
    pub fn mean_above_bound(&self) -> bool {
        let b = self.expectation_bound.to_f64().unwrap_or(f64::INFINITY);
        let se = self.sample_sd() / (self.trials as f64).sqrt();
        self.mean() >= b - 3.0 * se
    }
}

fn trials_map<T: Send, F: Fn(u64) -> T + Sync + Send>(trials: u64, f: F) -> Vec<T> {
    (0..trials).into_par_iter().map(f).collect()
}

/// X_t(I) experiment. The expectation bound is C1·F_t·λ(I) with
/// C1 = Σ f(n)φ(n)/(2n) / F_t, valid when #(Q_n ∩ I) ≥ ½φ(n)λ(I) on the
/// whole block (checked exactly); the variance bound is F_t/4.
pub fn chebyshev_x(
    scheme: &BlockScheme,
    t: u32,
    interval: &RationalInterval,
    trials: u64,
    master_seed: u64,
    sieve: &SieveTable,
) -> Result<ChebyshevReport> {
    let masks = DistinguishedMasks::new(scheme, t, interval);
    let start = scheme.cut(t) + 1;
    let fs = scheme.block_values(t);
    let len = interval.length().to_rational();
    let (ln, ld) = (len.numer().clone(), len.denom().clone());

    let mut mean_terms = Vec::with_capacity(fs.len());
    let mut bound_terms = Vec::with_capacity(fs.len());
    let mut variances = Vec::with_capacity(fs.len());
    let mut niederreiter = true;
    for (i, &f) in fs.iter().enumerate() {
        let n = start + i as u64;
        let d = masks.count(n);
        let phi = sieve.phi(n as usize);
        if BigInt::from(2 * d) * &ld < BigInt::from(phi) * &ln {
            niederreiter = false;
        }
        mean_terms.push((f * d, n));
        bound_terms.push((f * phi, 2 * n));
        variances.push(hypergeometric_variance(n, f, d));
    }
    let factor = |v: u64| {
        if v as usize <= sieve.limit() {
            sieve.factorize(v as usize)
        } else {
            crate::arith::factorize_u64(v)
        }
    };
    let expectation = sum_fractions(&mean_terms, factor);
    let proof_bound = sum_fractions(&bound_terms, factor) * &len;
    let exact_variance = sum_balanced(variances);
    let (expectation_bound, bound_from_proof) =
        if niederreiter { (proof_bound, true) } else { (expectation.clone(), false) };
    let block_sum = scheme.block_sum(t);
    let variance_bound = int(block_sum) / int(4u32);

    let profile = scheme.profile().clone();
    let values = trials_map(trials, |r| {
        let choice = NumeratorChoice::new(profile.clone(), master_seed).with_trial(r);
        x_with_masks(&choice, scheme, t, &masks)
    });
    let failures = values.iter().filter(|&&x| int(2 * x) < expectation_bound).count() as u64;
    let chebyshev_bound = if expectation_bound.is_zero() {
        Rational::one()
    } else {
        int(4u32) * &variance_bound / (&expectation_bound * &expectation_bound)
    };
    Ok(ChebyshevReport {
        statistic: Statistic::X,
        t,
        interval: *interval,
        trials,
        block_sum,
        expectation: Some(expectation),
        expectation_bound,
        bound_from_proof,
        variance_bound: Some(variance_bound),
        exact_variance: Some(exact_variance),
        failures,
        chebyshev_bound,
        values,
        below_t0: false,
    })
}

/// Z_t(I) experiment with 𝔼 Z_t ≥ (ℓ2−ℓ1)(1 − (1 − 1/N_{t+1})^{F_t}) and
/// σ² ≤ 𝔼, so the Chebyshev bound is 4/(expectation bound).
pub fn chebyshev_z(
    scheme: &BlockScheme,
    t: u32,
    interval: &RationalInterval,
    trials: u64,
    master_seed: u64,
) -> Result<ChebyshevReport> {
    let block_sum = scheme.block_sum(t);
    let Some(grid) = Grid::new(interval, scheme.cut(t)) else {
        return Ok(ChebyshevReport {
            statistic: Statistic::Z,
            t,
            interval: *interval,
            trials: 0,
            block_sum,
            expectation: None,
            expectation_bound: Rational::zero(),
            bound_from_proof: true,
            variance_bound: None,
            exact_variance: None,
            failures: 0,
            chebyshev_bound: Rational::one(),
            values: Vec::new(),
            below_t0: true,
        });
    };
    let expectation_bound = z_expectation_bound(grid.cells(), scheme.next_cut(t), block_sum);
    let profile = scheme.profile().clone();
    let values = trials_map(trials, |r| {
        let choice = NumeratorChoice::new(profile.clone(), master_seed).with_trial(r);
        z_hits(&choice, scheme, t, &grid).iter().map(|w| w.count_ones() as u64).sum()
    });
    let failures = values.iter().filter(|&&z| int(2 * z) < expectation_bound).count() as u64;
    let chebyshev_bound = if expectation_bound.is_zero() { Rational::one() } else { int(4u32) / &expectation_bound };
    Ok(ChebyshevReport {
        statistic: Statistic::Z,
        t,
        interval: *interval,
        trials,
        block_sum,
        expectation: None,
        expectation_bound,
        bound_from_proof: true,
        variance_bound: None,
        exact_variance: None,
        failures,
        chebyshev_bound,
        values,
        below_t0: false,
    })
}

/// Empirical covariance of the cell indicators (Y_k, Y_ℓ) with its
/// standard error.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceRow {
    pub k: u64,
    pub l: u64,
    pub covariance: f64,
    pub standard_error: f64,
}

impl CovarianceRow {
    /// Nonpositive up to three standard errors.
    pub fn passed(&self) -> bool {
        self.covariance <= 3.0 * self.standard_error + 1e-12
    }
}

/// Covariances of hit indicators for the given cell pairs over seeded
/// trials. Cell indices count from the first cell inside I.
pub fn cell_covariances(
    scheme: &BlockScheme,
    t: u32,
    interval: &RationalInterval,
    trials: u64,
    master_seed: u64,
    pairs: &[(u64, u64)],
) -> Result<Vec<CovarianceRow>> {
    let grid = Grid::new(interval, scheme.cut(t))
        .ok_or_else(|| Error::Input(format!("interval {interval} has no grid cell at t = {t}")))?;
    if let Some(&(k, l)) = pairs.iter().find(|(k, l)| *k >= grid.cells() || *l >= grid.cells() || k == l) {
        return Err(Error::Input(format!("cell pair ({k}, {l}) invalid for {} cells", grid.cells())));
    }
    let profile = scheme.profile().clone();
    let hits = trials_map(trials, |r| {
        let choice = NumeratorChoice::new(profile.clone(), master_seed).with_trial(r);
        z_hits(&choice, scheme, t, &grid)
    });
    let bit = |b: &Vec<u64>, c: u64| (b[(c / 64) as usize] >> (c % 64) & 1) as f64;
    let r = trials as f64;
    Ok(pairs
        .iter()
        .map(|&(k, l)| {
            let mk = hits.iter().map(|b| bit(b, k)).sum::<f64>() / r;
            let ml = hits.iter().map(|b| bit(b, l)).sum::<f64>() / r;
            let prods: Vec<f64> = hits.iter().map(|b| (bit(b, k) - mk) * (bit(b, l) - ml)).collect();
            let cov = prods.iter().sum::<f64>() / r;
            let var = prods.iter().map(|p| (p - cov).powi(2)).sum::<f64>() / (r - 1.0).max(1.0);
            CovarianceRow { k, l, covariance: cov, standard_error: (var / r).sqrt() }
        })
        .collect())
}

/// The chosen fractions of block t as a sorted center set.
pub fn block_centers(choice: &NumeratorChoice, scheme: &BlockScheme, t: u32) -> Result<CenterSet> {
    check_model(choice, scheme)?;
    if scheme.next_cut(t) > u32::MAX as u64 {
        return Err(Error::Resource(format!("block {t} denominators exceed 32 bits")));
    }
    let mut centers = Vec::with_capacity(scheme.block_sum(t).min(1 << 32) as usize);
    for_each_chosen(choice, scheme, t, |n, a| centers.push((a as u32, n as u32)));
    Ok(CenterSet::new(centers))
}

fn divide_value(v: MeasureValue, len: &Rational) -> MeasureValue {
    match v {
        MeasureValue::Exact(m) => MeasureValue::Exact(m / len),
        MeasureValue::Bracket { lower, upper } => MeasureValue::Bracket { lower: lower / len, upper: upper / len },
    }
}

/// λ(I ∩ ∪_{n in block} ∪_{a∈P_n} B(a/n, radius)) / λ(I).
pub fn ratio_for_centers(
    centers: &CenterSet,
    interval: &RationalInterval,
    radius: &Rational,
    cfg: &EngineConfig,
) -> Result<(usize, MeasureValue)> {
    let len = interval.length();
    if len.is_zero() {
        return Err(Error::Input(format!("interval {interval} has zero length")));
    }
    let (components, m) = centers.union_measure_within(Frac::from_rational(radius)?, interval, cfg)?;
    Ok((components, divide_value(m, &len.to_rational())))
}

/// Local ubiquity density ratio of block t with the block radius 1/F_t.
pub fn local_ubiquity_ratio(
    choice: &NumeratorChoice,
    interval: &RationalInterval,
    scheme: &BlockScheme,
    t: u32,
    cfg: &EngineConfig,
) -> Result<MeasureValue> {
    local_ubiquity_ratio_with_radius(choice, interval, scheme, t, &scheme.radius(t), cfg)
}

pub fn local_ubiquity_ratio_with_radius(
    choice: &NumeratorChoice,
    interval: &RationalInterval,
    scheme: &BlockScheme,
    t: u32,
    radius: &Rational,
    cfg: &EngineConfig,
) -> Result<MeasureValue> {
    let centers = block_centers(choice, scheme, t)?;
    Ok(ratio_for_centers(&centers, interval, radius, cfg)?.1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct UbiquityRecord {
    pub t: u32,
    pub interval: RationalInterval,
    pub block_sum: u128,
    pub components: usize,
    pub ratio: MeasureValue,
}

/// Density ratios over every (t, I); κ is the least lower ratio.
#[derive(Clone, Debug, PartialEq)]
pub struct UbiquityReport {
    pub records: Vec<UbiquityRecord>,
    pub kappa: Rational,
}

impl UbiquityReport {
    /// Least ratio per t.
    pub fn per_t_min(&self) -> Vec<(u32, Rational)> {
        let mut out: Vec<(u32, Rational)> = Vec::new();
        for r in &self.records {
            match out.last_mut() {
                Some((t, m)) if *t == r.t => {
                    if r.ratio.lower() < m {
                        *m = r.ratio.lower().clone();
                    }
                }
                _ => out.push((r.t, r.ratio.lower().clone())),
            }
        }
        out
    }
}

pub fn ubiquity_sweep(
    choice: &NumeratorChoice,
    scheme: &BlockScheme,
    intervals: &[RationalInterval],
    cfg: &EngineConfig,
) -> Result<UbiquityReport> {
    if intervals.is_empty() {
        return Err(Error::Input("empty interval suite".into()));
    }
    let mut records = Vec::new();
    for t in scheme.t_range() {
        let centers = block_centers(choice, scheme, t)?;
        let radius = scheme.radius(t);
        let rows: Result<Vec<UbiquityRecord>> = intervals
            .par_iter()
            .map(|i| {
                let (components, ratio) = ratio_for_centers(&centers, i, &radius, cfg)?;
                Ok(UbiquityRecord { t, interval: *i, block_sum: scheme.block_sum(t), components, ratio })
            })
            .collect();
        records.extend(rows?);
    }
    let kappa = records.iter().map(|r| r.ratio.lower().clone()).min().expect("nonempty");
    Ok(UbiquityReport { records, kappa })
}

/// λ(∪_{N0<n≤N1} A_n^P(Ψ)) with the union bound Σ 2·#P_n·Ψ(n).
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedMeasure {
    pub value: MeasureValue,
    pub intervals: usize,
    pub components: usize,
    pub union_bound: Rational,
}

impl TruncatedMeasure {
    pub fn within_union_bound(&self) -> bool {
        self.value.upper() <= &self.union_bound
    }
}

pub fn truncated_limsup_measure(
    choice: &NumeratorChoice,
    psi: &crate::psi::PsiSpec,
    n0: u64,
    n1: u64,
    cfg: &EngineConfig,
) -> Result<TruncatedMeasure> {
    if n0 >= n1 {
        return Err(Error::Input(format!("need N0 < N1, got {n0} and {n1}")));
    }
    let mut layers = Vec::new();
    let mut total = 0usize;
    let mut bound_terms = Vec::new();
    for n in n0 + 1..=n1 {
        let r = psi.eval_u64(n)?;
        if r.is_zero() {
            continue;
        }
        let p = choice.subset(n);
        total += p.len();
        bound_terms.push(int(2 * p.len() as u64) * &r);
        if cfg.mode == MeasureMode::Exact && total > cfg.component_threshold {
            return Err(Error::Resource(format!(
                "more than {} intervals in exact mode; rerun with --mode certified",
                cfg.component_threshold
            )));
        }
        layers.push((n, Frac::from_rational(&r)?, p));
    }
    let mut raw = Vec::with_capacity(total);
    for (n, r, p) in &layers {
        for &a in p {
            let c = Frac::new(a as i128, *n as i128);
            let lo = c.try_sub(*r)?.max(Frac::ZERO);
            let hi = c.try_add(*r)?.min(Frac::ONE);
            if lo < hi {
                raw.push((lo, hi));
            }
        }
    }
    raw.sort_unstable_by_key(|x| x.0);
    let mut acc = SweepAccumulator::new(cfg);
    for (lo, hi) in raw {
        acc.push(lo, hi);
    }
    let (components, value) = acc.finish();
    Ok(TruncatedMeasure { value, intervals: total, components, union_bound: sum_balanced(bound_terms) })
}

/// 𝔼 X_t(I) for a given profile, without sampling: Σ f(n)·#(Q_n ∩ I)/n.
pub fn x_expectation(scheme: &BlockScheme, t: u32, interval: &RationalInterval, sieve: &SieveTable) -> Rational {
    let start = scheme.cut(t) + 1;
    let terms: Vec<(u64, u64)> = scheme
        .block_values(t)
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            let n = start + i as u64;
            (f * sieve.farey_count(n as usize, interval), n)
        })
        .collect();
    sum_fractions(&terms, |d| sieve.factorize(d as usize))
}

/// θ_I(n) summed over the block, for reports.
pub fn block_theta(scheme: &BlockScheme, t: u32, interval: &RationalInterval) -> u64 {
    (scheme.cut(t) + 1..=scheme.next_cut(t)).map(|n| theta(n, interval)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::build_sieve;
    use crate::frac::rat;
    use crate::model::CardinalityProfile;
    use crate::psi::PsiSpec;

    fn unit() -> RationalInterval {
        RationalInterval::unit()
    }

    #[test]
    fn x_full_is_sieve_sum() {
        let s = BlockScheme::build(CardinalityProfile::Full, 2, 3, 9).unwrap();
        let sieve = build_sieve(1024).unwrap();
        let p = NumeratorChoice::new(CardinalityProfile::Full, 1);
        for t in s.t_range() {
            let direct: u64 = (s.cut(t) + 1..=s.next_cut(t)).map(|n| sieve.phi(n as usize)).sum();
            assert_eq!(count_x_t(&p, &unit(), &s, t).unwrap(), direct);
        }
    }

    #[test]
    fn x_zero_on_empty_choice() {
        let s =
            BlockScheme::build(CardinalityProfile::Explicit([(100u64, 3u64)].into_iter().collect()), 2, 6, 6).unwrap();
        let p = NumeratorChoice::new(s.profile().clone(), 0);
        assert_eq!(s.block_sum(6), 3);
        let i = RationalInterval::parse("[0, 1/200]").unwrap();
        assert_eq!(count_x_t(&p, &i, &s, 6).unwrap(), 0);
    }

    #[test]
    fn mismatched_profile_rejected() {
        let s = BlockScheme::build(CardinalityProfile::Full, 2, 3, 4).unwrap();
        let p = NumeratorChoice::new(CardinalityProfile::Phi, 1);
        assert!(count_x_t(&p, &unit(), &s, 3).is_err());
    }

    #[test]
    fn z_full_covers_every_cell() {
        let s = BlockScheme::build(CardinalityProfile::Full, 2, 2, 8).unwrap();
        let p = NumeratorChoice::new(CardinalityProfile::Full, 1);
        let i = RationalInterval::parse("[1/5, 7/9]").unwrap();
        for t in s.t_range() {
            match count_z_t(&p, &i, &s, t).unwrap() {
                ZCount::Count { hit, cells } => assert_eq!(hit, cells),
                ZCount::BelowT0 => assert!(t < 4),
            }
        }
        let tiny = RationalInterval::parse("[1/3, 1/3]").unwrap();
        assert_eq!(count_z_t(&p, &tiny, &s, 8).unwrap(), ZCount::BelowT0);
    }

    #[test]
    fn x_mean_matches_hypergeometric_expectation() {
        let s = BlockScheme::build(CardinalityProfile::Phi, 2, 8, 8).unwrap();
        let sieve = build_sieve(512).unwrap();
        let r = chebyshev_x(&s, 8, &unit(), 1000, 0, &sieve).unwrap();
        let direct: Rational = (257..=512u64).map(|n| rat((sieve.phi(n as usize).pow(2)) as i64, n as i64)).sum();
        assert_eq!(r.expectation.as_ref().unwrap(), &direct);
        assert_eq!(x_expectation(&s, 8, &unit(), &sieve), direct);
        assert_eq!(r.mean_within_3_sigma(), Some(true));
        assert!(r.bound_from_proof);
        assert!(r.passed());
    }

    #[test]
    fn z_experiment_bounded_profile() {
        let s = BlockScheme::build(CardinalityProfile::Constant(1), 2, 10, 10).unwrap();
        let i = RationalInterval::parse("[1/4, 3/4]").unwrap();
        let r = chebyshev_z(&s, 10, &i, 1000, 3).unwrap();
        assert!(r.mean_above_bound());
        assert!(r.passed());
        assert_eq!(r.chebyshev_bound, rat(4, 1) / &r.expectation_bound);
    }

    #[test]
    fn cell_indicators_negatively_correlated() {
        let s = BlockScheme::build(CardinalityProfile::Constant(1), 2, 6, 6).unwrap();
        let rows = cell_covariances(&s, 6, &unit(), 10_000, 11, &[(0, 1), (5, 40), (10, 63)]).unwrap();
        for row in rows {
            assert!(row.passed(), "{row:?}");
        }
    }

    #[test]
    fn ratio_full_large_radius() {
        let s = BlockScheme::build(CardinalityProfile::Full, 2, 4, 7).unwrap();
        let p = NumeratorChoice::new(CardinalityProfile::Full, 0);
        for t in s.t_range() {
            let r = Rational::new(BigInt::one(), BigInt::from(2 * s.cut(t)));
            let v = local_ubiquity_ratio_with_radius(&p, &unit(), &s, t, &r, &EngineConfig::default()).unwrap();
            assert!(v.lower() >= &(Rational::one() - int(s.cut(t)).recip()));
            assert!(v.upper() <= &Rational::one());
        }
    }

    #[test]
    fn exact_and_certified_ratios_agree() {
        let s = BlockScheme::build(CardinalityProfile::Phi, 2, 5, 8).unwrap();
        let p = NumeratorChoice::new(CardinalityProfile::Phi, 0);
        let suite = RationalInterval::dyadic_suite(0, 2);
        let exact = ubiquity_sweep(&p, &s, &suite, &EngineConfig::default()).unwrap();
        let cert = ubiquity_sweep(&p, &s, &suite, &EngineConfig::certified()).unwrap();
        for (e, c) in exact.records.iter().zip(&cert.records) {
            let v = e.ratio.exact().unwrap();
            assert!(c.ratio.contains(v));
            assert!(v <= &Rational::one() && v >= &Rational::zero());
        }
        assert!(cert.kappa <= exact.kappa);
        assert_eq!(exact.per_t_min().len(), 4);
    }

    #[test]
    fn truncated_measure_properties() {
        let psi = PsiSpec::parse("closed_form c=1/2 alpha=2").unwrap();
        let p = NumeratorChoice::new(CardinalityProfile::Full, 0);
        let cfg = EngineConfig::default();
        let single = truncated_limsup_measure(&p, &psi, 9, 10, &cfg).unwrap();
        let layer = crate::intervals::approx_set(10, &(1..=10).collect::<Vec<_>>(), &rat(1, 200)).unwrap();
        assert_eq!(single.value.exact().unwrap(), layer.measure());
        let mut prev = Rational::zero();
        for n1 in [20, 40, 80] {
            let m = truncated_limsup_measure(&p, &psi, 0, n1, &cfg).unwrap();
            assert!(m.within_union_bound());
            assert!(m.value.exact().unwrap() >= &prev);
            prev = m.value.exact().unwrap().clone();
            let tail = truncated_limsup_measure(&p, &psi, 10, n1, &cfg).unwrap();
            assert!(tail.value.exact().unwrap() <= m.value.exact().unwrap());
        }
        let tight = EngineConfig { component_threshold: 10, ..cfg };
        assert!(truncated_limsup_measure(&p, &psi, 0, 80, &tight).unwrap_err().is_resource());
        let cert = EngineConfig { component_threshold: 10, ..EngineConfig::certified() };
        let b = truncated_limsup_measure(&p, &psi, 0, 80, &cert).unwrap();
        assert!(b.value.contains(&prev));
    }
}
