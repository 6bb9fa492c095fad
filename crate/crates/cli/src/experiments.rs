//! One runner per experiment kind. Each consumes its config section,
//! rejects leftover keys before doing any work, and returns an artifact.

use crate::artifact::{flag, fmt_f64, fmt_measure, fmt_rat, sci, Artifact, INFO};
use crate::config::{parse_bool, parse_list_u64, parse_range, parse_rat, parse_u64, Config, Kind, Section};
use crate::CliError;
use dlab_core::arith::{build_sieve, niederreiter_threshold, phi_extremal_witness, totient_ratio_sum_with};
use dlab_core::blocks::BlockScheme;
use dlab_core::counterexample::{
    catlin_lifting_check, divergence_ledger, phi_series_check, sweet_spot_profile, union_collapse, verify_containment,
    verify_keys, verify_measure_vanishing, CSeq, CounterexampleSpec,
};
use dlab_core::intervals::{full_residue_measure, EngineConfig, MeasureMode};
use dlab_core::model::{
    binomial_chebyshev_bound, binomial_concentration_trial, binomial_expectation, binomial_variance, domain,
    elementary_inequality, hypergeometric_moments, hypergeometric_variance, sample_subset, CardinalityProfile,
    NumeratorChoice, StreamKey,
};
use dlab_core::numeric::{Bracket, Tau, THREE_OVER_PI_SQ, TOTIENT_RATIO_MEAN};
use dlab_core::oracle::monte_carlo_measure;
use dlab_core::psi::PsiSpec;
use dlab_core::ubiquity::{cell_covariances, chebyshev_x, chebyshev_z, ubiquity_sweep, ChebyshevReport};
use dlab_core::{Rational, RationalInterval};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;

/// Resolved run parameters after command-line overrides.
#[derive(Clone, Copy, Debug)]
pub struct RunContext {
    pub seed: u64,
    pub mode: MeasureMode,
}

impl RunContext {
    fn engine(&self) -> EngineConfig {
        EngineConfig { mode: self.mode, ..EngineConfig::default() }
    }
}

pub fn run(config: Config, ctx: RunContext) -> Result<Artifact, CliError> {
    let body = config.body;
    match config.kind {
        Kind::SieveChecks => sieve_checks(body, ctx.seed),
        Kind::Concentration => concentration(body, ctx),
        Kind::Ubiquity => ubiquity(body, ctx),
        Kind::TruncatedMeasure => truncated(body, ctx),
        Kind::Counterexample => counterexample(body),
        Kind::Catlin => catlin(body, ctx),
    }
}

fn err_str<E: ToString>(e: E) -> String {
    e.to_string()
}

fn parse_profile(s: &str) -> Result<CardinalityProfile, String> {
    CardinalityProfile::parse(s).map_err(err_str)
}

fn parse_interval(s: &str) -> Result<RationalInterval, String> {
    RationalInterval::parse(s).map_err(err_str)
}

fn parse_tau(s: &str) -> Result<Tau, String> {
    Tau::parse(s).ok_or_else(|| format!("unknown tau {s:?} (loglog_inv_sqrt | logloglog_inv)"))
}

fn decimal(x: f64) -> String {
    format!("{x:.9}")
}

const SIEVE_COLUMNS: &[&str] = &["check", "parameter", "value", "target", "pass", "tag"];

fn sieve_checks(mut s: Section, seed: u64) -> Result<Artifact, CliError> {
    let limit = s.get_or("limit", 1_000_000, parse_u64)?;
    let tol = s.get_or("mean_tolerance", Rational::new(1.into(), 1000.into()), parse_rat)?;
    let interval = s.get_or("niederreiter_interval", RationalInterval::parse("[1/3, 2/3]").unwrap(), parse_interval)?;
    let upto = s.get_or("niederreiter_upto", 10_000, parse_u64)?;
    let n0_max = s.get_or("n0_max", 100, parse_u64)?;
    let hyper = s.get_or("hypergeometric", vec![10, 5, 4], parse_list_u64)?;
    let sampler_trials = s.get_or("sampler_trials", 100_000, parse_u64)?;
    let elementary_max = s.get_or("elementary_max", 100, parse_u64)?;
    let residue_max = s.get_or("residue_max", 500, parse_u64)?;
    let witness_limit = s.get_or("witness_limit", 100_000, parse_u64)?;
    s.finish()?;
    if hyper.len() != 3 || hyper[0] > 20 || hyper[1] > hyper[0] || hyper[2] > hyper[0] || hyper[0] == 0 {
        return Err(CliError::Core(dlab_core::Error::Input(format!(
            "hypergeometric must be `n, m, D` with m, D ≤ n ≤ 20, got {hyper:?}"
        ))));
    }
    let tol_f = tol.to_f64().unwrap_or(0.0);
    let mut a = Artifact::new(Kind::SieveChecks, SIEVE_COLUMNS);
    let sieve = build_sieve(limit.max(upto).max(2) as usize)?;

    let nn = limit as f64;
    let mean = sieve.totient_sum(limit as usize) as f64 / (nn * nn);
    a.push(vec![
        "totient-mean".into(),
        format!("N={limit}"),
        decimal(mean),
        format!("{} ± {}", decimal(THREE_OVER_PI_SQ), fmt_rat(&tol)),
        flag((mean - THREE_OVER_PI_SQ).abs() <= tol_f),
        "average order of phi(n) is 6n/pi^2".into(),
    ]);
    let ratio = (totient_ratio_sum_with(&sieve, limit as usize) / Rational::from_integer(limit.into()))
        .to_f64()
        .unwrap_or(f64::NAN);
    a.push(vec![
        "totient-ratio-mean".into(),
        format!("N={limit}"),
        decimal(ratio),
        format!("{} ± {}", decimal(TOTIENT_RATIO_MEAN), fmt_rat(&tol)),
        flag((ratio - TOTIENT_RATIO_MEAN).abs() <= tol_f),
        "mean of n/phi(n) is 315 zeta(3)/(2 pi^4)".into(),
    ]);

    let n0 = niederreiter_threshold(&sieve, &interval, upto as usize);
    a.push(vec![
        "niederreiter-threshold".into(),
        format!("I={interval} n<={upto}"),
        n0.map_or("none".into(), |v| v.to_string()),
        format!("<= {n0_max}"),
        flag(n0.is_some_and(|v| v as u64 <= n0_max)),
        "Farey count #(Q_n in I) >= phi(n) lambda(I)/2".into(),
    ]);

    hypergeometric_rows(&mut a, hyper[0], hyper[1], hyper[2], sampler_trials, seed)?;

    let mut pairs = 0u64;
    let mut ok = 0u64;
    for n in 1..=elementary_max {
        for m in 0..=n {
            pairs += 1;
            ok += u64::from(elementary_inequality(n, m));
        }
    }
    a.push(vec![
        "elementary-inequality".into(),
        format!("n<={elementary_max}"),
        format!("{ok}/{pairs}"),
        format!("{pairs}/{pairs}"),
        flag(ok == pairs),
        "1 - m/n <= (1 - 1/n)^m".into(),
    ]);

    // Enumeration in integer units of 1/(4n^2): the center a/n sits at 4na
    // and the radius j/(4n^2) is j units.
    let bad: u64 = (1..=residue_max)
        .into_par_iter()
        .map(|n| {
            let nb = BigInt::from(n);
            let scale = 4 * n * n;
            let mut bad = 0;
            for j in 0..=8 * n {
                let (mut covered, mut reach) = (0u64, 0u64);
                for a in 1..=n {
                    let lo = (4 * n * a).saturating_sub(j).max(reach);
                    let hi = (4 * n * a + j).min(scale);
                    if hi > lo {
                        covered += hi - lo;
                        reach = hi;
                    }
                }
                let r = Rational::new(BigInt::from(j), BigInt::from(scale));
                let enumerated = Rational::new(BigInt::from(covered), BigInt::from(scale));
                bad += u64::from(enumerated != full_residue_measure(&nb, &r));
            }
            bad
        })
        .sum();
    let grid: u64 = (1..=residue_max).map(|n| 8 * n + 1).sum();
    a.push(vec![
        "full-residue-closed-form".into(),
        format!("n<={residue_max} r=j/(4n^2) j<=8n"),
        format!("{} mismatches in {grid}", bad),
        "0".into(),
        flag(bad == 0),
        "closed form of the full residue layer measure".into(),
    ]);

    let w = phi_extremal_witness(witness_limit)?;
    let primorials: Vec<String> = w.iter().filter(|x| x.primorial).map(|x| x.n.to_string()).collect();
    a.push(vec![
        "phi-extremal-witnesses".into(),
        format!("16<=n<={witness_limit}"),
        format!("{} witnesses; primorials {}", w.len(), primorials.join(" ")),
        "nonempty".into(),
        flag(!w.is_empty()),
        "phi(n) < n/(e^gamma loglog n) infinitely often".into(),
    ]);
    Ok(a)
}

fn hypergeometric_rows(a: &mut Artifact, n: u64, m: u64, d: u64, trials: u64, seed: u64) -> Result<(), CliError> {
    // brute force over all m-subsets of [n], distinguished = {1..D}
    let mut count = 0u64;
    let mut sum = 0u64;
    let mut sum_sq = 0u64;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as u64 != m {
            continue;
        }
        let x = (mask & ((1u32 << d) - 1)).count_ones() as u64;
        count += 1;
        sum += x;
        sum_sq += x * x;
    }
    let c = Rational::from_integer(count.into());
    let mean = Rational::from_integer(sum.into()) / &c;
    let var = Rational::from_integer(sum_sq.into()) / &c - &mean * &mean;
    let (closed_mean, var_bound) = hypergeometric_moments(n, m, d)?;
    let exact_var = hypergeometric_variance(n, m, d);
    let params = format!("n={n} m={m} D={d} ({count} draws)");
    a.push(vec![
        "hypergeometric-mean".into(),
        params.clone(),
        fmt_rat(&mean),
        fmt_rat(&closed_mean),
        flag(mean == closed_mean),
        "hypergeometric mean mD/n".into(),
    ]);
    a.push(vec![
        "hypergeometric-variance".into(),
        params,
        fmt_rat(&var),
        format!("= {} <= {}", fmt_rat(&exact_var), fmt_rat(&var_bound)),
        flag(var == exact_var && var <= var_bound),
        "hypergeometric variance bound mD(n-D)/n^2".into(),
    ]);
    let mut hits = vec![0u64; n as usize + 1];
    for r in 0..trials {
        let mut rng = StreamKey::new(seed, domain::SAMPLER_CHECK, r).stream(n);
        for x in sample_subset(n, m, &mut rng)? {
            hits[x as usize] += 1;
        }
    }
    let p = m as f64 / n as f64;
    let sigma = (p * (1.0 - p) / trials as f64).sqrt();
    let worst = hits[1..].iter().map(|&h| ((h as f64 / trials as f64 - p) / sigma).abs()).fold(0.0, f64::max);
    a.push(vec![
        "sampler-inclusion".into(),
        format!("n={n} m={m} trials={trials}"),
        format!("max |z| = {worst:.4}"),
        "<= 3".into(),
        flag(worst <= 3.0),
        "uniform m-subset sampler".into(),
    ]);
    Ok(())
}

const CONCENTRATION_COLUMNS: &[&str] = &[
    "statistic",
    "t",
    "interval",
    "trials",
    "block_sum",
    "expectation",
    "expectation_bound",
    "bound_source",
    "variance_bound",
    "failures",
    "empirical_rate",
    "chebyshev_bound",
    "mean",
    "mean_check",
    "pass",
    "tag",
];

fn opt_flag(b: Option<bool>) -> String {
    b.map_or("-".into(), flag)
}

fn concentration(mut s: Section, ctx: RunContext) -> Result<Artifact, CliError> {
    let statistic = s.get_or("statistic", "x".to_string(), |v| match v {
        "binomial" | "x" | "z" => Ok(v.to_string()),
        _ => Err(format!("unknown statistic {v:?} (binomial | x | z)")),
    })?;
    let mut a = Artifact::new(Kind::Concentration, CONCENTRATION_COLUMNS);
    if statistic == "binomial" {
        let n_max = s.get_or("n_max", 1000, parse_u64)?;
        let trials = s.get_or("trials", 10_000, parse_u64)?;
        s.finish()?;
        let xs: Vec<(u64, bool)> = (0..trials)
            .into_par_iter()
            .map(|r| {
                let t = binomial_concentration_trial(n_max, StreamKey::new(ctx.seed, domain::BINOMIAL, r));
                (t.x, t.passed)
            })
            .collect();
        let failures = xs.iter().filter(|x| !x.1).count() as u64;
        let e = binomial_expectation(n_max);
        let var = binomial_variance(n_max);
        let bound = binomial_chebyshev_bound(n_max);
        let rate = Rational::new(failures.into(), trials.max(1).into());
        let mean = xs.iter().map(|x| x.0 as f64).sum::<f64>() / trials.max(1) as f64;
        let se = (var.to_f64().unwrap_or(0.0) / trials.max(1) as f64).sqrt();
        let mean_ok = (mean - e.to_f64().unwrap_or(0.0)).abs() <= 3.0 * se;
        a.push(vec![
            "X_N".into(),
            format!("N={n_max}"),
            "-".into(),
            trials.to_string(),
            "-".into(),
            fmt_rat(&e),
            fmt_rat(&e),
            "exact".into(),
            fmt_rat(&var),
            failures.to_string(),
            fmt_rat(&rate),
            sci(&bound),
            fmt_f64(mean),
            flag(mean_ok),
            flag(rate <= bound && mean_ok),
            "Chebyshev bound for X_N under coin flips".into(),
        ]);
        return Ok(a);
    }
    let profile = s.get_or("profile", CardinalityProfile::Phi, parse_profile)?;
    let k = s.get_or("k", 2, parse_u64)?;
    let (t0, t1) = s.required_with("t", parse_range)?;
    let interval = s.get_or("interval", RationalInterval::unit(), parse_interval)?;
    let trials = s.get_or("trials", 1000, parse_u64)?;
    let pairs = s.parse_with("covariance_pairs", parse_pairs)?;
    let cov_trials = s.get_or("covariance_trials", 10_000, parse_u64)?;
    s.finish()?;
    if pairs.is_some() && statistic != "z" {
        return Err(CliError::Core(dlab_core::Error::Input("covariance_pairs needs statistic = z".into())));
    }
    let scheme = BlockScheme::build(profile, k, t0, t1)?;
    let sieve = if statistic == "x" { Some(scheme.sieve()?) } else { None };
    for t in scheme.t_range() {
        let r = match &sieve {
            Some(sv) => chebyshev_x(&scheme, t, &interval, trials, ctx.seed, sv)?,
            None => chebyshev_z(&scheme, t, &interval, trials, ctx.seed)?,
        };
        a.push(chebyshev_row(&r));
    }
    if let Some(pairs) = pairs {
        for row in cell_covariances(&scheme, t1, &interval, cov_trials, ctx.seed, &pairs)? {
            a.push(vec![
                format!("cov(Y_{},Y_{})", row.k, row.l),
                t1.to_string(),
                interval.to_string(),
                cov_trials.to_string(),
                scheme.block_sum(t1).to_string(),
                "-".into(),
                "-".into(),
                "-".into(),
                "-".into(),
                "-".into(),
                "-".into(),
                format!("<= 3 se = {}", fmt_f64(3.0 * row.standard_error)),
                fmt_f64(row.covariance),
                "-".into(),
                flag(row.passed()),
                "negative correlation of grid cell hits".into(),
            ]);
        }
    }
    Ok(a)
}

fn parse_pairs(v: &str) -> Result<Vec<(u64, u64)>, String> {
    v.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            let (a, b) = p.split_once(':').ok_or_else(|| format!("expected k:l, got {p:?}"))?;
            Ok((parse_u64(a.trim())?, parse_u64(b.trim())?))
        })
        .collect()
}

fn chebyshev_row(r: &ChebyshevReport) -> Vec<String> {
    let dash = || "-".to_string();
    let (mean_check, tag) = match r.statistic {
        dlab_core::ubiquity::Statistic::X => (r.mean_within_3_sigma(), "Chebyshev bound for X_t(I), variance <= F_t/4"),
        dlab_core::ubiquity::Statistic::Z => {
            ((!r.below_t0).then(|| r.mean_above_bound()), "Chebyshev bound for Z_t(I), variance <= mean")
        }
    };
    if r.below_t0 {
        return vec![
            r.statistic.as_str().into(),
            r.t.to_string(),
            r.interval.to_string(),
            "0".into(),
            r.block_sum.to_string(),
            dash(),
            dash(),
            "below t0".into(),
            dash(),
            dash(),
            dash(),
            dash(),
            dash(),
            dash(),
            INFO.into(),
            tag.into(),
        ];
    }
    let source = if r.bound_from_proof { "proof" } else { "exact mean (Farey count hypothesis fails)" };
    vec![
        r.statistic.as_str().into(),
        r.t.to_string(),
        r.interval.to_string(),
        r.trials.to_string(),
        r.block_sum.to_string(),
        r.expectation.as_ref().map_or_else(dash, sci),
        sci(&r.expectation_bound),
        source.into(),
        r.variance_bound.as_ref().map_or_else(dash, fmt_rat),
        r.failures.to_string(),
        fmt_rat(&r.empirical_rate()),
        sci(&r.chebyshev_bound),
        fmt_f64(r.mean()),
        opt_flag(mean_check),
        flag(r.passed() && mean_check != Some(false)),
        tag.into(),
    ]
}

fn parse_suite(v: &str) -> Result<Vec<RationalInterval>, String> {
    if let Some(levels) = v.strip_prefix("dyadic") {
        let (lo, hi) = parse_range(levels.trim())?;
        if hi > 20 {
            return Err(format!("dyadic level {hi} too fine (max 20)"));
        }
        return Ok(RationalInterval::dyadic_suite(lo, hi));
    }
    v.split('|').map(str::trim).filter(|p| !p.is_empty()).map(parse_interval).collect()
}

const UBIQUITY_COLUMNS: &[&str] = &["t", "interval", "block_sum", "components", "ratio", "ratio_lower", "pass", "tag"];

fn ubiquity(mut s: Section, ctx: RunContext) -> Result<Artifact, CliError> {
    let profile = s.get_or("profile", CardinalityProfile::Phi, parse_profile)?;
    let k = s.get_or("k", 2, parse_u64)?;
    let (t0, t1) = s.required_with("t", parse_range)?;
    let suite = s.get_or("intervals", RationalInterval::dyadic_suite(0, 4), parse_suite)?;
    let kappa_min = s.get_or("kappa_min", Rational::new(1.into(), 100.into()), parse_rat)?;
    s.finish()?;
    let scheme = BlockScheme::build(profile.clone(), k, t0, t1)?;
    let choice = NumeratorChoice::new(profile, ctx.seed);
    let report = ubiquity_sweep(&choice, &scheme, &suite, &ctx.engine())?;
    let mut a = Artifact::new(Kind::Ubiquity, UBIQUITY_COLUMNS);
    for r in &report.records {
        a.push(vec![
            r.t.to_string(),
            r.interval.to_string(),
            r.block_sum.to_string(),
            r.components.to_string(),
            fmt_measure(&r.ratio),
            sci(r.ratio.lower()),
            flag(r.ratio.lower() >= &kappa_min),
            format!("local ubiquity floor kappa >= {}", fmt_rat(&kappa_min)),
        ]);
    }
    Ok(a)
}

const TRUNCATED_COLUMNS: &[&str] = &["check", "value", "bound", "detail", "pass", "tag"];

fn truncated(mut s: Section, ctx: RunContext) -> Result<Artifact, CliError> {
    let choice = s.get_or("profile", NumeratorChoice::new(CardinalityProfile::Full, ctx.seed), |v| {
        if v == "uniform" {
            Ok(NumeratorChoice::uniform(ctx.seed))
        } else {
            parse_profile(v).map(|p| NumeratorChoice::new(p, ctx.seed))
        }
    })?;
    let psi = s.required_with("psi", |v| PsiSpec::parse(v).map_err(err_str))?;
    let n0 = s.get_or("n0", 0, parse_u64)?;
    let n1 = s.required_with("n1", parse_u64)?;
    let points = s.get_or("mc_points", 100_000, parse_u64)?;
    let sigmas = s.get_or("mc_sigmas", 3, parse_u64)?;
    s.finish()?;
    let m = dlab_core::ubiquity::truncated_limsup_measure(&choice, &psi, n0, n1, &ctx.engine())?;
    let mut a = Artifact::new(Kind::TruncatedMeasure, TRUNCATED_COLUMNS);
    a.push(vec![
        "measure".into(),
        fmt_measure(&m.value),
        fmt_rat(&m.union_bound),
        format!("{} intervals, {} components, N0={n0} N1={n1}", m.intervals, m.components),
        flag(m.within_union_bound()),
        "union bound sum 2 #P_n Psi(n)".into(),
    ]);
    if points > 0 {
        let mc = monte_carlo_measure(&choice, &psi, n0, n1, points, ctx.seed)?;
        let v = m.value.midpoint_f64();
        let width = m.value.width().to_f64().unwrap_or(0.0);
        let agrees = mc.agrees(v, sigmas as f64) || (mc.p_hat() - v).abs() <= width;
        a.push(vec![
            "monte-carlo".into(),
            fmt_f64(mc.p_hat()),
            format!("{} ± {} sigma = {}", fmt_f64(v), sigmas, fmt_f64(sigmas as f64 * mc.sigma(v))),
            format!("{}/{} hits", mc.hits, mc.points),
            flag(agrees),
            "independent point-membership oracle".into(),
        ]);
    }
    Ok(a)
}

const LEDGER_COLUMNS: &[&str] = &["j", "check", "value", "bound", "verdict", "pass", "tag"];

fn spec_from(s: &mut Section) -> Result<CounterexampleSpec, CliError> {
    let m = s.required_with("M", parse_list_u64)?;
    let c = s.required_with("c", |v| CSeq::parse(v).map_err(err_str))?;
    let tau = s.get_or("tau", Tau::InvSqrtLogLog, parse_tau)?;
    Ok(CounterexampleSpec::build(c, tau, m)?)
}

fn bracket(b: &Bracket) -> String {
    format!("[{}, {}]", fmt_f64(b.lo), fmt_f64(b.hi))
}

fn counterexample(mut s: Section) -> Result<Artifact, CliError> {
    let spec = spec_from(&mut s)?;
    let blocks = s.get_or("blocks", spec.blocks.len() as u64, parse_u64)? as usize;
    let f_spec = s.get_or("f", "sweet-spot".to_string(), |v| Ok(v.to_string()))?;
    let off = s.get_or("off_support", Rational::from_integer(1.into()), parse_rat)?;
    let require_mj = s.get_or("require_c_over_tau", false, parse_bool)?;
    s.finish()?;
    let f = if f_spec == "sweet-spot" { sweet_spot_profile(&spec, off)? } else { CardinalityProfile::parse(&f_spec)? };
    let blocks = blocks.min(spec.blocks.len());
    let mut a = Artifact::new(Kind::Counterexample, LEDGER_COLUMNS);

    let keys = verify_keys(&spec);
    row(
        &mut a,
        "*".into(),
        "key-distinctness",
        format!("{} keys, {} distinct", keys.keys, keys.distinct),
        "all distinct, decreasing in block, blocks separated".into(),
        "exact",
        flag(keys.holds()),
        "keys k_i = K_j/i pairwise distinct",
    );
    row(
        &mut a,
        "*".into(),
        "c-series",
        spec.c.to_string(),
        "-".into(),
        spec.c.convergence(),
        INFO.into(),
        "sum c_j converges",
    );

    let measures = verify_measure_vanishing(&spec, blocks)?;
    let phi = phi_series_check(&spec, blocks)?;
    let chain = divergence_ledger(&spec, &f, blocks)?;
    for (idx, b) in spec.blocks[..blocks].iter().enumerate() {
        let j = b.j.to_string();
        row(
            &mut a,
            j.clone(),
            "block",
            format!("M={} K={}", b.m, fmt_rat(&Rational::from_integer(b.k.clone().into()))),
            format!("Psi(k_i) = {}", fmt_rat(&b.value)),
            "exact",
            INFO.into(),
            "Psi(K_j/i) = c_j/K_j",
        );
        let c = verify_containment(&spec, b.j)?;
        row(
            &mut a,
            j.clone(),
            "containment",
            c.witness(),
            format!("A_(K_j/i) in A_(K_j), i<={}", b.m),
            if c.exact() { "exact" } else { "structural" },
            flag(c.holds()),
            "layer containment",
        );
        let lm = &measures.rows[idx];
        row(
            &mut a,
            j.clone(),
            "layer-measure",
            fmt_rat(&lm.measure),
            format!("2c_j = {}", fmt_rat(&lm.bound())),
            if lm.capped { "capped (c_j >= 1/2)" } else { "2c_j - c_j/K_j" },
            flag(lm.holds()),
            "layer measure 2c_j - c_j/K_j <= 2c_j",
        );
        let pr = &phi.rows[idx];
        row(
            &mut a,
            j.clone(),
            "phi-series",
            fmt_rat(&pr.value),
            format!("c_j = {}", fmt_rat(&pr.c)),
            &format!("ratio {}", fmt_rat(&pr.ratio())),
            flag(pr.holds()),
            "phi-series block value <= c_j",
        );
        let d = &chain[idx];
        row(
            &mut a,
            j.clone(),
            "series-block",
            fmt_rat(&d.s),
            "-".into(),
            &f.name(),
            INFO.into(),
            "S_j = sum_i f(k_i) c_j/K_j",
        );
        for (name, lhs, rhs, v) in [
            ("chain S_j>=L1", Bracket::from_rational(&d.s), d.l1, d.s_ge_l1),
            ("chain L1>=L2", d.l1, d.l2, d.l1_ge_l2),
            ("chain L2>=L3", d.l2, d.l3, d.l2_ge_l3),
        ] {
            row(
                &mut a,
                j.clone(),
                name,
                bracket(&lhs),
                bracket(&rhs),
                v.as_str(),
                flag(v.holds()),
                "divergence lower-bound chain",
            );
        }
        let cot = d.c_over_tau;
        let big = Bracket::exact(1.0).le(&cot);
        row(
            &mut a,
            j.clone(),
            "c_j/tau((M_j-1)!)",
            bracket(&cot),
            ">= 1".into(),
            big.as_str(),
            if require_mj { flag(big.holds()) } else { INFO.into() },
            "c_j/tau((M_j-1)!) trend",
        );
    }
    row(
        &mut a,
        "all".into(),
        "layer-total",
        fmt_rat(&measures.total),
        format!("sum 2c_j = {}", fmt_rat(&measures.bound)),
        "exact",
        flag(measures.total <= measures.bound && measures.holds()),
        "Borel-Cantelli budget sum 2c_j",
    );
    if let Some(u) = &measures.union {
        row(
            &mut a,
            "all".into(),
            "layer-union",
            fmt_rat(u),
            format!("sum 2c_j = {}", fmt_rat(&measures.bound)),
            "exact",
            flag(u <= &measures.bound),
            "Borel-Cantelli budget sum 2c_j",
        );
    }
    if let Some((all, tops)) = union_collapse(&spec, blocks)? {
        row(
            &mut a,
            "all".into(),
            "union-collapse",
            fmt_rat(&all),
            format!("= {}", fmt_rat(&tops)),
            "exact",
            flag(all == tops),
            "union over all keys equals union of top layers",
        );
    }
    row(
        &mut a,
        "all".into(),
        "phi-series-total",
        fmt_rat(&phi.total),
        format!("sum c_j = {}", fmt_rat(&phi.c_total)),
        "exact",
        flag(phi.holds()),
        "phi-series convergence",
    );
    Ok(a)
}

#[allow(clippy::too_many_arguments)]
fn row(a: &mut Artifact, j: String, check: &str, value: String, bound: String, verdict: &str, pass: String, tag: &str) {
    a.push(vec![j, check.into(), value, bound, verdict.into(), pass, tag.into()]);
}

const CATLIN_COLUMNS: &[&str] = &["check", "value", "bound", "pass", "tag"];

fn catlin(mut s: Section, ctx: RunContext) -> Result<Artifact, CliError> {
    let spec = spec_from(&mut s)?;
    let points = s.get_or("points", 1000, parse_u64)?;
    s.finish()?;
    let r = catlin_lifting_check(&spec, points as usize, ctx.seed)?;
    let mut a = Artifact::new(Kind::Catlin, CATLIN_COLUMNS);
    let tag = "Catlin witness lifting (k a, k n)";
    a.push(vec![
        "witnesses".into(),
        r.witnesses.to_string(),
        format!(">= 1 among {} points x {} denominators", r.points, r.denominators),
        flag(r.witnesses > 0),
        tag.into(),
    ]);
    a.push(vec![
        "lifted".into(),
        r.lifted.to_string(),
        format!("= {}", r.witnesses),
        flag(r.lifted == r.witnesses),
        tag.into(),
    ]);
    a.push(vec![
        "pointwise".into(),
        flag(r.pointwise_ok),
        "Psi(n) <= Psi-bar(n)".into(),
        flag(r.pointwise_ok),
        "Catlin transform dominates Psi".into(),
    ]);
    Ok(a)
}
