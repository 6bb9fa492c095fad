//! Python bindings. Every exact value crosses the boundary as a
//! `fractions.Fraction`; inputs accept `int`, `Fraction` or a string such
//! as `"3/7"`.

use dlab_core::arith;
use dlab_core::blocks::BlockScheme;
use dlab_core::counterexample::{self as cx, CSeq, CounterexampleSpec};
use dlab_core::frac::parse_rational;
use dlab_core::intervals::{self, EngineConfig, MeasureMode, MeasureValue};
use dlab_core::model::{self, CardinalityProfile, NumeratorChoice, StreamKey};
use dlab_core::numeric::Tau;
use dlab_core::psi::{self, CatlinBound, PsiSpec};
use dlab_core::ubiquity;
use dlab_core::{IntervalSet, Rational, RationalInterval};
use num_bigint::{BigInt, BigUint};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyString};
use pyo3::{create_exception, Borrowed};

create_exception!(dlab, ResourceError, PyRuntimeError, "A size or memory budget was exceeded.");

fn err(e: dlab_core::Error) -> PyErr {
    use dlab_core::Error as E;
    match e {
        E::Resource(m) => ResourceError::new_err(m),
        E::Internal(m) => PyRuntimeError::new_err(m),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// A rational argument or result.
pub struct Q(pub Rational);

impl<'a, 'py> FromPyObject<'a, 'py> for Q {
    type Error = PyErr;

    fn extract(obj: Borrowed<'a, 'py, PyAny>) -> PyResult<Q> {
        if let Ok(s) = obj.cast::<PyString>() {
            return parse_rational(s.to_str()?).map(Q).map_err(err);
        }
        let num: BigInt = obj.getattr("numerator")?.extract()?;
        let den: BigInt = obj.getattr("denominator")?.extract()?;
        if den == BigInt::from(0) {
            return Err(PyValueError::new_err("zero denominator"));
        }
        Ok(Q(Rational::new(num, den)))
    }
}

impl<'py> IntoPyObject<'py> for Q {
    type Target = PyAny;
    type Output = Bound<'py, PyAny>;
    type Error = PyErr;

    fn into_pyobject(self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let (n, d) = self.0.into_raw();
        py.import("fractions")?.getattr("Fraction")?.call1((n, d))
    }
}

/// Exact values become a Fraction, certified enclosures a `(lower, upper)` pair.
fn measure<'py>(py: Python<'py>, v: MeasureValue) -> PyResult<Bound<'py, PyAny>> {
    match v {
        MeasureValue::Exact(r) => Q(r).into_pyobject(py),
        MeasureValue::Bracket { lower, upper } => Ok((Q(lower), Q(upper)).into_pyobject(py)?.into_any()),
    }
}

fn components(s: &IntervalSet) -> Vec<(Q, Q)> {
    s.components().iter().map(|(a, b)| (Q(a.to_rational()), Q(b.to_rational()))).collect()
}

fn interval(lo: Q, hi: Q) -> PyResult<RationalInterval> {
    RationalInterval::from_rationals(&lo.0, &hi.0).map_err(err)
}

fn profile(s: &str) -> PyResult<CardinalityProfile> {
    CardinalityProfile::parse(s).map_err(err)
}

fn psi_spec(s: &str) -> PyResult<PsiSpec> {
    PsiSpec::parse(s).map_err(err)
}

fn engine(mode: &str) -> PyResult<EngineConfig> {
    let mode = MeasureMode::parse(mode).map_err(err)?;
    Ok(EngineConfig { mode, ..Default::default() })
}

/// Σ_{n≤N} n/φ(n), exactly.
#[pyfunction]
fn totient_ratio_sum(py: Python<'_>, n: usize) -> PyResult<Q> {
    py.detach(|| arith::totient_ratio_sum(n)).map(Q).map_err(err)
}

/// Euler's totient for n ≤ limit, as a list indexed by n (entry 0 is 0).
#[pyfunction]
fn totients(py: Python<'_>, limit: usize) -> PyResult<Vec<u32>> {
    let s = py.detach(|| arith::build_sieve(limit)).map_err(err)?;
    Ok(s.phi_slice().to_vec())
}

/// #{a/n in lowest terms lying in [lo, hi]}.
#[pyfunction]
fn farey_count(n: u64, lo: Q, hi: Q) -> PyResult<u64> {
    if n == 0 {
        return Err(PyValueError::new_err("n must be positive"));
    }
    Ok(arith::farey_count(n, &interval(lo, hi)?))
}

/// Integers n ≤ limit with φ(n) < n/(e^γ loglog n).
#[pyfunction]
fn phi_extremal_witness(limit: u64) -> PyResult<Vec<u64>> {
    Ok(arith::phi_extremal_witness(limit).map_err(err)?.into_iter().map(|w| w.n).collect())
}

/// Union of closed balls around `centers`, clipped to [0, 1]:
/// returns `(components, measure)`.
#[pyfunction]
fn thicken(centers: Vec<Q>, radius: Q) -> PyResult<(Vec<(Q, Q)>, Q)> {
    let centers: Vec<Rational> = centers.into_iter().map(|q| q.0).collect();
    let s = IntervalSet::thicken(&centers, &radius.0).map_err(err)?;
    Ok((components(&s), Q(s.measure().clone())))
}

/// The set of x within `radius` of a/n for a in `numerators`.
#[pyfunction]
fn approx_set(n: u64, numerators: Vec<u64>, radius: Q) -> PyResult<(Vec<(Q, Q)>, Q)> {
    let mut numerators = numerators;
    numerators.sort_unstable();
    numerators.dedup();
    let s = intervals::approx_set(n, &numerators, &radius.0).map_err(err)?;
    Ok((components(&s), Q(s.measure().clone())))
}

#[pyfunction]
fn full_residue_measure(n: u64, radius: Q) -> PyResult<Q> {
    if n == 0 {
        return Err(PyValueError::new_err("n must be positive"));
    }
    Ok(Q(intervals::full_residue_measure(&BigInt::from(n), &radius.0)))
}

/// Ψ(n) for a spec such as `"closed_form c=1/2 alpha=2"`.
#[pyfunction]
fn psi_eval(psi: &str, n: BigUint) -> PyResult<Q> {
    psi_spec(psi)?.eval(&n).map(Q).map_err(err)
}

/// Σ_{n≤N} f(n)·Ψ(n).
#[pyfunction]
fn series_partial(py: Python<'_>, profile_spec: &str, psi: &str, n: BigUint) -> PyResult<Q> {
    let (f, p) = (profile(profile_spec)?, psi_spec(psi)?);
    py.detach(|| psi::series_partial(&f, &p, &n)).map(Q).map_err(err)
}

/// Ψ̄(n) = max_k Ψ(kn) as `(value, multiplier, exact)`; `bound=None`
/// maximises over the support.
#[pyfunction]
#[pyo3(signature = (psi, n, bound=None))]
fn catlin_transform(psi: &str, n: BigUint, bound: Option<u64>) -> PyResult<(Q, Option<BigUint>, bool)> {
    let b = bound.map_or(CatlinBound::Support, CatlinBound::Finite);
    let v = psi::catlin_transform(&psi_spec(psi)?, &n, b).map_err(err)?;
    Ok((Q(v.value), v.multiplier, v.exact))
}

/// Uniform m-subset of {1..n}, sorted; the same `(seed, stream)` gives the
/// same subset.
#[pyfunction]
#[pyo3(signature = (n, m, seed, stream=0))]
fn sample_subset(n: u64, m: u64, seed: u64, stream: u64) -> PyResult<Vec<u64>> {
    let mut rng = StreamKey::new(seed, model::domain::SAMPLER_CHECK, stream).stream(n);
    model::sample_subset(n, m, &mut rng).map_err(err)
}

/// Mean and variance bound of #(m-subset ∩ D) for |D| = d.
#[pyfunction]
fn hypergeometric_moments(n: u64, m: u64, d: u64) -> PyResult<(Q, Q)> {
    let (mean, var) = model::hypergeometric_moments(n, m, d).map_err(err)?;
    Ok((Q(mean), Q(var)))
}

/// λ(I ∩ ∪ B(a/n, 1/F_t)) / λ(I) over block t of the base-k scheme.
#[pyfunction]
#[pyo3(signature = (profile_spec, k, t, lo, hi, seed=0, mode="exact"))]
#[allow(clippy::too_many_arguments)]
fn local_ubiquity_ratio<'py>(
    py: Python<'py>,
    profile_spec: &str,
    k: u64,
    t: u32,
    lo: Q,
    hi: Q,
    seed: u64,
    mode: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let f = profile(profile_spec)?;
    let i = interval(lo, hi)?;
    let cfg = engine(mode)?;
    let v = py
        .detach(|| {
            let scheme = BlockScheme::build(f.clone(), k, t, t)?;
            ubiquity::local_ubiquity_ratio(&NumeratorChoice::new(f, seed), &i, &scheme, t, &cfg)
        })
        .map_err(err)?;
    measure(py, v)
}

/// λ(∪_{N0<n≤N1} A_n(Ψ)) with its union bound. `profile_spec="uniform"`
/// selects the coin-flip model.
#[pyfunction]
#[pyo3(signature = (profile_spec, psi, n0, n1, seed=0, mode="exact"))]
fn truncated_limsup_measure<'py>(
    py: Python<'py>,
    profile_spec: &str,
    psi: &str,
    n0: u64,
    n1: u64,
    seed: u64,
    mode: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let choice = if profile_spec.trim() == "uniform" {
        NumeratorChoice::uniform(seed)
    } else {
        NumeratorChoice::new(profile(profile_spec)?, seed)
    };
    let p = psi_spec(psi)?;
    let cfg = engine(mode)?;
    let m = py.detach(|| ubiquity::truncated_limsup_measure(&choice, &p, n0, n1, &cfg)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("measure", measure(py, m.value)?)?;
    d.set_item("union_bound", Q(m.union_bound))?;
    d.set_item("intervals", m.intervals)?;
    d.set_item("components", m.components)?;
    Ok(d)
}

/// Builds the factorial-block counterexample and returns its exact ledger:
/// per-block layer measures, φ-series ratios and the totals.
#[pyfunction]
#[pyo3(signature = (m, c="geometric 1/2", tau="loglog_inv_sqrt"))]
fn counterexample<'py>(py: Python<'py>, m: Vec<u64>, c: &str, tau: &str) -> PyResult<Bound<'py, PyDict>> {
    let c = CSeq::parse(c).map_err(err)?;
    let tau = Tau::parse(tau).ok_or_else(|| PyValueError::new_err(format!("unknown tau {tau:?}")))?;
    let spec = CounterexampleSpec::build(c, tau, m).map_err(err)?;
    let blocks = spec.blocks.len();
    let (ledger, phi) = py
        .detach(|| {
            Ok::<_, dlab_core::Error>((
                cx::verify_measure_vanishing(&spec, blocks)?,
                cx::phi_series_check(&spec, blocks)?,
            ))
        })
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("keys", spec.blocks.iter().map(|b| b.keys.clone()).collect::<Vec<_>>())?;
    d.set_item("layer_measures", ledger.rows.iter().map(|r| Q(r.measure.clone())).collect::<Vec<_>>())?;
    d.set_item("layer_total", Q(ledger.total.clone()))?;
    d.set_item("layer_bound", Q(ledger.bound.clone()))?;
    d.set_item("measure_holds", ledger.holds())?;
    d.set_item("phi_ratios", phi.rows.iter().map(|r| Q(r.ratio())).collect::<Vec<_>>())?;
    d.set_item("phi_total", Q(phi.total.clone()))?;
    d.set_item("c_total", Q(phi.c_total.clone()))?;
    d.set_item("phi_holds", phi.holds())?;
    Ok(d)
}

#[pymodule]
pub fn dlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ResourceError", m.py().get_type::<ResourceError>())?;
    m.add_function(wrap_pyfunction!(totient_ratio_sum, m)?)?;
    m.add_function(wrap_pyfunction!(totients, m)?)?;
    m.add_function(wrap_pyfunction!(farey_count, m)?)?;
    m.add_function(wrap_pyfunction!(phi_extremal_witness, m)?)?;
    m.add_function(wrap_pyfunction!(thicken, m)?)?;
    m.add_function(wrap_pyfunction!(approx_set, m)?)?;
    m.add_function(wrap_pyfunction!(full_residue_measure, m)?)?;
    m.add_function(wrap_pyfunction!(psi_eval, m)?)?;
    m.add_function(wrap_pyfunction!(series_partial, m)?)?;
    m.add_function(wrap_pyfunction!(catlin_transform, m)?)?;
    m.add_function(wrap_pyfunction!(sample_subset, m)?)?;
    m.add_function(wrap_pyfunction!(hypergeometric_moments, m)?)?;
    m.add_function(wrap_pyfunction!(local_ubiquity_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(truncated_limsup_measure, m)?)?;
    m.add_function(wrap_pyfunction!(counterexample, m)?)?;
    Ok(())
}
