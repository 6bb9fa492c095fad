use pyo3::prelude::*;
use pyo3::types::PyDict;

fn with_module<R>(f: impl for<'py> FnOnce(Python<'py>, Bound<'py, PyModule>) -> PyResult<R>) -> R {
    Python::initialize();
    Python::attach(|py| {
        let m = pyo3::wrap_pymodule!(dlab::dlab)(py).into_bound(py).cast_into::<PyModule>().unwrap();
        f(py, m)
    })
    .unwrap()
}

type Pair<'py> = (Bound<'py, PyAny>, Bound<'py, PyAny>);

fn fraction<'py>(py: Python<'py>, n: i64, d: i64) -> Bound<'py, PyAny> {
    py.import("fractions").unwrap().getattr("Fraction").unwrap().call1((n, d)).unwrap()
}

#[test]
fn results_are_fractions() {
    with_module(|py, m| {
        let v = m.getattr("full_residue_measure")?.call1((3u64, fraction(py, 1, 36)))?;
        assert_eq!(v.get_type().name()?.to_string(), "Fraction");
        // 2r < 1/n: 2rn - r
        assert!(v.eq(fraction(py, 5, 36))?);
        let (mean, var): (Bound<PyAny>, Bound<PyAny>) =
            m.getattr("hypergeometric_moments")?.call1((10u64, 5u64, 4u64))?.extract()?;
        assert!(mean.eq(2)? && var.eq(fraction(py, 6, 5))?);
        Ok(())
    });
}

#[test]
fn string_and_int_arguments() {
    with_module(|py, m| {
        let (comps, total): (Vec<Pair>, Bound<PyAny>) = m.getattr("thicken")?.call1((vec!["1/2"], "1/4"))?.extract()?;
        assert_eq!(comps.len(), 1);
        assert!(total.eq(fraction(py, 1, 2))?);
        assert!(m.getattr("thicken")?.call1((vec!["x"], 0)).is_err());
        Ok(())
    });
}

#[test]
fn counterexample_ledger() {
    with_module(|py, m| {
        let d = m.getattr("counterexample")?.call1((vec![0u64, 3, 5],))?.cast_into::<PyDict>()?;
        let ratios: Vec<Bound<PyAny>> = d.get_item("phi_ratios")?.unwrap().extract()?;
        assert!(ratios[0].eq(fraction(py, 5, 6))? && ratios[1].eq(fraction(py, 2, 3))?);
        let err = m.getattr("counterexample")?.call1((vec![0u64, 1],)).unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
        Ok(())
    });
}
