//! Python bindings. Configurations and sweep plans are passed as TOML text;
//! results come back as plain dicts, lists and floats.

pub mod convert;

use fracwave::damping::{AuxiliaryFunctions, DampingProfile};
use fracwave::sweep::SweepPlan;
use fracwave::{functionals, solver, spectral};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use convert::{classify, parse_config, record_value, to_value, ErrorClass};

fn py_err(err: fracwave::Error) -> PyErr {
    match classify(&err) {
        ErrorClass::Value => PyValueError::new_err(err.to_string()),
        ErrorClass::Runtime => PyRuntimeError::new_err(err.to_string()),
    }
}

fn to_py<'py>(py: Python<'py>, value: &toml::Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match value {
        toml::Value::String(s) => s.into_pyobject(py)?.into_any(),
        toml::Value::Integer(i) => i.into_pyobject(py)?.into_any(),
        toml::Value::Float(f) => f.into_pyobject(py)?.into_any(),
        toml::Value::Boolean(b) => b.into_pyobject(py)?.to_owned().into_any(),
        toml::Value::Datetime(d) => d.to_string().into_pyobject(py)?.into_any(),
        toml::Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(to_py(py, item)?)?;
            }
            list.into_any()
        }
        toml::Value::Table(table) => {
            let dict = PyDict::new(py);
            for (k, v) in table {
                dict.set_item(k, to_py(py, v)?)?;
            }
            dict.into_any()
        }
    })
}

/// Runs `f` without the GIL and converts its result.
fn detached<'py, F>(py: Python<'py>, f: F) -> PyResult<Bound<'py, PyAny>>
where
    F: FnOnce() -> fracwave::Result<toml::Value> + Send,
{
    let value = py.detach(f).map_err(py_err)?;
    to_py(py, &value)
}

/// Critical exponent `1 + σ/N`.
#[pyfunction]
fn critical_exponent(dim: usize, sigma: f64) -> f64 {
    fracwave::config::critical_exponent(dim, sigma)
}

/// Predicted exponent of `ε` in the subcritical lifespan.
#[pyfunction]
fn lifespan_exponent(dim: usize, sigma: f64, p: f64, beta: f64) -> f64 {
    functionals::lifespan_exponent(dim, sigma, p, beta)
}

/// Fractional heat kernel at time one, evaluated at the point `x`.
#[pyfunction]
fn heat_kernel(x: Vec<f64>, sigma: f64) -> PyResult<f64> {
    spectral::heat_kernel_phi(&x, sigma).map_err(py_err)
}

#[pyfunction]
fn kernel_integrals<'py>(py: Python<'py>, sigma: f64, dim: usize) -> PyResult<Bound<'py, PyAny>> {
    detached(py, || {
        let k = spectral::kernel_integrals(sigma, dim)?;
        let mut t = toml::Table::new();
        t.insert("mass".into(), k.mass.into());
        t.insert("grad_moment".into(), k.grad_moment.into());
        t.insert("laplacian_moment".into(), k.laplacian_moment.into());
        t.insert("errors".into(), k.errors.iter().map(|&e| toml::Value::Float(e)).collect::<Vec<_>>().into());
        Ok(toml::Value::Table(t))
    })
}

/// `b`, `g`, `G`, `Γ` and `B` at each time.
#[pyfunction]
#[pyo3(signature = (beta, times, b1 = 1.0))]
fn damping<'py>(py: Python<'py>, beta: f64, times: Vec<f64>, b1: f64) -> PyResult<Bound<'py, PyAny>> {
    detached(py, move || {
        let aux = AuxiliaryFunctions::new(DampingProfile::new(beta, b1)?)?;
        let mut cols: [Vec<toml::Value>; 5] = Default::default();
        for &t in &times {
            let row = [aux.profile().b_at(t), aux.g_at(t)?, aux.big_g_at(t)?, aux.gamma_at(t)?, aux.profile().big_b(t)?];
            for (c, v) in cols.iter_mut().zip(row) {
                c.push(v.into());
            }
        }
        let mut table = toml::Table::new();
        table.insert("t".into(), times.iter().map(|&t| toml::Value::Float(t)).collect::<Vec<_>>().into());
        for (name, col) in ["b", "g", "G", "Gamma", "B"].into_iter().zip(cols) {
            table.insert(name.into(), col.into());
        }
        Ok(toml::Value::Table(table))
    })
}

/// Explicit constants of the subcritical lifespan estimate.
#[pyfunction]
fn constants<'py>(py: Python<'py>, config: &str) -> PyResult<Bound<'py, PyAny>> {
    let cfg = parse_config(config).map_err(py_err)?;
    detached(py, move || to_value(&functionals::subcritical_constants(&cfg)?))
}

/// Integrates to blow-up or the horizon and returns the record with its series.
#[pyfunction]
fn solve<'py>(py: Python<'py>, config: &str) -> PyResult<Bound<'py, PyAny>> {
    let cfg = parse_config(config).map_err(py_err)?;
    detached(py, move || record_value(&solver::run_to_blowup(&cfg)?))
}

/// Comparison ODE against the explicit lifespan bound.
#[pyfunction]
fn ode_check<'py>(py: Python<'py>, config: &str) -> PyResult<Bound<'py, PyAny>> {
    let cfg = parse_config(config).map_err(py_err)?;
    detached(py, move || to_value(&functionals::ode_bound_check(&cfg)?))
}

/// Runs a sweep plan and, if requested, the lifespan fit.
#[pyfunction]
fn sweep<'py>(py: Python<'py>, plan: &str) -> PyResult<Bound<'py, PyAny>> {
    let plan = SweepPlan::from_toml_str(plan, None).map_err(py_err)?;
    detached(py, move || to_value(&fracwave::sweep::run_sweep(&plan)?))
}

#[pymodule]
fn fracwave_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(critical_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(lifespan_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(heat_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_integrals, m)?)?;
    m.add_function(wrap_pyfunction!(damping, m)?)?;
    m.add_function(wrap_pyfunction!(constants, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(ode_check, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    Ok(())
}
