//! Python bindings: models, normalization, the bound ledger, orbits and the
//! combinatorial sequences.

use std::path::PathBuf;

use lyapnorm::bounds::{
    build_ledger, cauchy_trials as run_cauchy_trials, catalan as catalan_number, mu as mu_value, t_value,
    BoundLedger, CauchyTrialConfig, DeltaSequence, TPath,
};
use lyapnorm::io::{load_model, parse_model, reference_model, to_sorted_json, HamiltonianSource, Model, ModelFile};
use lyapnorm::normalform::NormalFormRecord;
use lyapnorm::orbit::{amplitude_for_modulus, oscillator_frequencies, realify, validate_orbit, OrbitValidation};
use lyapnorm::poly::{parse_polynomial, PolydiskGeometry, Polynomial};
use lyapnorm::resonance::gamma_lower_bound;
use lyapnorm::{Error, Mode, NormalFormResult, NormalizeOptions, Spectrum};
use num_bigint::BigUint;
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

create_exception!(lyapnorm_py, LyapnormError, PyException);
create_exception!(lyapnorm_py, ResonanceError, LyapnormError);
create_exception!(lyapnorm_py, DegenerateError, LyapnormError);
create_exception!(lyapnorm_py, DivergenceError, LyapnormError);

struct PyError(Error);

impl From<Error> for PyError {
    fn from(e: Error) -> Self {
        Self(e)
    }
}

impl From<PyError> for PyErr {
    fn from(PyError(e): PyError) -> Self {
        let msg = e.to_string();
        match e {
            Error::Resonance { .. } | Error::AmbiguousResonance { .. } => ResonanceError::new_err(msg),
            Error::Degenerate(_) => DegenerateError::new_err(msg),
            Error::Divergence { .. } => DivergenceError::new_err(msg),
            _ => LyapnormError::new_err(msg),
        }
    }
}

type Res<T> = Result<T, PyError>;

fn parse_mode(mode: Option<&str>) -> Res<Option<Mode>> {
    Ok(mode.map(str::parse).transpose()?)
}

fn py_bool(b: bool) -> &'static str {
    if b {
        "True"
    } else {
        "False"
    }
}

type Term = (Vec<u16>, Vec<u16>, Complex64);

fn terms_of(p: &Polynomial) -> Vec<Term> {
    p.terms().map(|(e, &c)| (e.j().to_vec(), e.k().to_vec(), c)).collect()
}

/// A diagonal quadratic part plus polynomial perturbation, with its spectrum and polydisk.
#[pyclass(name = "Model", frozen)]
struct PyModel {
    inner: Model,
}

#[pymethods]
impl PyModel {
    /// Parses a model file given as a JSON string.
    #[staticmethod]
    #[pyo3(signature = (src, mode = None))]
    fn from_json(src: &str, mode: Option<&str>) -> Res<Self> {
        Ok(Self {
            inner: parse_model(src, parse_mode(mode)?)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (path, mode = None))]
    fn load(path: PathBuf, mode: Option<&str>) -> Res<Self> {
        Ok(Self {
            inner: load_model(&path, parse_mode(mode)?)?,
        })
    }

    /// Builds a model from a real Hamiltonian in `(q, p)`, written with `x` for `q` and `y` for `p`.
    #[staticmethod]
    #[pyo3(signature = (hamiltonian, mode = None, radii = None))]
    fn from_real(hamiltonian: &str, mode: Option<&str>, radii: Option<Vec<f64>>) -> Res<Self> {
        let h_qp = parse_polynomial(hamiltonian, None)?;
        let omega = oscillator_frequencies(&h_qp)?;
        let file = ModelFile {
            lambda: omega.iter().map(|&w| [0.0, w]).collect(),
            mode: parse_mode(mode)?,
            hamiltonian: HamiltonianSource::Json(realify(&h_qp)?.to_polynomial()),
            radii,
        };
        Ok(Self {
            inner: file.into_model(None)?,
        })
    }

    /// `lambda = (i, i sqrt 2)` with the coupling `(x1 + y1)^2 (x2 + y2)`.
    #[staticmethod]
    fn reference() -> Self {
        Self {
            inner: reference_model(),
        }
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.spectrum.n()
    }

    #[getter]
    fn eigenvalues(&self) -> Vec<Complex64> {
        self.inner.spectrum.lambda.clone()
    }

    #[getter]
    fn mode(&self) -> &'static str {
        self.inner.spectrum.mode.as_str()
    }

    #[getter]
    fn radii(&self) -> Res<Vec<f64>> {
        Ok(self.inner.geometry()?.radii().to_vec())
    }

    fn hamiltonian(&self) -> String {
        self.inner.hamiltonian.to_polynomial().to_string()
    }

    fn terms(&self) -> Vec<Term> {
        terms_of(&self.inner.hamiltonian.to_polynomial())
    }

    fn __repr__(&self) -> String {
        format!("Model(n={}, mode='{}')", self.n(), self.mode())
    }
}

/// Normal form up to some order, with the generating functions that produced it.
#[pyclass(name = "NormalForm", frozen)]
struct PyNormalForm {
    inner: NormalFormResult,
    geom: PolydiskGeometry,
}

impl PyNormalForm {
    fn part(list: &[Polynomial], r: usize) -> Res<&Polynomial> {
        r.checked_sub(1)
            .and_then(|i| list.get(i))
            .ok_or_else(|| Error::InvalidInput(format!("order {r} is outside 1..={}", list.len())).into())
    }
}

#[pymethods]
impl PyNormalForm {
    #[getter]
    fn order(&self) -> usize {
        self.inner.state.r
    }

    #[getter]
    fn trunc_order(&self) -> usize {
        self.inner.state.trunc_order()
    }

    #[getter]
    fn input_hash(&self) -> String {
        self.inner.provenance.input_hash.clone()
    }

    /// Relative homological residual of every order.
    fn residuals(&self) -> Vec<f64> {
        (1..=self.order())
            .map(|r| self.inner.state.homological_residual(r, &self.geom))
            .collect()
    }

    /// Terms `(j, k, c)` of `Z_r`.
    fn normal_terms(&self, r: usize) -> Res<Vec<Term>> {
        Ok(terms_of(Self::part(&self.inner.state.z, r)?))
    }

    /// Terms `(j, k, c)` of `chi_r`.
    fn generator_terms(&self, r: usize) -> Res<Vec<Term>> {
        Ok(terms_of(Self::part(&self.inner.state.chi, r)?))
    }

    /// `Z_1 + ... + Z_r` in text form.
    fn normal_part(&self) -> String {
        self.inner.state.normal_part().to_string()
    }

    /// Polydisk norms of `Z_r` and `chi_r`, one pair per order.
    fn norms(&self) -> Vec<(f64, f64)> {
        let st = &self.inner.state;
        st.z.iter()
            .zip(&st.chi)
            .map(|(z, c)| (z.norm_at_scale(&self.geom, 1.0), c.norm_at_scale(&self.geom, 1.0)))
            .collect()
    }

    fn to_json(&self) -> Res<String> {
        Ok(to_sorted_json(&NormalFormRecord::from(&self.inner))?)
    }

    fn __repr__(&self) -> String {
        format!("NormalForm(order={}, mode='{}')", self.order(), self.inner.mode.as_str())
    }
}

#[pyfunction]
#[pyo3(signature = (model, order, trunc = None, prune = 0.0))]
fn normalize(py: Python<'_>, model: &PyModel, order: usize, trunc: Option<usize>, prune: f64) -> Res<PyNormalForm> {
    let m = &model.inner;
    let geom = m.geometry()?;
    let opts = NormalizeOptions {
        trunc_order: trunc,
        prune,
    };
    let inner = py.detach(|| lyapnorm::normalize(&m.hamiltonian, &m.spectrum, order, opts))?;
    Ok(PyNormalForm { inner, geom })
}

/// Computed norms against their estimates, order by order.
#[pyclass(name = "Ledger", frozen)]
struct PyLedger {
    inner: BoundLedger,
}

#[pymethods]
impl PyLedger {
    #[getter]
    fn e(&self) -> f64 {
        self.inner.e
    }

    #[getter]
    fn c(&self) -> f64 {
        self.inner.c
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }

    #[getter]
    fn passes(&self) -> bool {
        self.inner.rows_pass() && self.inner.tail_pass()
    }

    /// `(r, |chi_r|, bound, |Z_r|, bound, pass)` per order.
    fn rows(&self) -> Vec<(usize, f64, f64, f64, f64, bool)> {
        self.inner
            .rows
            .iter()
            .map(|r| (r.r, r.actual_chi, r.bound_chi, r.actual_z, r.bound_z, r.pass))
            .collect()
    }

    /// `(beta, beta_theory, rho)` when at least three orders were computed.
    fn certificate(&self) -> Option<(f64, f64, f64)> {
        self.inner.certificate.as_ref().map(|c| (c.beta, c.beta_theory, c.rho))
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn to_json(&self) -> Res<String> {
        Ok(to_sorted_json(&self.inner)?)
    }

    fn __repr__(&self) -> String {
        format!("Ledger(orders={}, passes={})", self.inner.rows.len(), py_bool(self.passes()))
    }
}

fn parse_t_path(s: &str) -> Res<TPath> {
    match s {
        "definition" => Ok(TPath::Definition),
        "exact" => Ok(TPath::Exact),
        "closed" => Ok(TPath::Closed),
        other => Err(Error::InvalidInput(format!("unknown T path '{other}'")).into()),
    }
}

#[pyfunction]
#[pyo3(signature = (model, order = 6, d = 0.25, t_path = "exact"))]
fn certify(py: Python<'_>, model: &PyModel, order: usize, d: f64, t_path: &str) -> Res<PyLedger> {
    let m = &model.inner;
    let dseq = DeltaSequence::new(d)?;
    let path = parse_t_path(t_path)?;
    let geom = m.geometry()?;
    let inner = py.detach(|| {
        build_ledger(&m.hamiltonian, &m.spectrum, &geom, &dseq, order, NormalizeOptions::default(), path)
    })?;
    Ok(PyLedger { inner })
}

/// One integrated orbit compared with its synthesized counterpart.
#[pyclass(name = "OrbitReport", frozen)]
struct PyOrbitReport {
    inner: OrbitValidation,
}

#[pymethods]
impl PyOrbitReport {
    #[getter]
    fn residual(&self) -> f64 {
        self.inner.residual
    }

    #[getter]
    fn period(&self) -> Option<f64> {
        self.inner.period
    }

    #[getter]
    fn aperiodic(&self) -> bool {
        self.inner.aperiodic
    }

    #[getter]
    fn energy_drift(&self) -> f64 {
        self.inner.energy_drift
    }

    #[getter]
    fn a1(&self) -> Complex64 {
        self.inner.a1
    }

    #[getter]
    fn initial_state(&self) -> Vec<Complex64> {
        self.inner.initial_state.clone()
    }

    /// Stored sample times and states of the integrated trajectory.
    fn trajectory(&self) -> (Vec<f64>, Vec<Vec<Complex64>>) {
        self.inner
            .trajectory
            .as_ref()
            .map(|t| (t.times.clone(), t.states.clone()))
            .unwrap_or_default()
    }

    fn __repr__(&self) -> String {
        format!("OrbitReport(residual={:e}, aperiodic={})", self.residual(), py_bool(self.aperiodic()))
    }
}

/// Integrates the orbit that starts with `|x1(0)| = amplitude` after normalizing to `order`.
#[pyfunction]
#[pyo3(signature = (model, order, amplitude = 0.01, dt = 1e-3, store_every = 10))]
fn orbit(py: Python<'_>, model: &PyModel, order: usize, amplitude: f64, dt: f64, store_every: usize) -> Res<PyOrbitReport> {
    let m = &model.inner;
    let geom = m.geometry()?;
    let inner = py.detach(|| {
        let nf = lyapnorm::normalize(&m.hamiltonian, &m.spectrum, order, NormalizeOptions::default())?;
        let xi = amplitude_for_modulus(&nf, amplitude)?;
        validate_orbit(&m.hamiltonian, &nf, &geom, xi, dt, store_every)
    })?;
    Ok(PyOrbitReport { inner })
}

/// Small-divisor constant of a spectrum, checked on every index up to `verify_up_to`.
#[pyfunction]
#[pyo3(signature = (eigenvalues, mode = "thm1", verify_up_to = 200))]
fn gamma(eigenvalues: Vec<Complex64>, mode: &str, verify_up_to: usize) -> Res<f64> {
    let spec = Spectrum::new(eigenvalues, mode.parse()?)?;
    Ok(gamma_lower_bound(&spec, verify_up_to)?.gamma)
}

/// Runs the randomized Cauchy suite; returns `(name, violations, worst ratio)` per inequality.
#[pyfunction]
#[pyo3(signature = (model, trials = 200, seed = 0))]
fn cauchy_trials(py: Python<'_>, model: &PyModel, trials: usize, seed: u64) -> Res<Vec<(String, usize, f64)>> {
    let m = &model.inner;
    let mut spec = m.spectrum.clone();
    spec.certify_gamma(200)?;
    let geom = m.geometry()?;
    let config = CauchyTrialConfig {
        trials,
        seed,
        ..CauchyTrialConfig::default()
    };
    let rep = py.detach(|| run_cauchy_trials(&spec, &geom, &config))?;
    Ok(rep
        .summaries
        .into_iter()
        .map(|s| (s.name, s.violations, s.worst_ratio))
        .collect())
}

#[pyfunction]
fn mu(r: usize, s: usize) -> BigUint {
    mu_value(r, s)
}

#[pyfunction]
fn catalan(r: usize) -> Res<BigUint> {
    if r == 0 {
        return Err(Error::InvalidInput("the Catalan index starts at 1".into()).into());
    }
    Ok(catalan_number(r))
}

/// `T_{r,s}` for the domain-loss budget `d`, with the path actually used.
#[pyfunction]
#[pyo3(signature = (r, s, d = 0.25, path = "exact"))]
fn t_majorant(r: usize, s: usize, d: f64, path: &str) -> Res<(f64, String)> {
    let dseq = DeltaSequence::new(d)?;
    let (v, used) = t_value(r, s, &dseq, parse_t_path(path)?)?;
    Ok((v, used.as_str().to_string()))
}

#[pymodule]
fn lyapnorm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("LyapnormError", py.get_type::<LyapnormError>())?;
    m.add("ResonanceError", py.get_type::<ResonanceError>())?;
    m.add("DegenerateError", py.get_type::<DegenerateError>())?;
    m.add("DivergenceError", py.get_type::<DivergenceError>())?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyNormalForm>()?;
    m.add_class::<PyLedger>()?;
    m.add_class::<PyOrbitReport>()?;
    m.add_function(wrap_pyfunction!(normalize, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(orbit, m)?)?;
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(cauchy_trials, m)?)?;
    m.add_function(wrap_pyfunction!(mu, m)?)?;
    m.add_function(wrap_pyfunction!(catalan, m)?)?;
    m.add_function(wrap_pyfunction!(t_majorant, m)?)?;
    Ok(())
}
