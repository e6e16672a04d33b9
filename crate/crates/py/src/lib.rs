//! Python bindings. Complex arguments and results are `(re, im)` tuples.

use num_complex::Complex64 as C64;
use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use phasedelta::amplifier::{self, AmplifierGain};
use phasedelta::gendelta::{self, AnalyticTestFunction};
use phasedelta::quasiprob::{self, PTerm};
use phasedelta::reconstruct;
use phasedelta::states::{self, CatStateSpec};
use phasedelta::verify::{self, Fault, VerifyOptions};

create_exception!(phasedelta, NumericGuardError, PyArithmeticError, "A numerical guard refused the request.");

type Pair = (f64, f64);

fn c((re, im): Pair) -> C64 {
    C64::new(re, im)
}

fn pair(z: C64) -> Pair {
    (z.re, z.im)
}

fn err(e: phasedelta::Error) -> PyErr {
    if e.is_numeric_guard() {
        NumericGuardError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

/// Normalized `N(|α₁⟩ + ζ|α₂⟩)`.
#[pyclass(name = "CatState", frozen, from_py_object)]
#[derive(Clone)]
struct PyCatState(CatStateSpec);

#[pymethods]
impl PyCatState {
    #[new]
    #[pyo3(signature = (alpha1, alpha2 = (0.0, 0.0), zeta = (0.0, 0.0)))]
    fn new(alpha1: Pair, alpha2: Pair, zeta: Pair) -> PyResult<Self> {
        CatStateSpec::new(c(alpha1), c(alpha2), c(zeta)).map(Self).map_err(err)
    }

    #[getter]
    fn alpha1(&self) -> Pair {
        pair(self.0.alpha1())
    }

    #[getter]
    fn alpha2(&self) -> Pair {
        pair(self.0.alpha2())
    }

    #[getter]
    fn zeta(&self) -> Pair {
        pair(self.0.zeta())
    }

    #[getter]
    fn norm(&self) -> f64 {
        self.0.norm()
    }

    fn q(&self, alpha: Pair) -> f64 {
        quasiprob::q_function(&self.0, c(alpha))
    }

    /// P terms `κ|γ⟩⟨β|` of the state.
    fn p_terms(&self) -> Vec<PyPTerm> {
        quasiprob::p_cat_terms(&self.0).terms.into_iter().map(PyPTerm).collect()
    }

    /// σ-regularized P at `alpha`.
    fn p_regularized(&self, sigma: f64, alpha: Pair) -> PyResult<Pair> {
        let rep = quasiprob::p_cat_terms(&self.0);
        quasiprob::p_regularized_eval(&rep, sigma, c(alpha)).map(pair).map_err(err)
    }

    /// Truncated Fock density matrix, rows of `(re, im)`.
    fn density_matrix(&self, n_max: usize) -> Vec<Vec<Pair>> {
        matrix(&states::cat_density_matrix(&self.0, n_max))
    }

    /// Density matrix rebuilt from the P terms.
    fn reconstruct(&self, n_max: usize) -> Vec<Vec<Pair>> {
        matrix(&reconstruct::reconstruct_rho(&quasiprob::p_cat_terms(&self.0), n_max))
    }

    /// `(max |Δρ|, trace deviation, all terms matched)`.
    fn roundtrip(&self, n_max: usize) -> (f64, f64, bool) {
        let r = reconstruct::roundtrip_report(&self.0, n_max);
        let matched = r.per_term_checks.iter().all(|(_, ok)| *ok);
        (r.max_abs_deviation, r.trace_deviation, matched)
    }

    fn __repr__(&self) -> String {
        let (a, b, z) = (self.0.alpha1(), self.0.alpha2(), self.0.zeta());
        format!("CatState(alpha1=({}, {}), alpha2=({}, {}), zeta=({}, {}))", a.re, a.im, b.re, b.im, z.re, z.im)
    }
}

fn matrix(rho: &states::FockDensityMatrix) -> Vec<Vec<Pair>> {
    rho.entries().rows().into_iter().map(|r| r.iter().map(|z| pair(*z)).collect()).collect()
}

#[pyclass(name = "PTerm", frozen)]
struct PyPTerm(PTerm);

#[pymethods]
impl PyPTerm {
    #[getter]
    fn kappa(&self) -> Pair {
        pair(self.0.kappa)
    }

    #[getter]
    fn beta(&self) -> Pair {
        pair(self.0.beta)
    }

    #[getter]
    fn gamma(&self) -> Pair {
        pair(self.0.gamma)
    }

    /// `κ⟨β|γ⟩`.
    fn weight(&self) -> Pair {
        pair(self.0.weight())
    }

    /// `(c_r, c_i)` with `c_r + i c_i = γ`, `c_r - i c_i = β*`.
    fn centers(&self) -> (Pair, Pair) {
        let (r, i) = self.0.centers();
        (pair(r), pair(i))
    }
}

/// Phase-insensitive amplitude gain `g ≥ 1`.
#[pyclass(name = "Gain", frozen, from_py_object)]
#[derive(Clone)]
struct PyGain(AmplifierGain);

#[pymethods]
impl PyGain {
    #[new]
    fn new(g: f64) -> PyResult<Self> {
        AmplifierGain::new(g).map(Self).map_err(err)
    }

    #[getter]
    fn g(&self) -> f64 {
        self.0.g()
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.0.sigma()
    }

    /// This gain followed by `other`.
    fn then(&self, other: &PyGain) -> PyGain {
        PyGain(self.0.then(other.0))
    }

    fn q(&self, state: &PyCatState, alpha: Pair) -> f64 {
        amplifier::amplify_q(&state.0, self.0, c(alpha))
    }

    /// Amplified P; raises `NumericGuardError` at `g = 1`.
    fn p(&self, state: &PyCatState, alpha: Pair) -> PyResult<f64> {
        amplifier::amplified_p(&state.0, self.0, c(alpha)).map_err(err)
    }

    fn density_matrix(&self, state: &PyCatState, n_max: usize) -> Vec<Vec<Pair>> {
        matrix(&amplifier::amplified_density_matrix(&state.0, self.0, n_max))
    }

    fn __repr__(&self) -> String {
        format!("Gain({})", self.0.g())
    }
}

#[pyfunction]
fn sigma_of_gain(g: f64) -> PyResult<f64> {
    amplifier::sigma_of_gain(g).map_err(err)
}

/// `exp(-z²/2σ²)/(√(2π)σ)` for complex `z`.
#[pyfunction]
fn phi_sigma(z: Pair, sigma: f64) -> PyResult<Pair> {
    gendelta::phi_sigma(c(z), sigma).map(pair).map_err(err)
}

/// `∫ xⁿ φ_σ(x - z) dx`.
#[pyfunction]
fn moment(n: usize, z: Pair, sigma: f64) -> PyResult<Pair> {
    gendelta::moment_in(n, c(z), sigma).map(pair).map_err(err)
}

/// Sifts `Σ cₙ zⁿ exp(-z²/2s²)` at `z0` on the halving schedule from
/// `sigma0`. Returns `(per-level values, extrapolated limit)`.
#[pyfunction]
#[pyo3(signature = (z0, sigma0, levels, scale, coeffs))]
fn sift(z0: Pair, sigma0: f64, levels: usize, scale: f64, coeffs: Vec<Pair>) -> PyResult<(Vec<Pair>, Pair)> {
    let f = AnalyticTestFunction::envelope(scale, coeffs.into_iter().map(c).collect()).map_err(err)?;
    let est = gendelta::sift_limit(&f, c(z0), sigma0, levels).map_err(err)?;
    Ok((est.values.into_iter().map(pair).collect(), pair(est.limit)))
}

/// Runs one acceptance criterion; returns `(passed, report line)`.
#[pyfunction]
#[pyo3(signature = (id, flip_center_sign = false))]
fn run_criterion(id: u8, flip_center_sign: bool) -> PyResult<(bool, String)> {
    let opts = VerifyOptions { fault: flip_center_sign.then_some(Fault::FlipCenterSign) };
    let r = verify::run_criterion(id, &opts).map_err(err)?;
    Ok((r.passed, r.line()))
}

#[pymodule]
#[pyo3(name = "phasedelta")]
fn phasedelta_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCatState>()?;
    m.add_class::<PyPTerm>()?;
    m.add_class::<PyGain>()?;
    m.add_function(wrap_pyfunction!(sigma_of_gain, m)?)?;
    m.add_function(wrap_pyfunction!(phi_sigma, m)?)?;
    m.add_function(wrap_pyfunction!(moment, m)?)?;
    m.add_function(wrap_pyfunction!(sift, m)?)?;
    m.add_function(wrap_pyfunction!(run_criterion, m)?)?;
    m.add("NumericGuardError", m.py().get_type::<NumericGuardError>())?;
    Ok(())
}
