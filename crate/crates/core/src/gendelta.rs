//! The generalized delta function with a complex center, handled through its
//! Gaussian regularization `φ_σ(z) = exp(-z²/2σ²) / (√(2π) σ)`.
//!
//! Sifting along the real axis, `∫ f(x) φ_σ(x - z₀) dx`, converges to the
//! analytic continuation `f(z₀)` as `σ → 0` for entire test functions. Two
//! evaluators are provided:
//!
//! * [`sift`] integrates directly along the real axis. The integrand grows
//!   like `exp(b²/2σ²)` (with `b = Im z₀`) before cancelling, so digits are
//!   lost as σ shrinks; [`cancellation_factor`] reports how many.
//! * [`sift_shifted_line`] moves the path to `Im x = b`, where the Gaussian
//!   weight is real and no cancellation occurs. This is the trusted route.

use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{quad_real_line, QuadratureSpec, HERMITE_MAX_ORDER};

/// Largest `|Im z|²/2σ²` that [`phi_sigma`] will exponentiate.
pub const PHI_EXPONENT_GUARD: f64 = 700.0;

/// Cancellation factor above which direct sifting is flagged as unreliable.
pub const CANCELLATION_WARN: f64 = 1e12;

/// Gaussian windows are cut at this many widths.
const WINDOW_WIDTHS: f64 = 12.0;

fn sqrt_2pi() -> f64 {
    (2.0 * PI).sqrt()
}

/// Smallest σ for which `φ_σ` can be evaluated at imaginary part `imag`.
pub fn min_safe_sigma(imag: f64) -> f64 {
    imag.abs() / (2.0 * PHI_EXPONENT_GUARD).sqrt()
}

/// `exp(b²/2σ²)`: the growth of `|φ_σ(x - z₀)|` on the real axis relative to
/// a real-centered Gaussian, and so the amplification of rounding error in
/// direct sifting.
pub fn cancellation_factor(imag: f64, sigma: f64) -> f64 {
    (imag * imag / (2.0 * sigma * sigma)).exp()
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::domain("sigma", "finite and > 0", sigma));
    }
    Ok(())
}

fn guard(imag: f64, sigma: f64) -> Result<()> {
    if imag * imag / (2.0 * sigma * sigma) > PHI_EXPONENT_GUARD {
        return Err(Error::RegularizationTooSmall {
            sigma,
            imag: imag.abs(),
            min_sigma: min_safe_sigma(imag),
        });
    }
    Ok(())
}

/// `φ_σ(z)`, evaluated as a real Gaussian envelope `exp(-(z_r² - z_i²)/2σ²)`
/// times the unit phase `exp(-i z_r z_i/σ²)`.
pub fn phi_sigma(z: C64, sigma: f64) -> Result<C64> {
    check_sigma(sigma)?;
    guard(z.im, sigma)?;
    let s2 = sigma * sigma;
    let envelope = (-(z.re * z.re - z.im * z.im) / (2.0 * s2)).exp();
    let phase = C64::from_polar(1.0, -z.re * z.im / s2);
    Ok(envelope * phase / (sqrt_2pi() * sigma))
}

/// `(1/2π) ∫ exp(-izp) exp(-p²/2σ'²) dp` by quadrature over `p`; equals
/// `φ_{1/σ'}(z)`.
pub fn phi_from_integral_rep(z: C64, sigma_prime: f64, quad: &QuadratureSpec) -> Result<C64> {
    check_sigma(sigma_prime)?;
    if quad.halfwidth < 8.0 * sigma_prime || quad.center.abs() > 1e-12 * sigma_prime {
        warn!(
            "integral representation window [{}, {}] does not cover ±8σ' = ±{}",
            quad.lower(),
            quad.upper(),
            8.0 * sigma_prime
        );
    }
    let s2 = sigma_prime * sigma_prime;
    let total = quad_real_line(|p| (-C64::i() * z * p - p * p / (2.0 * s2)).exp(), quad)?;
    Ok(total / (2.0 * PI))
}

/// Default quadrature for [`phi_from_integral_rep`].
pub fn integral_rep_window(z: C64, sigma_prime: f64) -> Result<QuadratureSpec> {
    // resolve both the Gaussian width and the e^{-i z_r p} oscillation
    let step = (sigma_prime / 16.0).min(PI / (8.0 * z.re.abs().max(1e-300)));
    QuadratureSpec::with_step(0.0, (WINDOW_WIDTHS + 4.0) * sigma_prime, step)
}

/// `φ_σ(x - z₀)` as a value: a regularized generalized delta centered at `z₀`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularizedDelta {
    sigma: f64,
    center: C64,
}

impl RegularizedDelta {
    pub fn new(sigma: f64, center: C64) -> Result<Self> {
        check_sigma(sigma)?;
        guard(center.im, sigma)?;
        Ok(Self { sigma, center })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn center(&self) -> C64 {
        self.center
    }

    /// The `M = 1/σ` sequence parameter.
    pub fn sharpness(&self) -> f64 {
        1.0 / self.sigma
    }

    pub fn eval(&self, x: f64) -> C64 {
        phi_sigma(C64::from(x) - self.center, self.sigma).expect("guarded at construction")
    }

    pub fn cancellation_factor(&self) -> f64 {
        cancellation_factor(self.center.im, self.sigma)
    }

    /// `∫ φ_σ(x - z₀) dx` by quadrature over `quad`.
    pub fn total_weight(&self, quad: &QuadratureSpec) -> Result<C64> {
        quad_real_line(|x| self.eval(x), quad)
    }

    /// Real-axis window that captures the whole (possibly growing) integrand.
    pub fn direct_window(&self) -> QuadratureSpec {
        direct_window(self.center, self.sigma, None)
    }
}

/// Entire test functions with an exact analytic continuation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum AnalyticTestFunction {
    /// `xⁿ`. Does not decay, so it is only ever sifted in closed form.
    Monomial { degree: usize },
    /// `p(x) exp(-x²/2s²)` with `p(x) = Σ coeffs[n] xⁿ`.
    GaussianEnvelope { scale: f64, coeffs: Vec<C64> },
}

impl AnalyticTestFunction {
    pub fn monomial(degree: usize) -> Result<Self> {
        if degree > HERMITE_MAX_ORDER {
            return Err(Error::OrderOutOfRange { order: degree, max: HERMITE_MAX_ORDER });
        }
        Ok(Self::Monomial { degree })
    }

    pub fn envelope(scale: f64, coeffs: Vec<C64>) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::domain("scale", "finite and > 0", scale));
        }
        if coeffs.len() > HERMITE_MAX_ORDER + 1 {
            return Err(Error::OrderOutOfRange { order: coeffs.len() - 1, max: HERMITE_MAX_ORDER });
        }
        Ok(Self::GaussianEnvelope { scale, coeffs })
    }

    /// `exp(-x²/2s²)`.
    pub fn gaussian(scale: f64) -> Result<Self> {
        Self::envelope(scale, vec![C64::new(1.0, 0.0)])
    }

    pub fn constant() -> Self {
        Self::Monomial { degree: 0 }
    }

    /// `f(z)` anywhere in the complex plane.
    pub fn eval(&self, z: C64) -> C64 {
        match self {
            Self::Monomial { degree } => z.powu(*degree as u32),
            Self::GaussianEnvelope { scale, coeffs } => {
                let p = coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * z + c);
                p * (-z * z / (2.0 * scale * scale)).exp()
            }
        }
    }

    pub fn decays(&self) -> bool {
        matches!(self, Self::GaussianEnvelope { .. })
    }

    fn scale(&self) -> Option<f64> {
        match self {
            Self::Monomial { .. } => None,
            Self::GaussianEnvelope { scale, .. } => Some(*scale),
        }
    }

    /// Exact `∫ f(x) φ_σ(x - z₀) dx` at finite σ.
    ///
    /// The product of the envelope with the kernel is a single Gaussian of
    /// variance `v = s²σ²/(s²+σ²)` centered at `m = z₀ s²/(s²+σ²)`, so the
    /// polynomial part reduces to Gaussian moments.
    pub fn smoothed(&self, z0: C64, sigma: f64) -> Result<C64> {
        check_sigma(sigma)?;
        match self {
            Self::Monomial { degree } => moment_in(*degree, z0, sigma),
            Self::GaussianEnvelope { scale, coeffs } => {
                let s2 = scale * scale;
                let total = s2 + sigma * sigma;
                let mean = z0 * (s2 / total);
                let sd = (s2 * sigma * sigma / total).sqrt();
                let mut acc = C64::new(0.0, 0.0);
                for (n, c) in coeffs.iter().enumerate() {
                    acc += c * moment_in(n, mean, sd)?;
                }
                Ok(acc * (scale / total.sqrt()) * (-z0 * z0 / (2.0 * total)).exp())
            }
        }
    }
}

/// Real-axis window for direct sifting: wide enough that the growing part
/// `exp(-((x-a)² - b²)/2σ²)` has decayed, fine enough for its oscillation.
fn direct_window(z0: C64, sigma: f64, scale: Option<f64>) -> QuadratureSpec {
    let b = z0.im.abs();
    let halfwidth = (b * b + (WINDOW_WIDTHS * sigma).powi(2)).sqrt();
    let omega = b / (sigma * sigma);
    let mut step = (sigma / 10.0).min(2.0 * PI / (2.0 * (omega + 12.0 / sigma)));
    if let Some(s) = scale {
        step = step.min(s / 10.0);
    }
    QuadratureSpec::with_step(z0.re, halfwidth, step).expect("positive window")
}

/// Window for [`sift_shifted_line`]: `±12σ` around `Re z₀`.
fn shifted_window(z0: C64, sigma: f64, f: &AnalyticTestFunction) -> QuadratureSpec {
    let mut step = sigma / 10.0;
    if let Some(s) = f.scale() {
        // f(x + ib) oscillates at rate b/s²
        step = step.min(s / 10.0).min(PI / (4.0 * (z0.im.abs() / (s * s)).max(1e-300)));
    }
    QuadratureSpec::with_step(z0.re, WINDOW_WIDTHS * sigma, step).expect("positive window")
}

/// Default quadrature for [`sift`].
pub fn sift_window(f: &AnalyticTestFunction, z0: C64, sigma: f64) -> QuadratureSpec {
    direct_window(z0, sigma, f.scale())
}

/// Default quadrature for [`sift_shifted_line`].
pub fn shifted_line_window(f: &AnalyticTestFunction, z0: C64, sigma: f64) -> QuadratureSpec {
    shifted_window(z0, sigma, f)
}

/// `∫ f(x) φ_σ(x - z₀) dx` along the real axis.
///
/// Monomials are returned in closed form via [`moment_in`]; they do not decay
/// and are never integrated over a truncated window.
pub fn sift(f: &AnalyticTestFunction, z0: C64, sigma: f64, quad: &QuadratureSpec) -> Result<C64> {
    check_sigma(sigma)?;
    guard(z0.im, sigma)?;
    if let AnalyticTestFunction::Monomial { degree } = f {
        return moment_in(*degree, z0, sigma);
    }
    let factor = cancellation_factor(z0.im, sigma);
    if factor > CANCELLATION_WARN {
        warn!("direct sifting at z0 = {z0}, sigma = {sigma}: cancellation factor {factor:.2e}, result digits unreliable");
    }
    let kernel = RegularizedDelta { sigma, center: z0 };
    quad_real_line(|x| f.eval(C64::from(x)) * kernel.eval(x), quad)
}

/// `∫ f(x + ib) φ_σ(x - a) dx` with `z₀ = a + ib`: the same integral as
/// [`sift`] with the path moved through `z₀`, where the kernel is real.
pub fn sift_shifted_line(
    f: &AnalyticTestFunction,
    z0: C64,
    sigma: f64,
    quad: &QuadratureSpec,
) -> Result<C64> {
    check_sigma(sigma)?;
    if let AnalyticTestFunction::Monomial { degree } = f {
        return moment_in(*degree, z0, sigma);
    }
    let (a, b) = (z0.re, z0.im);
    let norm = 1.0 / (sqrt_2pi() * sigma);
    let s2 = sigma * sigma;
    quad_real_line(
        |x| f.eval(C64::new(x, b)) * (norm * (-(x - a) * (x - a) / (2.0 * s2)).exp()),
        quad,
    )
}

/// `I_n(σ) = ∫ xⁿ φ_σ(x - z) dx = Σ_m n!/(m!(n-2m)!) (σ²/2)^m z^(n-2m)`.
///
/// The sum is the Hermite closed form with the growth of `H_n` at large
/// argument already cancelled against the `σⁿ` prefactor; it tends to `zⁿ`
/// as `σ → 0` and is exactly 1 for `n = 0`.
#[allow(non_snake_case)]
pub fn moment_in(n: usize, z: C64, sigma: f64) -> Result<C64> {
    if n > HERMITE_MAX_ORDER {
        return Err(Error::OrderOutOfRange { order: n, max: HERMITE_MAX_ORDER });
    }
    check_sigma(sigma).or_else(|e| if sigma == 0.0 { Ok(()) } else { Err(e) })?;
    let half_s2 = sigma * sigma / 2.0;
    let mut acc = C64::new(0.0, 0.0);
    // coefficient n!/(m!(n-2m)!) built incrementally
    let mut coeff = 1.0f64;
    for m in 0..=n / 2 {
        if m > 0 {
            let k = n - 2 * m;
            coeff *= ((k + 2) * (k + 1)) as f64 / m as f64;
        }
        acc += coeff * half_s2.powi(m as i32) * z.powu((n - 2 * m) as u32);
    }
    Ok(acc)
}

/// Where the σ → 0 limit of `φ_σ(z)` sends a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaRegion {
    /// `Re z = 0`: real infinity.
    RealAxisInfinity,
    /// `(Re z)² > (Im z)²`: the Gaussian envelope wins.
    Zero,
    /// `(Re z)² ≤ (Im z)²`, `Re z ≠ 0`: magnitude diverges with undefined phase.
    ComplexInfinity,
}

pub fn classify_point(z: C64) -> DeltaRegion {
    if z.re == 0.0 {
        DeltaRegion::RealAxisInfinity
    } else if z.re * z.re > z.im * z.im {
        DeltaRegion::Zero
    } else {
        DeltaRegion::ComplexInfinity
    }
}

/// One product term `c · f_r(ζ_r) · f_i(ζ_i)` of a [`PlaneTestFunction`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableTerm {
    pub coeff: C64,
    pub along_real: AnalyticTestFunction,
    pub along_imag: AnalyticTestFunction,
}

/// Test function on the phase plane, `f(ζ_r, ζ_i) = Σ c f_r(ζ_r) f_i(ζ_i)`,
/// analytic in each coordinate separately so either may be continued into
/// the complex plane.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlaneTestFunction {
    pub terms: Vec<SeparableTerm>,
}

impl PlaneTestFunction {
    pub fn product(f_r: AnalyticTestFunction, f_i: AnalyticTestFunction) -> Self {
        Self { terms: vec![SeparableTerm { coeff: C64::new(1.0, 0.0), along_real: f_r, along_imag: f_i }] }
    }

    pub fn constant() -> Self {
        Self::product(AnalyticTestFunction::constant(), AnalyticTestFunction::constant())
    }

    /// `ζ_r + i ζ_i`.
    pub fn identity() -> Self {
        let one = AnalyticTestFunction::constant();
        let x = AnalyticTestFunction::Monomial { degree: 1 };
        Self {
            terms: vec![
                SeparableTerm { coeff: C64::new(1.0, 0.0), along_real: x.clone(), along_imag: one.clone() },
                SeparableTerm { coeff: C64::i(), along_real: one, along_imag: x },
            ],
        }
    }

    /// `exp(-(ζ_r² + ζ_i²)/2s²)`.
    pub fn gaussian(scale: f64) -> Result<Self> {
        let g = AnalyticTestFunction::gaussian(scale)?;
        Ok(Self::product(g.clone(), g))
    }

    pub fn with_term(mut self, coeff: C64, f_r: AnalyticTestFunction, f_i: AnalyticTestFunction) -> Self {
        self.terms.push(SeparableTerm { coeff, along_real: f_r, along_imag: f_i });
        self
    }

    /// `f(z_r, z_i)` with both coordinates possibly complex.
    pub fn eval(&self, z_r: C64, z_i: C64) -> C64 {
        self.terms
            .iter()
            .map(|t| t.coeff * t.along_real.eval(z_r) * t.along_imag.eval(z_i))
            .sum()
    }
}

/// `∬ f(ζ_r, ζ_i) δ²_σ(ζ - z) dζ_r dζ_i` with the product-of-real-Gaussians
/// regularization of `δ²`. `quad` supplies the halfwidth and node count used
/// on each axis; it is recentered on `Re z` and `Im z`.
pub fn delta2_sift(f: &PlaneTestFunction, z: C64, sigma: f64, quad: &QuadratureSpec) -> Result<C64> {
    check_sigma(sigma)?;
    if quad.halfwidth < 8.0 * sigma {
        warn!("delta2 window ±{} is narrower than ±8σ = ±{}", quad.halfwidth, 8.0 * sigma);
    }
    let qr = quad.recentered(z.re);
    let qi = quad.recentered(z.im);
    let norm = 1.0 / (sqrt_2pi() * sigma);
    let s2 = sigma * sigma;
    let kernel = |t: f64, c: f64| norm * (-(t - c) * (t - c) / (2.0 * s2)).exp();
    quad_real_line(
        |zi| {
            let ki = kernel(zi, z.im);
            let inner = quad_real_line(
                |zr| f.eval(C64::from(zr), C64::from(zi)) * kernel(zr, z.re),
                &qr,
            )
            .unwrap_or(C64::new(f64::NAN, f64::NAN));
            inner * ki
        },
        &qi,
    )
}

/// Geometric σ schedule `σ_k = σ₀ 2^{-k}`, `k = 0..levels`.
pub fn sigma_schedule(sigma0: f64, levels: usize) -> Vec<f64> {
    (0..levels).map(|k| sigma0 * 0.5f64.powi(k as i32)).collect()
}

/// Richardson extrapolation to σ → 0 for values on a halving schedule whose
/// error expands in even powers of σ (ratio 4, 16, 64, ...).
pub fn richardson_limit(values: &[C64]) -> C64 {
    assert!(!values.is_empty(), "richardson_limit needs at least one value");
    let mut row: Vec<C64> = values.to_vec();
    let mut factor = 1.0;
    for _ in 1..values.len() {
        factor *= 4.0;
        row = row.windows(2).map(|w| (factor * w[1] - w[0]) / (factor - 1.0)).collect();
    }
    row[0]
}

/// Successive error ratios `|v_k - L| / |v_{k+1} - L|` against a reference
/// limit `L`; tends to 4 for an `O(σ²)` approach.
pub fn convergence_ratios(values: &[C64], limit: C64) -> Vec<f64> {
    values.windows(2).map(|w| (w[0] - limit).norm() / (w[1] - limit).norm()).collect()
}

/// A σ-limit study of one sifting integral.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub sigmas: Vec<f64>,
    pub values: Vec<C64>,
    pub limit: C64,
}

/// Shifted-line sifting on the schedule from `sigma0`, extrapolated to σ → 0.
pub fn sift_limit(f: &AnalyticTestFunction, z0: C64, sigma0: f64, levels: usize) -> Result<LimitEstimate> {
    if levels == 0 {
        return Err(Error::domain("levels", ">= 1", 0.0));
    }
    let sigmas = sigma_schedule(sigma0, levels);
    let values = sigmas
        .iter()
        .map(|&s| sift_shifted_line(f, z0, s, &shifted_line_window(f, z0, s)))
        .collect::<Result<Vec<_>>>()?;
    let limit = richardson_limit(&values);
    Ok(LimitEstimate { sigmas, values, limit })
}
