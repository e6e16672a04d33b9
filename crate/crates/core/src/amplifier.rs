//! The phase-insensitive linear amplifier of amplitude gain `g ≥ 1` acting
//! on cat states.
//!
//! The channel rescales the Q-function, `Q_out(α) = Q_in(α/g)/g²`, and turns
//! each P term into a Gaussian pair of width `σ = √((g²-1)/2)`, which
//! collapses back to the generalized deltas as `g → 1`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gendelta::{phi_sigma, shifted_line_window, sift_shifted_line, PlaneTestFunction};
use crate::numerics::LnFactorials;
use crate::quasiprob::{p_cat_terms, sum_real, PTerm};
use crate::states::{coherent_overlap, CatStateSpec, FockDensityMatrix, TAIL_WARN};

/// Amplitude gain `g ≥ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AmplifierGain {
    g: f64,
}

impl AmplifierGain {
    pub fn new(g: f64) -> Result<Self> {
        if !(g.is_finite() && g >= 1.0) {
            return Err(Error::domain("gain", "finite and >= 1", g));
        }
        Ok(Self { g })
    }

    pub const IDENTITY: AmplifierGain = AmplifierGain { g: 1.0 };

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn sigma(&self) -> f64 {
        ((self.g * self.g - 1.0) / 2.0).sqrt()
    }

    /// Composition of two amplifiers in series.
    pub fn then(&self, other: AmplifierGain) -> AmplifierGain {
        AmplifierGain { g: self.g * other.g }
    }

    fn require_smooth(&self) -> Result<()> {
        if self.g > 1.0 {
            Ok(())
        } else {
            Err(Error::SingularLimit { g: self.g, sigma: self.sigma() })
        }
    }
}

impl<'de> Deserialize<'de> for AmplifierGain {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            g: f64,
        }
        let raw = Raw::deserialize(d)?;
        AmplifierGain::new(raw.g).map_err(serde::de::Error::custom)
    }
}

/// `σ(g) = √((g²-1)/2)`.
pub fn sigma_of_gain(g: f64) -> Result<f64> {
    Ok(AmplifierGain::new(g)?.sigma())
}

/// Exponent shared by the amplified Q and P terms,
/// `-(|α|² + g²β*γ - g(β*α + α*γ))`, before division by `g²` or `g²-1`.
fn amplified_exponent(term: &PTerm, g: f64, alpha: C64) -> C64 {
    let bc = term.beta.conj();
    -(alpha.norm_sqr() + bc * term.gamma * (g * g) - (bc * alpha + alpha.conj() * term.gamma) * g)
}

/// `(κ⟨β|γ⟩/(πg²)) exp(-(|α|² + g²β*γ - g(β*α + α*γ))/g²)`.
pub fn amplified_q_term(term: &PTerm, gain: AmplifierGain, alpha: C64) -> C64 {
    let g = gain.g();
    let e = amplified_exponent(term, g, alpha) / (g * g);
    term.kappa * coherent_overlap(term.beta, term.gamma) * e.exp() / (PI * g * g)
}

/// Q-function of the amplified cat state.
pub fn amplify_q(spec: &CatStateSpec, gain: AmplifierGain, alpha: C64) -> f64 {
    let rep = p_cat_terms(spec);
    let scale = 1.0 / (PI * gain.g() * gain.g());
    sum_real(rep.terms.iter().map(|t| amplified_q_term(t, gain, alpha)), scale, "amplify_q")
}

/// `(κ⟨β|γ⟩/(π(g²-1))) exp(-(|α|² + g²β*γ - g(β*α + α*γ))/(g²-1))`, for `g > 1`.
pub fn amplified_p_term(term: &PTerm, gain: AmplifierGain, alpha: C64) -> Result<C64> {
    gain.require_smooth()?;
    let g = gain.g();
    let d = g * g - 1.0;
    let e = amplified_exponent(term, g, alpha) / d;
    Ok(term.kappa * coherent_overlap(term.beta, term.gamma) * e.exp() / (PI * d))
}

/// P-function of the amplified cat state. Cross terms are complex; their sum
/// with the conjugate partner is real.
pub fn amplified_p(spec: &CatStateSpec, gain: AmplifierGain, alpha: C64) -> Result<f64> {
    gain.require_smooth()?;
    let rep = p_cat_terms(spec);
    let parts = rep
        .terms
        .iter()
        .map(|t| amplified_p_term(t, gain, alpha))
        .collect::<Result<Vec<_>>>()?;
    let scale = 1.0 / (PI * (gain.g() * gain.g() - 1.0));
    Ok(sum_real(parts.into_iter(), scale, "amplified_p"))
}

/// The same term as [`amplified_p_term`] written as
/// `κ⟨β|γ⟩ φ_σ(α_r - g c_r) φ_σ(α_i - g c_i)` with `σ = σ(g)`.
pub fn amplified_p_factored(term: &PTerm, gain: AmplifierGain, alpha: C64) -> Result<C64> {
    gain.require_smooth()?;
    let (cr, ci) = term.centers();
    let g = gain.g();
    let s = gain.sigma();
    Ok(term.weight() * phi_sigma(alpha.re - cr * g, s)? * phi_sigma(alpha.im - ci * g, s)?)
}

/// `∬ f(α_r, α_i) P_term,out(α) d²α` for `g > 1`, one shifted-line sift per axis
/// and separable component of `f`.
pub fn pair_with_test_function(f: &PlaneTestFunction, term: &PTerm, gain: AmplifierGain) -> Result<C64> {
    gain.require_smooth()?;
    let (cr, ci) = term.centers();
    let g = gain.g();
    let s = gain.sigma();
    let (zr, zi) = (cr * g, ci * g);
    let mut acc = C64::new(0.0, 0.0);
    for t in &f.terms {
        let a = sift_shifted_line(&t.along_real, zr, s, &shifted_line_window(&t.along_real, zr, s))?;
        let b = sift_shifted_line(&t.along_imag, zi, s, &shifted_line_window(&t.along_imag, zi, s))?;
        acc += t.coeff * a * b;
    }
    Ok(term.weight() * acc)
}

/// Fock matrix of the amplified term `κ|γ⟩⟨β|`:
/// `ρ_jk = κ e^{-(|β|²+|γ|²)/2} g^{-2} Σ_m C(j,m) C(k,m) m! tᵐ (γ/g)^{j-m} (β*/g)^{k-m} / √(j!k!)`
/// with `t = 1 - 1/g²`. Reduces to the unamplified projector at `g = 1`.
pub fn amplified_term_matrix(term: &PTerm, gain: AmplifierGain, n_max: usize) -> FockDensityMatrix {
    let g = gain.g();
    let t = 1.0 - 1.0 / (g * g);
    let u = term.gamma / g;
    let w = term.beta.conj() / g;
    let lf = LnFactorials::new(n_max);
    let pref = term.kappa * (-(term.beta.norm_sqr() + term.gamma.norm_sqr()) / 2.0).exp() / (g * g);
    let up: Vec<C64> = (0..=n_max).map(|k| u.powu(k as u32)).collect();
    let wp: Vec<C64> = (0..=n_max).map(|k| w.powu(k as u32)).collect();
    let entries = ndarray::Array2::from_shape_fn((n_max + 1, n_max + 1), |(j, k)| {
        let mut acc = C64::new(0.0, 0.0);
        for m in 0..=j.min(k) {
            // C(j,m) C(k,m) m! / √(j!k!) = √(j!k!) / (m!(j-m)!(k-m)!)
            let ln_c = 0.5 * (lf.ln(j) + lf.ln(k)) - lf.ln(m) - lf.ln(j - m) - lf.ln(k - m);
            let tm = if m == 0 { 1.0 } else { t.powi(m as i32) };
            acc += up[j - m] * wp[k - m] * (tm * ln_c.exp());
        }
        acc * pref
    });
    FockDensityMatrix::new(entries).expect("square")
}

/// Fock density matrix of the amplified cat state.
pub fn amplified_density_matrix(spec: &CatStateSpec, gain: AmplifierGain, n_max: usize) -> FockDensityMatrix {
    let mut rho = FockDensityMatrix::zeros(n_max);
    for term in &p_cat_terms(spec).terms {
        rho += amplified_term_matrix(term, gain, n_max);
    }
    let tail = (1.0 - rho.trace().re).abs();
    if tail > TAIL_WARN {
        log::warn!("amplified state truncated at n_max = {n_max} loses trace {tail:.2e}");
    }
    rho
}
