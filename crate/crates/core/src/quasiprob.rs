//! Q, Wigner and Glauber-Sudarshan P representations of cat states, and the
//! transforms that connect them.
//!
//! Every cat-state density operator is a sum of four terms `κ|γ⟩⟨β|`; each
//! quasiprobability is linear in ρ, so everything here is computed per
//! [`PTerm`] and summed.

use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convolve::{gaussian_smooth, ConvolutionMethod};
use crate::error::{Error, Result};
use crate::gendelta::phi_sigma;
use crate::grid::{AxisSemantics, Grid2D, GridSpec};
use crate::states::{coherent_overlap, CatStateSpec, FockDensityMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PTermKind {
    /// `β = γ`: an ordinary two-dimensional delta at `β`.
    Diagonal,
    /// `β ≠ γ`: a product of generalized deltas with complex centers.
    OffDiagonal,
}

/// One term `κ|γ⟩⟨β|` of a density operator, carrying its P-function
/// `κ⟨β|γ⟩ δ̃(α_r - c_r) δ̃(α_i - c_i)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PTerm {
    pub kappa: C64,
    pub beta: C64,
    pub gamma: C64,
    pub kind: PTermKind,
}

impl PTerm {
    pub fn new(kappa: C64, beta: C64, gamma: C64) -> Self {
        let kind = if beta == gamma { PTermKind::Diagonal } else { PTermKind::OffDiagonal };
        Self { kappa, beta, gamma, kind }
    }

    /// `κ⟨β|γ⟩`: the weight multiplying the delta product, and the trace of the term.
    pub fn weight(&self) -> C64 {
        self.kappa * coherent_overlap(self.beta, self.gamma)
    }

    /// `(c_r, c_i) = ((β* + γ)/2, i(β* - γ)/2)`. Real for diagonal terms.
    pub fn centers(&self) -> (C64, C64) {
        let bc = self.beta.conj();
        ((bc + self.gamma) / 2.0, C64::i() * (bc - self.gamma) / 2.0)
    }

    /// The term obtained by exchanging bra and ket, `κ*|β⟩⟨γ|`.
    pub fn adjoint(&self) -> PTerm {
        PTerm::new(self.kappa.conj(), self.gamma, self.beta)
    }
}

/// The P-function of a cat state as a list of delta-type terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PRepresentation {
    pub terms: Vec<PTerm>,
}

impl PRepresentation {
    pub fn total_weight(&self) -> C64 {
        self.terms.iter().map(PTerm::weight).sum()
    }
}

/// The four terms of the cat-state P-function: `A²δ²(α-α₁)`,
/// `A²|ζ|²δ²(α-α₂)` and the two generalized-delta cross terms for
/// `A²ζ|α₂⟩⟨α₁|` and `A²ζ*|α₁⟩⟨α₂|`. A coherent state (`ζ = 0`) yields its
/// single diagonal term.
pub fn p_cat_terms(spec: &CatStateSpec) -> PRepresentation {
    let a2 = spec.norm().powi(2);
    let (a1, b1, z) = (spec.alpha1(), spec.alpha2(), spec.zeta());
    if z == C64::new(0.0, 0.0) {
        return PRepresentation { terms: vec![PTerm::new(C64::from(a2), a1, a1)] };
    }
    PRepresentation {
        terms: vec![
            PTerm::new(C64::from(a2), a1, a1),
            PTerm::new(C64::from(a2 * z.norm_sqr()), b1, b1),
            PTerm::new(a2 * z, a1, b1),
            PTerm::new(a2 * z.conj(), b1, a1),
        ],
    }
}

/// `(κ/π)⟨β|γ⟩ exp(-(|α|² + β*γ - (β*α + α*γ)))`, the Q-function of `κ|γ⟩⟨β|`.
pub fn q_term(term: &PTerm, alpha: C64) -> C64 {
    let bc = term.beta.conj();
    let e = -(alpha.norm_sqr() + bc * term.gamma - (bc * alpha + alpha.conj() * term.gamma));
    term.kappa * coherent_overlap(term.beta, term.gamma) * e.exp() / PI
}

pub(crate) fn sum_real(parts: impl Iterator<Item = C64>, scale: f64, what: &str) -> f64 {
    let mut total = C64::new(0.0, 0.0);
    let mut mag = 0.0;
    for p in parts {
        total += p;
        mag += p.norm();
    }
    let tol = 1e-12 * scale.max(mag).max(1e-300);
    assert!(
        total.im.abs() <= tol,
        "{what}: imaginary residue {} exceeds tolerance {tol}",
        total.im
    );
    total.re
}

/// `Q(α) = (1/π)⟨α|ρ|α⟩` for the cat state, summed over its four terms.
pub fn q_function(spec: &CatStateSpec, alpha: C64) -> f64 {
    let rep = p_cat_terms(spec);
    sum_real(rep.terms.iter().map(|t| q_term(t, alpha)), 1.0 / PI, "q_function")
}

/// Fourier transform `∬ Q(α) exp(-i(α_r ξ_r + α_i ξ_i)) d²α` of one term:
/// `κ⟨β|γ⟩ exp(-|ξ|²/4) exp(-i(β*+γ)ξ_r/2) exp((β*-γ)ξ_i/2)`.
pub fn q_tilde_term(term: &PTerm, xi: C64) -> C64 {
    let bc = term.beta.conj();
    let g = term.gamma;
    term.weight()
        * (-xi.norm_sqr() / 4.0).exp()
        * (-C64::i() * (bc + g) * xi.re / 2.0).exp()
        * ((bc - g) * xi.im / 2.0).exp()
}

/// `κ⟨β|γ⟩ φ_σ(α_r - c_r) φ_σ(α_i - c_i)` for one term.
pub fn p_term_regularized(term: &PTerm, sigma: f64, alpha: C64) -> Result<C64> {
    let (cr, ci) = term.centers();
    Ok(term.weight() * phi_sigma(alpha.re - cr, sigma)? * phi_sigma(alpha.im - ci, sigma)?)
}

/// The σ-regularized P-function, `Σ κ⟨β|γ⟩ φ_σ(α_r - c_r) φ_σ(α_i - c_i)`.
/// Off-diagonal terms are complex individually; only conjugate pairs sum to
/// a real field.
pub fn p_regularized_eval(rep: &PRepresentation, sigma: f64, alpha: C64) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for t in &rep.terms {
        acc += p_term_regularized(t, sigma, alpha)?;
    }
    Ok(acc)
}

/// Position wavefunction `ψ_n(x) = π^{-1/4} (2ⁿ n!)^{-1/2} H_n(x) e^{-x²/2}`
/// for `n = 0..=n_max`, by the normalized recurrence
/// `ψ_{n+1} = √(2/(n+1)) x ψ_n - √(n/(n+1)) ψ_{n-1}`.
pub fn fock_wavefunctions(n_max: usize, x: f64) -> Vec<f64> {
    let mut psi = Vec::with_capacity(n_max + 1);
    psi.push(PI.powf(-0.25) * (-x * x / 2.0).exp());
    if n_max >= 1 {
        psi.push(2f64.sqrt() * x * psi[0]);
    }
    for n in 1..n_max {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * psi[n] - (nf / (nf + 1.0)).sqrt() * psi[n - 1];
        psi.push(next);
    }
    psi
}

pub fn fock_wavefunction(n: usize, x: f64) -> f64 {
    fock_wavefunctions(n, x)[n]
}

/// `q` nodes for the Wigner integral: wide enough for `ψ_n(x ± q)` and fine
/// enough for the `e^{-2ipq}` phase.
fn wigner_nodes(n_max: usize, p_abs_max: f64) -> Vec<(f64, f64)> {
    let reach = (2.0 * n_max as f64 + 1.0).sqrt() + 9.0;
    let step = 0.04f64.min(2.0 * PI / (2.0 * p_abs_max + 4.0 * (2.0 * n_max as f64 + 1.0).sqrt() + 30.0));
    let m = (2.0 * reach / step).ceil() as usize;
    let h = 2.0 * reach / m as f64;
    (0..=m)
        .map(|k| {
            let w = if k == 0 || k == m { 0.5 * h } else { h };
            (-reach + k as f64 * h, w)
        })
        .collect()
}

fn require_xp(spec: &GridSpec) -> Result<()> {
    if spec.semantics != AxisSemantics::XPQuadratures {
        return Err(Error::Grid("Wigner functions from wavefunctions need an (x, p) grid".into()));
    }
    Ok(())
}

/// `W(x, p) = (1/π) ∫ ⟨x+q|ρ|x-q⟩ e^{-2ipq} dq` on an `(x, p)` grid, by
/// trapezoid quadrature over `q`.
pub fn wigner_from_density(rho: &FockDensityMatrix, spec: &GridSpec) -> Result<Grid2D> {
    require_xp(spec)?;
    let n_max = rho.n_max();
    let p_abs_max = spec.y_min.abs().max(spec.y_max.abs());
    let nodes = wigner_nodes(n_max, p_abs_max);
    let entries = rho.entries();
    let rows: Vec<Vec<C64>> = (0..spec.nx)
        .into_par_iter()
        .map(|i| {
            let x = spec.x(i);
            // kernel ⟨x+q|ρ|x-q⟩ at every node
            let kernel: Vec<C64> = nodes
                .iter()
                .map(|&(q, w)| {
                    let plus = fock_wavefunctions(n_max, x + q);
                    let minus = fock_wavefunctions(n_max, x - q);
                    let mut acc = C64::new(0.0, 0.0);
                    for (j, pj) in plus.iter().enumerate() {
                        if *pj == 0.0 {
                            continue;
                        }
                        let mut row = C64::new(0.0, 0.0);
                        for (k, mk) in minus.iter().enumerate() {
                            row += entries[[j, k]] * *mk;
                        }
                        acc += row * *pj;
                    }
                    acc * w
                })
                .collect();
            (0..spec.ny)
                .map(|j| {
                    let p = spec.y(j);
                    let mut acc = C64::new(0.0, 0.0);
                    for (&(q, _), k) in nodes.iter().zip(kernel.iter()) {
                        acc += k * C64::from_polar(1.0, -2.0 * p * q);
                    }
                    acc / PI
                })
                .collect()
        })
        .collect();
    let flat: Vec<C64> = rows.into_iter().flatten().collect();
    Grid2D::from_values(*spec, ndarray::Array2::from_shape_vec((spec.nx, spec.ny), flat).expect("shape"))
}

/// Wigner function of the number state `|n⟩` on an `(x, p)` grid.
pub fn wigner_fock(n: usize, spec: &GridSpec) -> Result<Grid2D> {
    require_xp(spec)?;
    let p_abs_max = spec.y_min.abs().max(spec.y_max.abs());
    let nodes = wigner_nodes(n, p_abs_max);
    Ok(Grid2D::sample(spec, |x, p| {
        let mut acc = 0.0;
        for &(q, w) in &nodes {
            acc += w * fock_wavefunction(n, x + q) * fock_wavefunction(n, x - q) * (2.0 * p * q).cos();
        }
        // the sine part vanishes: the kernel is even in q
        C64::from(acc / PI)
    }))
}

/// `W(α) = (2/π) ∬ P(β) e^{-2|α-β|²} d²β` from a sampled, smooth P field.
/// `p_field` must cover `out` with enough margin (about 3 in |α|) for the
/// kernel tails, and reach far enough that P is negligible at its edges.
pub fn wigner_from_p(p_field: &Grid2D, out: &GridSpec, method: ConvolutionMethod) -> Result<Grid2D> {
    gaussian_smooth(p_field, out, method)
}

/// Margin that keeps the smoothing kernel's tails on the source grid.
pub const KERNEL_MARGIN: f64 = 3.5;

/// [`wigner_from_p`] for the σ-regularized P of a term list, sampled on a
/// padded lattice around `out`.
pub fn wigner_from_p_rep(
    rep: &PRepresentation,
    sigma: f64,
    out: &GridSpec,
    method: ConvolutionMethod,
) -> Result<Grid2D> {
    if out.semantics != AxisSemantics::AlphaPlane {
        return Err(Error::Grid("wigner_from_p_rep works on the alpha plane".into()));
    }
    if sigma < 2.0 * out.dx().max(out.dy()) {
        warn!(
            "P width sigma = {sigma} is below two grid spacings ({}); the convolution will alias",
            out.dx().max(out.dy())
        );
    }
    let mut excess: f64 = 0.0;
    for t in &rep.terms {
        let (cr, ci) = t.centers();
        if ci.im != 0.0 || cr.im != 0.0 {
            warn!("regularized P term with complex centers ({cr}, {ci}) is not a smooth positive field");
        }
        excess = excess
            .max(out.x_min - cr.re)
            .max(cr.re - out.x_max)
            .max(out.y_min - ci.re)
            .max(ci.re - out.y_max);
    }
    let src = out.padded(KERNEL_MARGIN + 10.0 * sigma + excess.max(0.0));
    let p = Grid2D::try_sample(&src, |x, y| p_regularized_eval(rep, sigma, C64::new(x, y)))?;
    wigner_from_p(&p, out, method)
}

/// `Q(α) = (2/π) ∬ W(β) e^{-2|α-β|²} d²β`. `w` must be an alpha-plane
/// density covering `out` plus [`KERNEL_MARGIN`].
pub fn q_from_wigner(w: &Grid2D, out: &GridSpec, method: ConvolutionMethod) -> Result<Grid2D> {
    gaussian_smooth(w, out, method)
}
