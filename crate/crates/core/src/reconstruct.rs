//! Fock-basis density matrices rebuilt from the P representation.
//!
//! Sifting `e^{-|α|²} αʲ α*ᵏ / √(j!k!)` through the generalized deltas of a
//! term replaces `α` by `c_r + i c_i = γ` and `α*` by `c_r - i c_i = β*`, so
//! each term reconstructs `κ|γ⟩⟨β|` with different ket and bra amplitudes.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gendelta::{phi_sigma, richardson_limit, sigma_schedule, PlaneTestFunction, RegularizedDelta};
use crate::numerics::{LnFactorials, QuadratureSpec};
use crate::quasiprob::{p_cat_terms, PRepresentation, PTerm, PTermKind};
use crate::states::{cat_density_matrix, coherent_fock_coeffs, tail_mass, CatStateSpec, FockDensityMatrix, TAIL_WARN};

/// Largest `j + k` evaluated by [`reconstruct_rho_numeric`].
pub const NUMERIC_MAX_ORDER: usize = 12;

/// Largest `exp(|Im c|²/2σ²)` amplification accepted by the numeric path.
pub const NUMERIC_AMPLIFICATION_LIMIT: f64 = 1e10;

/// `ρ_jk = w e^{-(c_r² + c_i²)} (c_r + i c_i)ʲ (c_r - i c_i)ᵏ / √(j!k!)`: the
/// sifted Fock expansion for a term of weight `w` at centers `(c_r, c_i)`.
pub fn rho_from_centers(weight: C64, cr: C64, ci: C64, n_max: usize) -> FockDensityMatrix {
    let ket = cr + C64::i() * ci;
    let bra = cr - C64::i() * ci;
    let lf = LnFactorials::new(n_max);
    let pref = weight * (-(cr * cr + ci * ci)).exp();
    let kp: Vec<C64> = (0..=n_max).map(|j| ket.powu(j as u32) * lf.inv_sqrt(j)).collect();
    let bp: Vec<C64> = (0..=n_max).map(|k| bra.powu(k as u32) * lf.inv_sqrt(k)).collect();
    let e = Array2::from_shape_fn((n_max + 1, n_max + 1), |(j, k)| pref * kp[j] * bp[k]);
    FockDensityMatrix::new(e).expect("square")
}

/// Closed-form reconstruction of one term; equals `κ|γ⟩⟨β|`.
pub fn rho_from_pterm(term: &PTerm, n_max: usize) -> FockDensityMatrix {
    let reach = term.beta.norm().max(term.gamma.norm());
    let tail = tail_mass(C64::from(reach), n_max);
    if tail > TAIL_WARN {
        log::warn!("reconstruction at n_max = {n_max} truncates amplitude {reach}: tail mass {tail:.2e}");
    }
    let (cr, ci) = term.centers();
    rho_from_centers(term.weight(), cr, ci, n_max)
}

pub fn reconstruct_rho(rep: &PRepresentation, n_max: usize) -> FockDensityMatrix {
    let mut rho = FockDensityMatrix::zeros(n_max);
    for t in &rep.terms {
        rho += rho_from_pterm(t, n_max);
    }
    rho
}

/// `∬ f P_term d²α` in the delta limit: `κ⟨β|γ⟩ f(c_r, c_i)`.
pub fn sift_pterm(f: &PlaneTestFunction, term: &PTerm) -> C64 {
    let (cr, ci) = term.centers();
    term.weight() * f.eval(cr, ci)
}

/// Result of the quadrature reconstruction at finite σ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericReconstruction {
    pub sigma: f64,
    /// Entries with `j + k > max_order` are left at zero.
    pub max_order: usize,
    /// Sum over `α_r` first, then `α_i`.
    pub rho: FockDensityMatrix,
    /// Largest `exp(|Im c_r|²/2σ²) exp(|Im c_i|²/2σ²)` over the terms.
    pub cancellation_factor: f64,
    /// Max elementwise difference against the reverse summation order.
    pub ordering_residual: f64,
}

fn axis_nodes(center: C64, sigma: f64, template: Option<&QuadratureSpec>) -> Result<Vec<(f64, f64)>> {
    let q = match template {
        Some(t) => t.recentered(center.re),
        None => RegularizedDelta::new(sigma, center)?.direct_window(),
    };
    Ok(q.nodes().collect())
}

/// Both iterated-sum orders of `∬ P_σ,term e^{-|α|²} αʲ α*ᵏ / √(j!k!) d²α`.
fn numeric_term(
    term: &PTerm,
    sigma: f64,
    order: usize,
    template: Option<&QuadratureSpec>,
) -> Result<(Array2<C64>, Array2<C64>)> {
    let (cr, ci) = term.centers();
    let xs = axis_nodes(cr, sigma, template)?;
    let ys = axis_nodes(ci, sigma, template)?;
    let kx = xs
        .iter()
        .map(|&(x, w)| Ok(phi_sigma(x - cr, sigma)? * (-x * x).exp() * w))
        .collect::<Result<Vec<_>>>()?;
    let ky = ys
        .iter()
        .map(|&(y, w)| Ok(phi_sigma(y - ci, sigma)? * (-y * y).exp() * w))
        .collect::<Result<Vec<_>>>()?;
    let lf = LnFactorials::new(order);
    let dim = order + 1;

    // monomials αʲ α*ᵏ / √(j!k!) at one point, j + k ≤ order
    let accumulate = |acc: &mut Array2<C64>, x: f64, y: f64, weight: C64| {
        let u = C64::new(x, y);
        let w = u.conj();
        let mut pu = vec![C64::new(1.0, 0.0); dim];
        let mut pw = vec![C64::new(1.0, 0.0); dim];
        for n in 1..dim {
            pu[n] = pu[n - 1] * u;
            pw[n] = pw[n - 1] * w;
        }
        for j in 0..dim {
            let a = weight * pu[j] * lf.inv_sqrt(j);
            for k in 0..dim - j {
                acc[[j, k]] += a * pw[k] * lf.inv_sqrt(k);
            }
        }
    };

    let real_first: Vec<Array2<C64>> = ys
        .par_iter()
        .zip(ky.par_iter())
        .map(|(&(y, _), &wy)| {
            let mut inner = Array2::zeros((dim, dim));
            for (&(x, _), &wx) in xs.iter().zip(kx.iter()) {
                accumulate(&mut inner, x, y, wx);
            }
            inner * wy
        })
        .collect();
    let imag_first: Vec<Array2<C64>> = xs
        .par_iter()
        .zip(kx.par_iter())
        .map(|(&(x, _), &wx)| {
            let mut inner = Array2::zeros((dim, dim));
            for (&(y, _), &wy) in ys.iter().zip(ky.iter()) {
                accumulate(&mut inner, x, y, wy);
            }
            inner * wx
        })
        .collect();
    // fixed-order reductions
    let sum = |parts: Vec<Array2<C64>>| {
        parts.into_iter().fold(Array2::<C64>::zeros((dim, dim)), |acc, p| acc + p) * term.weight()
    };
    Ok((sum(real_first), sum(imag_first)))
}

/// Reconstruction by iterated real-axis quadrature of the σ-regularized P
/// against the Fock expansion of `|α⟩⟨α|`. `quad`, when given, sets the
/// halfwidth and node count of every axis window (recentered per term);
/// otherwise each axis gets the direct-sifting window of its center.
pub fn reconstruct_rho_numeric(
    rep: &PRepresentation,
    sigma: f64,
    n_max: usize,
    quad: Option<&QuadratureSpec>,
) -> Result<NumericReconstruction> {
    let mut factor: f64 = 1.0;
    for t in &rep.terms {
        let (cr, ci) = t.centers();
        let b2 = cr.im * cr.im + ci.im * ci.im;
        let f = (b2 / (2.0 * sigma * sigma)).exp();
        if !(f <= NUMERIC_AMPLIFICATION_LIMIT) {
            let imag = b2.sqrt();
            return Err(Error::RegularizationTooSmall {
                sigma,
                imag,
                min_sigma: imag / (2.0 * NUMERIC_AMPLIFICATION_LIMIT.ln()).sqrt(),
            });
        }
        factor = factor.max(f);
    }
    let order = NUMERIC_MAX_ORDER.min(2 * n_max);
    let dim = order.min(n_max) + 1;
    let mut a = Array2::<C64>::zeros((dim, dim));
    let mut b = Array2::<C64>::zeros((dim, dim));
    for t in &rep.terms {
        let (ra, rb) = numeric_term(t, sigma, order, quad)?;
        for j in 0..dim {
            for k in 0..dim {
                if j + k <= order {
                    a[[j, k]] += ra[[j, k]];
                    b[[j, k]] += rb[[j, k]];
                }
            }
        }
    }
    let ordering_residual = a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let mut full = Array2::zeros((n_max + 1, n_max + 1));
    full.slice_mut(ndarray::s![..dim, ..dim]).assign(&a);
    Ok(NumericReconstruction {
        sigma,
        max_order: order,
        rho: FockDensityMatrix::new(full)?,
        cancellation_factor: factor,
        ordering_residual,
    })
}

/// Numeric reconstructions on the halving schedule from `sigma0`, with the
/// Richardson extrapolation of every entry to σ → 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionLimit {
    pub levels: Vec<NumericReconstruction>,
    pub limit: FockDensityMatrix,
}

pub fn reconstruct_rho_limit(
    rep: &PRepresentation,
    sigma0: f64,
    levels: usize,
    n_max: usize,
) -> Result<ReconstructionLimit> {
    if levels == 0 {
        return Err(Error::domain("levels", ">= 1", 0.0));
    }
    let runs = sigma_schedule(sigma0, levels)
        .into_iter()
        .map(|s| reconstruct_rho_numeric(rep, s, n_max, None))
        .collect::<Result<Vec<_>>>()?;
    let dim = n_max + 1;
    let limit = Array2::from_shape_fn((dim, dim), |(j, k)| {
        let seq: Vec<C64> = runs.iter().map(|r| r.rho.get(j, k)).collect();
        richardson_limit(&seq)
    });
    Ok(ReconstructionLimit { levels: runs, limit: FockDensityMatrix::new(limit)? })
}

/// Outcome of rebuilding a cat state's density matrix from its P terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundTripReport {
    pub n_max: usize,
    pub max_abs_deviation: f64,
    pub trace_deviation: f64,
    /// `(term index, matched)`: each term's reconstruction equals `κ|γ⟩⟨β|`
    /// built from coherent-state Fock coefficients.
    pub per_term_checks: Vec<(usize, bool)>,
}

impl RoundTripReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_abs_deviation <= tol && self.per_term_checks.iter().all(|(_, ok)| *ok)
    }
}

/// Tolerance for the per-term `κ|γ⟩⟨β|` comparison.
pub const TERM_MATCH_TOL: f64 = 1e-12;

pub fn roundtrip_report(spec: &CatStateSpec, n_max: usize) -> RoundTripReport {
    roundtrip_report_with(spec, n_max, rho_from_pterm)
}

/// [`roundtrip_report`] with a caller-supplied per-term reconstruction.
pub fn roundtrip_report_with<F>(spec: &CatStateSpec, n_max: usize, rho_of_term: F) -> RoundTripReport
where
    F: Fn(&PTerm, usize) -> FockDensityMatrix,
{
    let direct = cat_density_matrix(spec, n_max);
    let rep = p_cat_terms(spec);
    let mut recon = FockDensityMatrix::zeros(n_max);
    let mut per_term_checks = Vec::with_capacity(rep.terms.len());
    for (i, t) in rep.terms.iter().enumerate() {
        let r = rho_of_term(t, n_max);
        let oracle = FockDensityMatrix::outer(
            t.kappa,
            &coherent_fock_coeffs(t.gamma, n_max),
            &coherent_fock_coeffs(t.beta, n_max),
        );
        per_term_checks.push((i, r.max_abs_diff(&oracle) <= TERM_MATCH_TOL));
        recon += r;
    }
    RoundTripReport {
        n_max,
        max_abs_deviation: recon.max_abs_diff(&direct),
        trace_deviation: (recon.trace() - direct.trace()).norm(),
        per_term_checks,
    }
}

/// Checks that a reconstructed off-diagonal term is rank one with column
/// space along the Fock vector of `γ` and row space along that of `β`.
/// Returns the largest residual after projecting both out.
pub fn ket_bra_residual(term: &PTerm, rho: &FockDensityMatrix) -> f64 {
    debug_assert!(term.kind == PTermKind::OffDiagonal || term.beta == term.gamma);
    let n = rho.n_max();
    let ket = coherent_fock_coeffs(term.gamma, n);
    let bra = coherent_fock_coeffs(term.beta, n);
    let kn = ket.iter().map(|v| v.norm_sqr()).sum::<f64>();
    let bn = bra.iter().map(|v| v.norm_sqr()).sum::<f64>();
    // coefficient of |ket⟩⟨bra| in ρ
    let mut s = C64::new(0.0, 0.0);
    for j in 0..=n {
        for k in 0..=n {
            s += ket[j].conj() * rho.get(j, k) * bra[k];
        }
    }
    s /= kn * bn;
    let mut worst: f64 = 0.0;
    for j in 0..=n {
        for k in 0..=n {
            worst = worst.max((rho.get(j, k) - s * ket[j] * bra[k].conj()).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplifier::{amplified_term_matrix, AmplifierGain};
    use crate::gendelta::AnalyticTestFunction;
    use crate::states::coherent_overlap;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Exact finite-σ reconstruction of one term: the same Gaussian pair
    /// arises from the amplifier at σ(g) = σ acting on `κ'|γ/g⟩⟨β/g|`.
    fn finite_sigma_oracle(t: &PTerm, sigma: f64, n_max: usize) -> FockDensityMatrix {
        let g = (1.0 + 2.0 * sigma * sigma).sqrt();
        let (b, gm) = (t.beta / g, t.gamma / g);
        let kappa = t.weight() / coherent_overlap(b, gm);
        amplified_term_matrix(&PTerm::new(kappa, b, gm), AmplifierGain::new(g).unwrap(), n_max)
    }

    fn masked_diff(a: &FockDensityMatrix, b: &FockDensityMatrix, order: usize) -> f64 {
        let n = a.n_max();
        let mut worst: f64 = 0.0;
        for j in 0..=n {
            for k in 0..=n {
                if j + k <= order {
                    worst = worst.max((a.get(j, k) - b.get(j, k)).norm());
                }
            }
        }
        worst
    }

    #[test]
    fn diagonal_term_is_coherent_projector() {
        let a = c(0.9, -0.4);
        let t = PTerm::new(c(1.0, 0.0), a, a);
        let r = rho_from_pterm(&t, 30);
        let v = coherent_fock_coeffs(a, 30);
        let p = FockDensityMatrix::outer(c(1.0, 0.0), &v, &v);
        assert!(r.max_abs_diff(&p) < 1e-12);
    }

    #[test]
    fn off_diagonal_term_has_distinct_bra_and_ket() {
        let spec = CatStateSpec::even_odd(1.2, 0.3).unwrap();
        let t = p_cat_terms(&spec).terms[2];
        let r = rho_from_pterm(&t, 30);
        let oracle = FockDensityMatrix::outer(
            t.kappa,
            &coherent_fock_coeffs(t.gamma, 30),
            &coherent_fock_coeffs(t.beta, 30),
        );
        assert!(r.max_abs_diff(&oracle) < 1e-12);
        assert!(ket_bra_residual(&t, &r) < 1e-12);
        // swapping bra and ket amplitudes gives a different operator
        let swapped = FockDensityMatrix::outer(
            t.kappa,
            &coherent_fock_coeffs(t.beta, 30),
            &coherent_fock_coeffs(t.gamma, 30),
        );
        assert!(r.max_abs_diff(&swapped) > 1e-2);
        assert!(ket_bra_residual(&PTerm::new(t.kappa, t.gamma, t.beta), &r) > 1e-2);
    }

    #[test]
    fn reconstruction_examples() {
        let coh = CatStateSpec::coherent(c(1.0, 0.5));
        let r = reconstruct_rho(&p_cat_terms(&coh), 30);
        assert!(r.max_abs_diff(&cat_density_matrix(&coh, 30)) < 1e-15);
        let spec = CatStateSpec::new(c(1.5, 0.0), c(-1.5, 0.0), c(0.0, 1.0)).unwrap();
        let r = reconstruct_rho(&p_cat_terms(&spec), 30);
        assert!(r.max_abs_diff(&cat_density_matrix(&spec, 30)) < 1e-10);
        assert!((r.trace() - 1.0).norm() < 1e-10);
        assert!(r.hermiticity_error() < 1e-12);
    }

    #[test]
    fn roundtrip_examples() {
        let specs = [
            CatStateSpec::new(c(1.0, 1.0), c(1.0, 1.0), c(1.0, 0.0)).unwrap(),
            CatStateSpec::even_odd(2.0, PI / 2.0).unwrap(),
            CatStateSpec::new(c(0.4, -1.3), c(-1.1, 0.2), c(0.7, -0.2)).unwrap(),
        ];
        for s in &specs {
            let rep = roundtrip_report(s, 30);
            assert!(rep.passed(1e-10), "{rep:?}");
            assert_eq!(rep.per_term_checks.len(), 4);
        }
        assert!((specs[0].norm() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn flipped_center_is_detected() {
        let spec = CatStateSpec::new(c(1.5, 0.0), c(-1.5, 0.0), c(0.0, 1.0)).unwrap();
        let rep = roundtrip_report_with(&spec, 30, |t, n| {
            let (cr, ci) = t.centers();
            rho_from_centers(t.weight(), cr, -ci, n)
        });
        assert!(rep.max_abs_deviation > 0.1);
        assert!(!rep.passed(1e-10));
    }

    #[test]
    fn sift_pterm_is_weight_times_value_at_centers() {
        let t = PTerm::new(c(0.5, 0.0), c(1.0, 0.0), c(1.0, 0.0));
        assert!((sift_pterm(&PlaneTestFunction::constant(), &t) - 0.5).norm() < 1e-15);
        let id = sift_pterm(&PlaneTestFunction::identity(), &t);
        assert!((id - 0.5).norm() < 1e-15);
    }

    #[test]
    fn numeric_matches_exact_finite_sigma() {
        let spec = CatStateSpec::new(c(0.8, 0.0), c(-0.4, 0.3), c(0.6, 0.2)).unwrap();
        let rep = p_cat_terms(&spec);
        let sigma = 0.4;
        let num = reconstruct_rho_numeric(&rep, sigma, 8, None).unwrap();
        let mut oracle = FockDensityMatrix::zeros(8);
        for t in &rep.terms {
            oracle += finite_sigma_oracle(t, sigma, 8);
        }
        let d = masked_diff(&num.rho, &oracle, NUMERIC_MAX_ORDER);
        assert!(d < 1e-10, "{d}");
        assert!(num.ordering_residual < 1e-12);
        assert!(num.cancellation_factor > 1.0);
        assert_eq!(num.rho.get(8, 8), c(0.0, 0.0));
    }

    #[test]
    fn numeric_diagonal_limit() {
        let a1 = c(0.7, -0.3);
        let rep = p_cat_terms(&CatStateSpec::coherent(a1));
        let lim = reconstruct_rho_limit(&rep, 0.1, 4, 6).unwrap();
        let exact = reconstruct_rho(&rep, 6);
        assert!(masked_diff(&lim.limit, &exact, NUMERIC_MAX_ORDER) < 1e-6);
        assert!((lim.limit.get(0, 0).re - (-a1.norm_sqr()).exp()).abs() < 1e-6);
        assert_eq!(lim.levels[0].cancellation_factor, 1.0);
    }

    #[test]
    fn numeric_off_diagonal_error_is_quadratic_in_sigma() {
        // |Im c_i| = 0.5
        let t = PTerm::new(c(1.0, 0.0), c(0.5, 0.0), c(-0.5, 0.0));
        assert!((t.centers().1.im - 0.5).abs() < 1e-15);
        let rep = PRepresentation { terms: vec![t] };
        let exact = reconstruct_rho(&rep, 6);
        let err = |s: f64| masked_diff(&reconstruct_rho_numeric(&rep, s, 6, None).unwrap().rho, &exact, 12);
        let e: Vec<f64> = [0.4, 0.2, 0.1, 0.08].iter().map(|&s| err(s)).collect();
        // pre-asymptotic at σ = 0.4: relative corrections scale like (1 + 2σ²)^{-(j+k)/2}
        assert!(e[0] / e[1] > 2.0);
        let r = e[1] / e[2];
        assert!((r - 4.0).abs() < 0.6, "ratio {r}");
        let r = e[2] / e[3];
        assert!((r - 1.5625).abs() < 0.1, "ratio {r}");
    }

    #[test]
    fn numeric_guard() {
        let t = PTerm::new(c(1.0, 0.0), c(1.5, 0.0), c(-1.5, 0.0));
        let rep = PRepresentation { terms: vec![t] };
        match reconstruct_rho_numeric(&rep, 0.1, 4, None) {
            Err(Error::RegularizationTooSmall { min_sigma, .. }) => assert!(min_sigma > 0.1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn explicit_quadrature_template() {
        let t = PTerm::new(c(1.0, 0.0), c(0.3, 0.2), c(0.3, 0.2));
        let rep = PRepresentation { terms: vec![t] };
        let q = QuadratureSpec::new(0.0, 4.0, 801).unwrap();
        let a = reconstruct_rho_numeric(&rep, 0.3, 4, Some(&q)).unwrap();
        let b = finite_sigma_oracle(&t, 0.3, 4);
        assert!(masked_diff(&a.rho, &b, 12) < 1e-10);
    }

    #[test]
    fn sifting_a_plane_function_through_the_term() {
        let f = PlaneTestFunction::product(
            AnalyticTestFunction::gaussian(1.5).unwrap(),
            AnalyticTestFunction::envelope(2.0, vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap(),
        );
        let t = p_cat_terms(&CatStateSpec::even_odd(1.0, 0.0).unwrap()).terms[2];
        let (cr, ci) = t.centers();
        let v = sift_pterm(&f, &t);
        assert!((v - t.weight() * f.eval(cr, ci)).norm() == 0.0);
    }

    fn amp() -> impl Strategy<Value = C64> {
        (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(r, i)| c(r, i)).prop_filter("|α| ≤ 2", |a| a.norm() <= 2.0)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn linearity_is_exact(a in amp(), b in amp(), zr in -1.5..1.5f64, zi in -1.5..1.5f64) {
            prop_assume!(CatStateSpec::new(a, b, c(zr, zi)).is_ok());
            let rep = p_cat_terms(&CatStateSpec::new(a, b, c(zr, zi)).unwrap());
            let whole = reconstruct_rho(&rep, 20);
            let mut parts = FockDensityMatrix::zeros(20);
            for t in &rep.terms {
                parts += reconstruct_rho(&PRepresentation { terms: vec![*t] }, 20);
            }
            prop_assert_eq!(whole.max_abs_diff(&parts), 0.0);
        }

        #[test]
        fn reconstruction_is_hermitian_and_exact(a in amp(), b in amp(), zr in -1.5..1.5f64, zi in -1.5..1.5f64) {
            prop_assume!(CatStateSpec::new(a, b, c(zr, zi)).is_ok());
            let spec = CatStateSpec::new(a, b, c(zr, zi)).unwrap();
            let rep = roundtrip_report(&spec, 30);
            prop_assert!(rep.passed(1e-10), "{:?}", rep);
            let r = reconstruct_rho(&p_cat_terms(&spec), 30);
            prop_assert!(r.hermiticity_error() < 1e-12);
        }

        #[test]
        fn off_diagonal_terms_are_ket_bra(a in amp(), b in amp()) {
            prop_assume!((a - b).norm() > 0.1);
            let t = PTerm::new(c(0.3, 0.4), a, b);
            let r = rho_from_pterm(&t, 30);
            prop_assert!(ket_bra_residual(&t, &r) < 1e-12);
        }
    }
}
