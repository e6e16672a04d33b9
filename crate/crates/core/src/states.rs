//! Coherent states, two-component cat states and truncated Fock-basis
//! density matrices.

use std::ops::{Add, AddAssign, Mul};

use log::warn;
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tail mass above which truncation warnings are emitted.
pub const TAIL_WARN: f64 = 1e-10;

/// `⟨α|β⟩ = exp(-(|α|² + |β|² - 2α*β)/2)`.
pub fn coherent_overlap(alpha: C64, beta: C64) -> C64 {
    (-(alpha.norm_sqr() + beta.norm_sqr() - 2.0 * alpha.conj() * beta) / 2.0).exp()
}

/// The squared norm of `|α₁⟩ + ζ|α₂⟩`.
fn unnormalized_norm_sqr(alpha1: C64, alpha2: C64, zeta: C64) -> f64 {
    1.0 + zeta.norm_sqr() + 2.0 * (zeta * coherent_overlap(alpha1, alpha2)).re
}

/// `A = [1 + |ζ|² + 2 Re(ζ⟨α₁|α₂⟩)]^(-1/2)`.
pub fn cat_normalization(alpha1: C64, alpha2: C64, zeta: C64) -> Result<f64> {
    let n2 = unnormalized_norm_sqr(alpha1, alpha2, zeta);
    // anything this close to zero is a cancelled state, not a small one
    if !(n2 > 1e-14) {
        return Err(Error::DegenerateState { normalizer: n2 });
    }
    Ok(n2.powf(-0.5))
}

/// `A(|α₁⟩ + ζ|α₂⟩)`, with `A` computed at construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CatStateSpec {
    alpha1: C64,
    alpha2: C64,
    zeta: C64,
    norm: f64,
}

impl CatStateSpec {
    pub fn new(alpha1: C64, alpha2: C64, zeta: C64) -> Result<Self> {
        for v in [alpha1, alpha2, zeta] {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::domain("cat amplitude", "finite", f64::NAN));
            }
        }
        let norm = cat_normalization(alpha1, alpha2, zeta)?;
        Ok(Self { alpha1, alpha2, zeta, norm })
    }

    /// A single coherent state `|α⟩`.
    pub fn coherent(alpha: C64) -> Self {
        Self { alpha1: alpha, alpha2: C64::new(0.0, 0.0), zeta: C64::new(0.0, 0.0), norm: 1.0 }
    }

    /// `A(|α₀⟩ + e^{iφ}|-α₀⟩)` for real `α₀`.
    pub fn even_odd(alpha0: f64, phi: f64) -> Result<Self> {
        Self::new(C64::from(alpha0), C64::from(-alpha0), C64::from_polar(1.0, phi))
    }

    pub fn alpha1(&self) -> C64 {
        self.alpha1
    }

    pub fn alpha2(&self) -> C64 {
        self.alpha2
    }

    pub fn zeta(&self) -> C64 {
        self.zeta
    }

    /// The normalization constant `A`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Largest coherent amplitude that carries weight in the state.
    pub fn max_amplitude(&self) -> f64 {
        if self.zeta == C64::new(0.0, 0.0) {
            self.alpha1.norm()
        } else {
            self.alpha1.norm().max(self.alpha2.norm())
        }
    }

    pub fn normalization_residual(&self) -> f64 {
        (self.norm.powi(2) * unnormalized_norm_sqr(self.alpha1, self.alpha2, self.zeta) - 1.0).abs()
    }
}

impl<'de> Deserialize<'de> for CatStateSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            alpha1: C64,
            alpha2: C64,
            zeta: C64,
        }
        let raw = Raw::deserialize(d)?;
        CatStateSpec::new(raw.alpha1, raw.alpha2, raw.zeta).map_err(serde::de::Error::custom)
    }
}

/// Smallest truncation keeping the Poisson tail of `|α⟩` below about 1e-10
/// for `|α| ≤ 3`: `n_max ≥ |α|² + 6|α| + 10`.
pub fn recommended_n_max(alpha_abs: f64) -> usize {
    (alpha_abs * alpha_abs + 6.0 * alpha_abs + 10.0).ceil() as usize
}

/// Probability mass of `|α⟩` above Fock level `n_max`.
pub fn tail_mass(alpha: C64, n_max: usize) -> f64 {
    let lambda = alpha.norm_sqr();
    if lambda == 0.0 {
        return 0.0;
    }
    // Poisson terms summed upward from n_max + 1 until they stop mattering
    let mut ln_term = -lambda;
    for n in 1..=n_max + 1 {
        ln_term += lambda.ln() - (n as f64).ln();
    }
    let mut term = ln_term.exp();
    let mut total = 0.0;
    let mut n = n_max + 1;
    while term > 1e-300 && (term > total * 1e-17 || (n as f64) < lambda) {
        total += term;
        n += 1;
        term *= lambda / n as f64;
        if n > n_max + 100_000 {
            break;
        }
    }
    total
}

/// `c_n = exp(-|α|²/2) αⁿ / √(n!)` for `n = 0..=n_max`.
pub fn coherent_fock_coeffs(alpha: C64, n_max: usize) -> Array1<C64> {
    let tail = tail_mass(alpha, n_max);
    if tail > TAIL_WARN {
        warn!("coherent state |{alpha}> truncated at n_max = {n_max}: tail mass {tail:.2e}");
    }
    let mut c = Array1::zeros(n_max + 1);
    c[0] = C64::from((-alpha.norm_sqr() / 2.0).exp());
    for n in 1..=n_max {
        c[n] = c[n - 1] * alpha / (n as f64).sqrt();
    }
    c
}

/// Dense `(n_max+1)²` matrix in the number basis, `entries[[j, k]] = ⟨j|ρ|k⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockDensityMatrix {
    entries: Array2<C64>,
}

impl FockDensityMatrix {
    pub fn new(entries: Array2<C64>) -> Result<Self> {
        let (r, c) = entries.dim();
        if r != c || r == 0 {
            return Err(Error::Grid(format!("density matrix must be square and nonempty, got {r}x{c}")));
        }
        Ok(Self { entries })
    }

    pub fn zeros(n_max: usize) -> Self {
        Self { entries: Array2::zeros((n_max + 1, n_max + 1)) }
    }

    /// `weight · |ket⟩⟨bra|` from coefficient vectors.
    pub fn outer(weight: C64, ket: &Array1<C64>, bra: &Array1<C64>) -> Self {
        let n = ket.len();
        let entries = Array2::from_shape_fn((n, n), |(j, k)| weight * ket[j] * bra[k].conj());
        Self { entries }
    }

    pub fn n_max(&self) -> usize {
        self.entries.nrows() - 1
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn get(&self, j: usize, k: usize) -> C64 {
        self.entries[[j, k]]
    }

    pub fn trace(&self) -> C64 {
        self.entries.diag().sum()
    }

    /// `max |ρ_jk - conj(ρ_kj)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for k in j..n {
                worst = worst.max((self.entries[[j, k]] - self.entries[[k, j]].conj()).norm());
            }
        }
        worst
    }

    /// Largest elementwise deviation from another matrix of the same size.
    pub fn max_abs_diff(&self, other: &FockDensityMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim(), "density matrices of different truncation");
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn matmul(&self, other: &FockDensityMatrix) -> FockDensityMatrix {
        FockDensityMatrix { entries: self.entries.dot(&other.entries) }
    }

    pub fn scaled(&self, s: C64) -> FockDensityMatrix {
        FockDensityMatrix { entries: self.entries.mapv(|v| v * s) }
    }

    /// Serializes as `{n_max, entries: [[re, im], ...]}` in row-major order.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("density matrix serializes")
    }
}

impl Add for FockDensityMatrix {
    type Output = FockDensityMatrix;
    fn add(mut self, rhs: FockDensityMatrix) -> FockDensityMatrix {
        self += rhs;
        self
    }
}

impl AddAssign for FockDensityMatrix {
    fn add_assign(&mut self, rhs: FockDensityMatrix) {
        assert_eq!(self.dim(), rhs.dim(), "density matrices of different truncation");
        self.entries += &rhs.entries;
    }
}

impl Mul<C64> for &FockDensityMatrix {
    type Output = FockDensityMatrix;
    fn mul(self, s: C64) -> FockDensityMatrix {
        self.scaled(s)
    }
}

#[derive(Serialize, Deserialize)]
struct FockDensityMatrixJson {
    n_max: usize,
    entries: Vec<[f64; 2]>,
}

impl Serialize for FockDensityMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FockDensityMatrixJson {
            n_max: self.n_max(),
            entries: self.entries.iter().map(|v| [v.re, v.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FockDensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = FockDensityMatrixJson::deserialize(d)?;
        let n = raw.n_max + 1;
        if raw.entries.len() != n * n {
            return Err(serde::de::Error::custom(format!(
                "expected {} entries for n_max = {}, got {}",
                n * n,
                raw.n_max,
                raw.entries.len()
            )));
        }
        let v: Vec<C64> = raw.entries.iter().map(|[re, im]| C64::new(*re, *im)).collect();
        let entries = Array2::from_shape_vec((n, n), v).map_err(serde::de::Error::custom)?;
        Ok(FockDensityMatrix { entries })
    }
}

/// `A²(|α₁⟩⟨α₁| + |ζ|²|α₂⟩⟨α₂| + ζ|α₂⟩⟨α₁| + ζ*|α₁⟩⟨α₂|)` truncated at `n_max`.
pub fn cat_density_matrix(spec: &CatStateSpec, n_max: usize) -> FockDensityMatrix {
    let needed = recommended_n_max(spec.max_amplitude());
    if n_max < needed {
        warn!("n_max = {n_max} is below the recommended {needed} for this cat state");
    }
    let a2 = spec.norm().powi(2);
    let c1 = coherent_fock_coeffs(spec.alpha1(), n_max);
    let c2 = coherent_fock_coeffs(spec.alpha2(), n_max);
    let z = spec.zeta();
    FockDensityMatrix::outer(C64::from(a2), &c1, &c1)
        + FockDensityMatrix::outer(C64::from(a2 * z.norm_sqr()), &c2, &c2)
        + FockDensityMatrix::outer(a2 * z, &c2, &c1)
        + FockDensityMatrix::outer(a2 * z.conj(), &c1, &c2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn min_eigenvalue(rho: &FockDensityMatrix) -> f64 {
        let n = rho.dim();
        let m = DMatrix::from_fn(n, n, |j, k| rho.get(j, k));
        m.symmetric_eigen().eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn overlap_examples() {
        let a = c(0.7, -1.3);
        assert!((coherent_overlap(a, a) - 1.0).norm() < 1e-15);
        let b = c(1.1, 0.4);
        assert!((coherent_overlap(c(0.0, 0.0), b) - (-b.norm_sqr() / 2.0).exp()).norm() < 1e-15);
        let o = coherent_overlap(c(1.0, 0.0), c(0.0, 1.0));
        assert!((o.norm_sqr() - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(cat_normalization(c(1.0, 2.0), c(-3.0, 0.0), c(0.0, 0.0)).unwrap(), 1.0);
        let a0 = c(0.8, 0.3);
        assert!((cat_normalization(a0, a0, c(1.0, 0.0)).unwrap() - 0.5).abs() < 1e-15);
        let a = cat_normalization(c(3.0, 0.0), c(-3.0, 0.0), c(1.0, 0.0)).unwrap();
        assert!((a - 0.5f64.sqrt()).abs() < 2e-8);
        assert!(matches!(
            cat_normalization(a0, a0, c(-1.0, 0.0)),
            Err(Error::DegenerateState { .. })
        ));
    }

    #[test]
    fn fock_coefficient_examples() {
        let v = coherent_fock_coeffs(c(0.0, 0.0), 5);
        assert_eq!(v[0], c(1.0, 0.0));
        assert!(v.iter().skip(1).all(|x| *x == c(0.0, 0.0)));
        let big = coherent_fock_coeffs(c(1.5, -0.5), 40);
        let s: f64 = big.iter().map(|x| x.norm_sqr()).sum();
        assert!((s - 1.0).abs() < 1e-10);
        let one = coherent_fock_coeffs(c(1.0, 0.0), 4);
        assert!((one[2].norm_sqr() - (-1.0f64).exp() / 2.0).abs() < 1e-16);
    }

    #[test]
    fn tail_mass_tracks_truncation() {
        assert_eq!(tail_mass(c(0.0, 0.0), 3), 0.0);
        let alpha = c(2.0, 0.0);
        let n = 12;
        let s: f64 = coherent_fock_coeffs(alpha, n).iter().map(|x| x.norm_sqr()).sum();
        assert!((tail_mass(alpha, n) - (1.0 - s)).abs() < 1e-14);
        for a in [0.5, 1.0, 2.0, 3.0] {
            assert!(tail_mass(c(a, 0.0), recommended_n_max(a)) < 1e-10, "|alpha| = {a}");
        }
    }

    #[test]
    fn coherent_density_matrix_closed_form() {
        let a1 = c(1.2, -0.4);
        let spec = CatStateSpec::new(a1, c(-1.0, 0.0), c(0.0, 0.0)).unwrap();
        let rho = cat_density_matrix(&spec, 20);
        let t = crate::numerics::LnFactorials::new(20);
        for j in 0..=20 {
            for k in 0..=20 {
                let expected = (-a1.norm_sqr()).exp()
                    * a1.powu(j as u32)
                    * a1.conj().powu(k as u32)
                    * t.inv_sqrt(j)
                    * t.inv_sqrt(k);
                assert!((rho.get(j, k) - expected).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn cat_density_matrix_is_a_pure_state() {
        for (a0, zeta) in [(2.0, c(1.0, 0.0)), (1.5, c(0.0, 1.0)), (1.0, c(-1.0, 0.0)), (0.5, c(0.3, 0.2))] {
            let spec = CatStateSpec::new(c(a0, 0.0), c(-a0, 0.0), zeta).unwrap();
            let rho = cat_density_matrix(&spec, 30);
            assert!((rho.trace() - 1.0).norm() < 1e-10);
            assert!(rho.hermiticity_error() < 1e-15);
            assert!(rho.matmul(&rho).max_abs_diff(&rho) < 1e-9);
            assert!(min_eigenvalue(&rho) > -1e-9);
        }
    }

    #[test]
    fn degenerate_cat_collapses() {
        let a = c(0.9, 0.9);
        let spec = CatStateSpec::new(a, a, c(1.0, 0.0)).unwrap();
        assert!((spec.norm() - 0.5).abs() < 1e-15);
        let coherent = cat_density_matrix(&CatStateSpec::coherent(a), 25);
        assert!(cat_density_matrix(&spec, 25).max_abs_diff(&coherent) < 1e-14);
    }

    #[test]
    fn density_matrix_json_round_trip() {
        let spec = CatStateSpec::even_odd(1.0, 0.5).unwrap();
        let rho = cat_density_matrix(&spec, 6);
        let text = serde_json::to_string(&rho).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["n_max"], 6);
        assert_eq!(v["entries"].as_array().unwrap().len(), 49);
        assert_eq!(v["entries"][1][0].as_f64().unwrap(), rho.get(0, 1).re);
        let back: FockDensityMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rho);
        assert!(serde_json::from_str::<FockDensityMatrix>(r#"{"n_max":1,"entries":[[1,0]]}"#).is_err());
    }

    #[test]
    fn spec_deserialization_validates() {
        let ok: CatStateSpec =
            serde_json::from_str(r#"{"alpha1":[2,0],"alpha2":[-2,0],"zeta":[1,0]}"#).unwrap();
        assert!(ok.normalization_residual() < 1e-12);
        assert!(serde_json::from_str::<CatStateSpec>(r#"{"alpha1":[1,0],"alpha2":[1,0],"zeta":[-1,0]}"#).is_err());
    }

    fn amp() -> impl Strategy<Value = C64> {
        (-2.0..2.0f64, -2.0..2.0f64)
            .prop_filter("|z| <= 2", |(r, i)| r * r + i * i <= 4.0)
            .prop_map(|(r, i)| C64::new(r, i))
    }

    proptest! {
        #[test]
        fn overlap_is_conjugate_symmetric(a in amp(), b in amp()) {
            let d = coherent_overlap(a, b) - coherent_overlap(b, a).conj();
            prop_assert!(d.norm() < 1e-15);
        }

        #[test]
        fn truncated_inner_product_matches_overlap(a in amp(), b in amp()) {
            let ca = coherent_fock_coeffs(a, 40);
            let cb = coherent_fock_coeffs(b, 40);
            let inner: C64 = ca.iter().zip(cb.iter()).map(|(x, y)| x.conj() * y).sum();
            prop_assert!((inner - coherent_overlap(a, b)).norm() < 1e-10);
        }

        #[test]
        fn normalization_invariant(a in amp(), b in amp(), zr in -2.0..2.0f64, zi in -2.0..2.0f64) {
            if let Ok(spec) = CatStateSpec::new(a, b, C64::new(zr, zi)) {
                prop_assert!(spec.normalization_residual() < 1e-12);
            }
        }

        #[test]
        fn cat_density_matrix_is_physical(a in amp(), b in amp(), zr in -1.5..1.5f64, zi in -1.5..1.5f64) {
            let spec = CatStateSpec::new(a, b, C64::new(zr, zi));
            prop_assume!(spec.is_ok());
            let spec = spec.unwrap();
            prop_assume!(spec.norm() < 1e3);
            let rho = cat_density_matrix(&spec, 34);
            prop_assert!(rho.hermiticity_error() < 1e-12);
            prop_assert!((rho.trace() - 1.0).norm() < 1e-8);
            prop_assert!(min_eigenvalue(&rho) > -1e-9);
        }
    }
}
