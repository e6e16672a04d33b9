//! Special functions and fixed-node quadrature shared by the rest of the crate.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest Hermite order accepted by [`hermite_poly`].
pub const HERMITE_MAX_ORDER: usize = 64;

/// A fixed trapezoid rule on `[center - halfwidth, center + halfwidth]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub center: f64,
    pub halfwidth: f64,
    pub node_count: usize,
}

impl QuadratureSpec {
    pub fn new(center: f64, halfwidth: f64, node_count: usize) -> Result<Self> {
        if !(halfwidth.is_finite() && halfwidth > 0.0) {
            return Err(Error::domain("halfwidth", "finite and > 0", halfwidth));
        }
        if !center.is_finite() {
            return Err(Error::domain("center", "finite", center));
        }
        if node_count < 2 {
            return Err(Error::domain("node_count", ">= 2", node_count as f64));
        }
        Ok(Self { center, halfwidth, node_count })
    }

    /// Window of the given halfwidth whose spacing does not exceed `step`.
    pub fn with_step(center: f64, halfwidth: f64, step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::domain("step", "finite and > 0", step));
        }
        let intervals = (2.0 * halfwidth / step).ceil().max(1.0) as usize;
        Self::new(center, halfwidth, intervals + 1)
    }

    /// Same rule moved to a new center.
    pub fn recentered(&self, center: f64) -> Self {
        Self { center, ..*self }
    }

    pub fn lower(&self) -> f64 {
        self.center - self.halfwidth
    }

    pub fn upper(&self) -> f64 {
        self.center + self.halfwidth
    }

    pub fn step(&self) -> f64 {
        2.0 * self.halfwidth / (self.node_count - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.lower() + i as f64 * self.step()
    }

    pub fn weight(&self, i: usize) -> f64 {
        let h = self.step();
        if i == 0 || i + 1 == self.node_count { 0.5 * h } else { h }
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.node_count).map(move |i| (self.node(i), self.weight(i)))
    }
}

/// Composite trapezoid approximation of the integral of `f` over the window.
///
/// Summation runs in node order so results are reproducible bit for bit.
pub fn quad_real_line<F>(f: F, spec: &QuadratureSpec) -> Result<C64>
where
    F: Fn(f64) -> C64,
{
    let mut acc = C64::new(0.0, 0.0);
    for (index, (x, w)) in spec.nodes().enumerate() {
        let v = f(x);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite { index, x });
        }
        acc += v * w;
    }
    Ok(acc)
}

/// Physicists' Hermite polynomial `H_n(x)` by the three-term recurrence.
pub fn hermite_poly(n: usize, x: C64) -> Result<C64> {
    if n > HERMITE_MAX_ORDER {
        return Err(Error::OrderOutOfRange { order: n, max: HERMITE_MAX_ORDER });
    }
    Ok(hermite_all(n, x)[n])
}

/// `H_0(x) ..= H_n(x)`; callers are responsible for the order guard.
pub(crate) fn hermite_all(n: usize, x: C64) -> Vec<C64> {
    let mut h = Vec::with_capacity(n + 1);
    h.push(C64::new(1.0, 0.0));
    if n >= 1 {
        h.push(2.0 * x);
    }
    for k in 1..n {
        let next = 2.0 * x * h[k] - 2.0 * k as f64 * h[k - 1];
        h.push(next);
    }
    h
}

/// Closed form of `∫ xⁿ exp(-a x² + b x) dx` over the real line:
/// `√(π/a) · (-i / 2√a)ⁿ · H_n(i b / 2√a) · exp(b² / 4a)`.
pub fn gaussian_moment_integral(n: usize, a: f64, b: C64) -> Result<C64> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::domain("a", "finite and > 0", a));
    }
    let sa = a.sqrt();
    let h = hermite_poly(n, C64::i() * b / (2.0 * sa))?;
    let pref = C64::new(0.0, -1.0 / (2.0 * sa)).powu(n as u32);
    Ok((PI / a).sqrt() * pref * h * (b * b / (4.0 * a)).exp())
}

/// Table of `ln k!` for `k = 0..=n`.
#[derive(Clone, Debug)]
pub struct LnFactorials(Vec<f64>);

impl LnFactorials {
    pub fn new(n: usize) -> Self {
        let mut t = Vec::with_capacity(n + 1);
        t.push(0.0);
        for k in 1..=n {
            t.push(t[k - 1] + (k as f64).ln());
        }
        Self(t)
    }

    pub fn ln(&self, k: usize) -> f64 {
        self.0[k]
    }

    /// `1 / √(k!)`.
    pub fn inv_sqrt(&self, k: usize) -> f64 {
        (-0.5 * self.0[k]).exp()
    }
}
