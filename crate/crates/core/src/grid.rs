//! Uniformly sampled phase-space fields and their CSV / JSON encodings.
//!
//! CSV: `#`-prefixed metadata lines (`# key = <json value>`), the header
//! `x,y,re,im`, one row per point with `x` varying slowest, then `#` footer
//! lines. JSON: `{meta, axes, nx, ny, values}` with `values` a row-major list
//! of `[re, im]` pairs in the same order.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;
use std::fmt::Write as _;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Which coordinates the two grid axes carry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisSemantics {
    /// `(Re α, Im α)`.
    AlphaPlane,
    /// `(x, p)` with `α = (x + ip)/√2`.
    #[serde(rename = "xp_quadratures")]
    XPQuadratures,
}

/// `α = (x + ip)/√2`.
pub fn alpha_from_xp(x: f64, p: f64) -> C64 {
    C64::new(x, p) / SQRT_2
}

/// Inverse of [`alpha_from_xp`].
pub fn xp_from_alpha(alpha: C64) -> (f64, f64) {
    (SQRT_2 * alpha.re, SQRT_2 * alpha.im)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
    pub semantics: AxisSemantics,
}

impl GridSpec {
    pub fn new(
        (x_min, x_max): (f64, f64),
        (y_min, y_max): (f64, f64),
        nx: usize,
        ny: usize,
        semantics: AxisSemantics,
    ) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::Grid(format!("need at least 2 points per axis, got {nx}x{ny}")));
        }
        for (lo, hi, axis) in [(x_min, x_max, "x"), (y_min, y_max, "y")] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Grid(format!("{axis} range [{lo}, {hi}] is empty or non-finite")));
            }
        }
        Ok(Self { x_min, x_max, y_min, y_max, nx, ny, semantics })
    }

    /// `[-half, half]²` with `n` points per axis.
    pub fn square(half: f64, n: usize, semantics: AxisSemantics) -> Result<Self> {
        Self::new((-half, half), (-half, half), n, n, semantics)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.nx { self.x_max } else { self.x_min + i as f64 * self.dx() }
    }

    pub fn y(&self, j: usize) -> f64 {
        if j + 1 == self.ny { self.y_max } else { self.y_min + j as f64 * self.dy() }
    }

    /// The phase-space point at `(i, j)` as a complex amplitude.
    pub fn alpha(&self, i: usize, j: usize) -> C64 {
        match self.semantics {
            AxisSemantics::AlphaPlane => C64::new(self.x(i), self.y(j)),
            AxisSemantics::XPQuadratures => alpha_from_xp(self.x(i), self.y(j)),
        }
    }

    /// The same lattice extended by at least `margin` on every side.
    pub fn padded(&self, margin: f64) -> GridSpec {
        let ex = (margin / self.dx()).ceil() as usize;
        let ey = (margin / self.dy()).ceil() as usize;
        GridSpec {
            x_min: self.x_min - ex as f64 * self.dx(),
            x_max: self.x_max + ex as f64 * self.dx(),
            y_min: self.y_min - ey as f64 * self.dy(),
            y_max: self.y_max + ey as f64 * self.dy(),
            nx: self.nx + 2 * ex,
            ny: self.ny + 2 * ey,
            semantics: self.semantics,
        }
    }

    pub(crate) fn trapezoid_weight_x(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.nx { 0.5 * self.dx() } else { self.dx() }
    }

    pub(crate) fn trapezoid_weight_y(&self, j: usize) -> f64 {
        if j == 0 || j + 1 == self.ny { 0.5 * self.dy() } else { self.dy() }
    }

    fn axes_json(&self) -> Value {
        json!({
            "x": {"min": self.x_min, "max": self.x_max, "n": self.nx},
            "y": {"min": self.y_min, "max": self.y_max, "n": self.ny},
            "semantics": self.semantics,
        })
    }

    fn from_axes_json(v: &Value) -> Result<Self> {
        let get = |axis: &str, key: &str| -> Result<&Value> {
            v.get(axis)
                .and_then(|a| a.get(key))
                .ok_or_else(|| Error::Parse(format!("axes.{axis}.{key} missing")))
        };
        let num = |axis: &str, key: &str| -> Result<f64> {
            get(axis, key)?.as_f64().ok_or_else(|| Error::Parse(format!("axes.{axis}.{key} not a number")))
        };
        let count = |axis: &str| -> Result<usize> {
            get(axis, "n")?
                .as_u64()
                .map(|n| n as usize)
                .ok_or_else(|| Error::Parse(format!("axes.{axis}.n not an integer")))
        };
        let semantics: AxisSemantics = serde_json::from_value(
            v.get("semantics").cloned().ok_or_else(|| Error::Parse("axes.semantics missing".into()))?,
        )
        .map_err(|e| Error::Parse(e.to_string()))?;
        GridSpec::new(
            (num("x", "min")?, num("x", "max")?),
            (num("y", "min")?, num("y", "max")?),
            count("x")?,
            count("y")?,
            semantics,
        )
    }
}

/// Ordered key/value metadata attached to emitted grids.
pub type Metadata = BTreeMap<String, Value>;

/// A complex field sampled on a [`GridSpec`]; `values[[i, j]]` sits at `(x_i, y_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid2D {
    spec: GridSpec,
    values: Array2<C64>,
}

impl Grid2D {
    pub fn from_values(spec: GridSpec, values: Array2<C64>) -> Result<Self> {
        if values.dim() != (spec.nx, spec.ny) {
            return Err(Error::Grid(format!(
                "values have shape {:?}, grid is {}x{}",
                values.dim(),
                spec.nx,
                spec.ny
            )));
        }
        Ok(Self { spec, values })
    }

    /// Samples `f(x_i, y_j)`. Rows are filled in parallel; each value depends
    /// only on its own point.
    pub fn sample<F>(spec: &GridSpec, f: F) -> Grid2D
    where
        F: Fn(f64, f64) -> C64 + Sync,
    {
        let rows: Vec<Vec<C64>> = (0..spec.nx)
            .into_par_iter()
            .map(|i| (0..spec.ny).map(|j| f(spec.x(i), spec.y(j))).collect())
            .collect();
        let flat: Vec<C64> = rows.into_iter().flatten().collect();
        Grid2D { spec: *spec, values: Array2::from_shape_vec((spec.nx, spec.ny), flat).expect("shape") }
    }

    /// Fallible [`Grid2D::sample`]; the first error in row-major order wins.
    pub fn try_sample<F>(spec: &GridSpec, f: F) -> Result<Grid2D>
    where
        F: Fn(f64, f64) -> Result<C64> + Sync,
    {
        let rows: Vec<Result<Vec<C64>>> = (0..spec.nx)
            .into_par_iter()
            .map(|i| (0..spec.ny).map(|j| f(spec.x(i), spec.y(j))).collect())
            .collect();
        let mut flat = Vec::with_capacity(spec.nx * spec.ny);
        for r in rows {
            flat.extend(r?);
        }
        Ok(Grid2D { spec: *spec, values: Array2::from_shape_vec((spec.nx, spec.ny), flat).expect("shape") })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &Array2<C64> {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.values[[i, j]]
    }

    /// Trapezoid-rule integral over the grid rectangle.
    pub fn integral(&self) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.spec.nx {
            let wx = self.spec.trapezoid_weight_x(i);
            let mut row = C64::new(0.0, 0.0);
            for j in 0..self.spec.ny {
                row += self.values[[i, j]] * self.spec.trapezoid_weight_y(j);
            }
            acc += row * wx;
        }
        acc
    }

    /// Trapezoid integral over `y` at fixed column `i`.
    pub fn column_integral(&self, i: usize) -> C64 {
        (0..self.spec.ny).map(|j| self.values[[i, j]] * self.spec.trapezoid_weight_y(j)).sum()
    }

    pub fn min_re(&self) -> f64 {
        self.values.iter().map(|v| v.re).fold(f64::INFINITY, f64::min)
    }

    pub fn max_re(&self) -> f64 {
        self.values.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Grid2D) -> Result<f64> {
        if self.values.dim() != other.values.dim() {
            return Err(Error::Grid("grids of different shape".into()));
        }
        Ok(self.values.iter().zip(other.values.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// Re-expresses a quasiprobability density sampled on `(x, p)` as a density
    /// over `d²α = dx dp / 2`: axes shrink by `√2`, values double.
    pub fn density_to_alpha_plane(&self) -> Result<Grid2D> {
        if self.spec.semantics != AxisSemantics::XPQuadratures {
            return Err(Error::Grid("grid is already on the alpha plane".into()));
        }
        let s = self.spec;
        let spec = GridSpec {
            x_min: s.x_min / SQRT_2,
            x_max: s.x_max / SQRT_2,
            y_min: s.y_min / SQRT_2,
            y_max: s.y_max / SQRT_2,
            semantics: AxisSemantics::AlphaPlane,
            ..s
        };
        Ok(Grid2D { spec, values: self.values.mapv(|v| 2.0 * v) })
    }

    /// Summary statistics appended as footer lines / `summary` object.
    pub fn summary(&self) -> Metadata {
        let mut m = Metadata::new();
        let integral = self.integral();
        m.insert("integral_re".into(), json!(integral.re));
        m.insert("integral_im".into(), json!(integral.im));
        m.insert("min_re".into(), json!(self.min_re()));
        m.insert("max_re".into(), json!(self.max_re()));
        m.insert("max_abs_im".into(), json!(self.max_abs_imag()));
        m.insert("has_negative_values".into(), json!(self.min_re() < 0.0));
        m
    }

    pub fn to_csv(&self, meta: &Metadata) -> String {
        let mut out = String::new();
        let mut meta = meta.clone();
        meta.insert("axes".into(), self.spec.axes_json());
        for (k, v) in &meta {
            writeln!(out, "# {k} = {v}").unwrap();
        }
        out.push_str("x,y,re,im\n");
        for i in 0..self.spec.nx {
            for j in 0..self.spec.ny {
                let v = self.values[[i, j]];
                writeln!(out, "{:?},{:?},{:?},{:?}", self.spec.x(i), self.spec.y(j), v.re, v.im).unwrap();
            }
        }
        for (k, v) in &self.summary() {
            writeln!(out, "# summary.{k} = {v}").unwrap();
        }
        out
    }

    /// Parses [`Grid2D::to_csv`] output back into the grid and its metadata
    /// (footer lines excluded).
    pub fn from_csv(text: &str) -> Result<(Grid2D, Metadata)> {
        let mut meta = Metadata::new();
        let mut rows: Vec<C64> = Vec::new();
        let mut seen_header = false;
        for (lineno, line) in text.lines().enumerate() {
            if let Some(rest) = line.strip_prefix('#') {
                let (k, v) = rest
                    .trim()
                    .split_once(" = ")
                    .ok_or_else(|| Error::Parse(format!("line {}: malformed metadata", lineno + 1)))?;
                if k.starts_with("summary.") {
                    continue;
                }
                let v: Value = serde_json::from_str(v)
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
                meta.insert(k.to_string(), v);
            } else if !seen_header {
                if line.trim() != "x,y,re,im" {
                    return Err(Error::Parse(format!("line {}: expected header x,y,re,im", lineno + 1)));
                }
                seen_header = true;
            } else if !line.trim().is_empty() {
                let fields: Vec<&str> = line.split(',').collect();
                if fields.len() != 4 {
                    return Err(Error::Parse(format!("line {}: expected 4 fields", lineno + 1)));
                }
                let parse = |s: &str| -> Result<f64> {
                    s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
                };
                rows.push(C64::new(parse(fields[2])?, parse(fields[3])?));
            }
        }
        let axes = meta.remove("axes").ok_or_else(|| Error::Parse("axes metadata missing".into()))?;
        let spec = GridSpec::from_axes_json(&axes)?;
        if rows.len() != spec.nx * spec.ny {
            return Err(Error::Parse(format!("expected {} rows, found {}", spec.nx * spec.ny, rows.len())));
        }
        let values = Array2::from_shape_vec((spec.nx, spec.ny), rows).expect("shape");
        Ok((Grid2D { spec, values }, meta))
    }

    pub fn to_json(&self, meta: &Metadata) -> Value {
        let mut meta = meta.clone();
        meta.insert("summary".into(), serde_json::to_value(self.summary()).expect("summary"));
        json!({
            "meta": meta,
            "axes": self.spec.axes_json(),
            "nx": self.spec.nx,
            "ny": self.spec.ny,
            "values": self.values.iter().map(|v| [v.re, v.im]).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<(Grid2D, Metadata)> {
        let spec = GridSpec::from_axes_json(v.get("axes").ok_or_else(|| Error::Parse("axes missing".into()))?)?;
        for (key, n) in [("nx", spec.nx), ("ny", spec.ny)] {
            if v.get(key).and_then(Value::as_u64) != Some(n as u64) {
                return Err(Error::Parse(format!("{key} disagrees with axes")));
            }
        }
        let raw: Vec<[f64; 2]> = serde_json::from_value(
            v.get("values").cloned().ok_or_else(|| Error::Parse("values missing".into()))?,
        )
        .map_err(|e| Error::Parse(e.to_string()))?;
        if raw.len() != spec.nx * spec.ny {
            return Err(Error::Parse(format!("expected {} values, found {}", spec.nx * spec.ny, raw.len())));
        }
        let values =
            Array2::from_shape_vec((spec.nx, spec.ny), raw.iter().map(|[r, i]| C64::new(*r, *i)).collect())
                .expect("shape");
        let mut meta: Metadata = match v.get("meta") {
            Some(m) => serde_json::from_value(m.clone()).map_err(|e| Error::Parse(e.to_string()))?,
            None => Metadata::new(),
        };
        meta.remove("summary");
        Ok((Grid2D { spec, values }, meta))
    }
}
