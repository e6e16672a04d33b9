//! Gaussian smoothing `(2/π) ∬ F(β) exp(-2|α - β|²) d²β` of a sampled field.
//!
//! The kernel factorizes over the two axes, so the double sum is applied as
//! two one-dimensional passes. Source samples carry trapezoid weights.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{AxisSemantics, Grid2D, GridSpec};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvolutionMethod {
    /// Direct summation.
    #[default]
    Direct,
    /// FFT-based linear convolution; needs the output on the source lattice.
    Fft,
}

/// One-axis factor `√(2/π) exp(-2 d²)` of the smoothing kernel.
fn kernel_1d(d: f64) -> f64 {
    (2.0 / PI).sqrt() * (-2.0 * d * d).exp()
}

/// Smooths `field` with the `(2/π) exp(-2|α-β|²)` kernel, evaluated on `out`.
///
/// Both grids must be on the alpha plane. The source grid must extend far
/// enough beyond `out` that the field is negligible outside it.
pub fn gaussian_smooth(field: &Grid2D, out: &GridSpec, method: ConvolutionMethod) -> Result<Grid2D> {
    let src = field.spec();
    if src.semantics != AxisSemantics::AlphaPlane || out.semantics != AxisSemantics::AlphaPlane {
        return Err(Error::Grid("gaussian smoothing is defined on alpha-plane grids".into()));
    }
    match method {
        ConvolutionMethod::Direct => Ok(direct(field, out)),
        ConvolutionMethod::Fft => fft(field, out),
    }
}

fn weighted_source(field: &Grid2D) -> Array2<C64> {
    let s = field.spec();
    Array2::from_shape_fn((s.nx, s.ny), |(i, j)| {
        field.get(i, j) * (s.trapezoid_weight_x(i) * s.trapezoid_weight_y(j))
    })
}

fn direct(field: &Grid2D, out: &GridSpec) -> Grid2D {
    let s = field.spec();
    let w = weighted_source(field);
    let ky = Array2::from_shape_fn((out.ny, s.ny), |(jo, js)| kernel_1d(out.y(jo) - s.y(js)));
    let kx = Array2::from_shape_fn((out.nx, s.nx), |(io, is)| kernel_1d(out.x(io) - s.x(is)));

    // pass 1: along y, for every source column
    let partial: Vec<Vec<C64>> = (0..s.nx)
        .into_par_iter()
        .map(|is| {
            (0..out.ny)
                .map(|jo| {
                    let mut acc = C64::new(0.0, 0.0);
                    for js in 0..s.ny {
                        acc += w[[is, js]] * ky[[jo, js]];
                    }
                    acc
                })
                .collect()
        })
        .collect();
    // pass 2: along x
    let rows: Vec<Vec<C64>> = (0..out.nx)
        .into_par_iter()
        .map(|io| {
            (0..out.ny)
                .map(|jo| {
                    let mut acc = C64::new(0.0, 0.0);
                    for is in 0..s.nx {
                        acc += kx[[io, is]] * partial[is][jo];
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let flat: Vec<C64> = rows.into_iter().flatten().collect();
    Grid2D::from_values(*out, Array2::from_shape_vec((out.nx, out.ny), flat).expect("shape")).expect("shape")
}

/// Index offset of `out` on the source lattice along one axis.
fn lattice_offset(src_min: f64, src_step: f64, out_min: f64, out_step: f64) -> Result<isize> {
    if ((src_step - out_step) / src_step).abs() > 1e-9 {
        return Err(Error::Grid(format!(
            "fft convolution needs equal spacing, got {src_step} and {out_step}"
        )));
    }
    let shift = (out_min - src_min) / src_step;
    let k = shift.round();
    if (shift - k).abs() > 1e-6 {
        return Err(Error::Grid("fft convolution needs the output on the source lattice".into()));
    }
    Ok(k as isize)
}

/// Linear convolution of every row of `data` (rows × n_src) with the kernel,
/// returning rows × n_out samples at lattice positions `offset..offset+n_out`.
fn fft_rows(data: &[Vec<C64>], n_src: usize, n_out: usize, offset: isize, step: f64) -> Vec<Vec<C64>> {
    let d_min = offset - n_src as isize + 1;
    let d_max = offset + n_out as isize - 1;
    let kernel_len = (d_max - d_min + 1) as usize;
    let size = (n_src + kernel_len - 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);

    let mut kernel = vec![C64::new(0.0, 0.0); size];
    for (t, k) in kernel.iter_mut().take(kernel_len).enumerate() {
        *k = C64::from(kernel_1d((d_min + t as isize) as f64 * step));
    }
    forward.process(&mut kernel);

    data.par_iter()
        .map(|row| {
            let mut buf = vec![C64::new(0.0, 0.0); size];
            buf[..n_src].copy_from_slice(row);
            forward.process(&mut buf);
            for (b, k) in buf.iter_mut().zip(kernel.iter()) {
                *b *= k;
            }
            inverse.process(&mut buf);
            let scale = 1.0 / size as f64;
            (0..n_out).map(|io| buf[(offset + io as isize - d_min) as usize] * scale).collect()
        })
        .collect()
}

fn fft(field: &Grid2D, out: &GridSpec) -> Result<Grid2D> {
    let s = field.spec();
    let ox = lattice_offset(s.x_min, s.dx(), out.x_min, out.dx())?;
    let oy = lattice_offset(s.y_min, s.dy(), out.y_min, out.dy())?;
    let w = weighted_source(field);

    let columns: Vec<Vec<C64>> = (0..s.nx).map(|i| w.row(i).to_vec()).collect();
    let pass_y = fft_rows(&columns, s.ny, out.ny, oy, s.dy());
    // transpose to run along x
    let along_x: Vec<Vec<C64>> = (0..out.ny).map(|jo| (0..s.nx).map(|is| pass_y[is][jo]).collect()).collect();
    let pass_x = fft_rows(&along_x, s.nx, out.nx, ox, s.dx());
    let values = Array2::from_shape_fn((out.nx, out.ny), |(io, jo)| pass_x[jo][io]);
    Grid2D::from_values(*out, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point_mass_like(spec: &GridSpec, center: C64, width: f64) -> Grid2D {
        let norm = 1.0 / (2.0 * PI * width * width);
        Grid2D::sample(spec, |x, y| {
            C64::from(norm * (-((x - center.re).powi(2) + (y - center.im).powi(2)) / (2.0 * width * width)).exp())
        })
    }

    #[test]
    fn narrow_gaussian_smooths_to_kernel() {
        // a narrow normalized Gaussian of variance w² per axis becomes
        // exp(-|α-c|²/(2(1/4 + w²))) / (2π(1/4 + w²))
        let out = GridSpec::square(4.0, 81, AxisSemantics::AlphaPlane).unwrap();
        let src = out.padded(4.0);
        let c = C64::new(0.4, -0.3);
        let w = 0.2;
        let p = point_mass_like(&src, c, w);
        let r = gaussian_smooth(&p, &out, ConvolutionMethod::Direct).unwrap();
        let v = 0.25 + w * w;
        let expect = Grid2D::sample(&out, |x, y| {
            C64::from((-((x - c.re).powi(2) + (y - c.im).powi(2)) / (2.0 * v)).exp() / (2.0 * PI * v))
        });
        assert!(r.max_abs_diff(&expect).unwrap() < 1e-10);
        assert!((r.integral() - p.integral()).norm() < 1e-6);
    }

    #[test]
    fn fft_and_direct_agree() {
        let out = GridSpec::new((-2.0, 2.5), (-1.5, 1.5), 46, 31, AxisSemantics::AlphaPlane).unwrap();
        let src = out.padded(3.0);
        let f = Grid2D::sample(&src, |x, y| {
            C64::new((-(x * x + y * y) / 1.5).exp() * (1.0 + 0.3 * x), 0.2 * (-(x - 1.0).powi(2) - y * y).exp())
        });
        let d = gaussian_smooth(&f, &out, ConvolutionMethod::Direct).unwrap();
        let g = gaussian_smooth(&f, &out, ConvolutionMethod::Fft).unwrap();
        assert!(d.max_abs_diff(&g).unwrap() < 1e-9);
    }

    #[test]
    fn separable_passes_match_naive_double_sum() {
        let out = GridSpec::square(1.0, 7, AxisSemantics::AlphaPlane).unwrap();
        let src = GridSpec::square(2.5, 26, AxisSemantics::AlphaPlane).unwrap();
        let f = Grid2D::sample(&src, |x, y| C64::new(x.cos() * (-y * y).exp(), x * y));
        let d = gaussian_smooth(&f, &out, ConvolutionMethod::Direct).unwrap();
        let naive = Grid2D::sample(&out, |ax, ay| {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..src.nx {
                for j in 0..src.ny {
                    let d2 = (ax - src.x(i)).powi(2) + (ay - src.y(j)).powi(2);
                    acc += f.get(i, j)
                        * (2.0 / PI)
                        * (-2.0 * d2).exp()
                        * src.trapezoid_weight_x(i)
                        * src.trapezoid_weight_y(j);
                }
            }
            acc
        });
        assert!(d.max_abs_diff(&naive).unwrap() < 1e-13);
    }

    #[test]
    fn fft_rejects_misaligned_output() {
        let src = GridSpec::square(3.0, 31, AxisSemantics::AlphaPlane).unwrap();
        let f = Grid2D::sample(&src, |_, _| C64::new(1.0, 0.0));
        let off = GridSpec::new((-1.05, 0.95), (-1.0, 1.0), 11, 11, AxisSemantics::AlphaPlane).unwrap();
        assert!(gaussian_smooth(&f, &off, ConvolutionMethod::Fft).is_err());
        let xp = GridSpec::square(1.0, 11, AxisSemantics::XPQuadratures).unwrap();
        assert!(gaussian_smooth(&f, &xp, ConvolutionMethod::Direct).is_err());
    }
}
