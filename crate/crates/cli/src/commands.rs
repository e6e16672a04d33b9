//! Subcommand implementations. Every command resolves its settings from
//! flags over file over defaults, and writes deterministic output.

use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde_json::{json, Value};

use phasedelta::amplifier::{amplified_density_matrix, amplified_p, amplify_q, AmplifierGain};
use phasedelta::convolve::ConvolutionMethod;
use phasedelta::gendelta::{
    cancellation_factor, classify_point, sift, sift_limit, sift_window,
    AnalyticTestFunction,
};
use phasedelta::grid::{AxisSemantics, Grid2D, GridSpec, Metadata};
use phasedelta::quasiprob::{
    p_cat_terms, p_regularized_eval, wigner_fock, wigner_from_density, wigner_from_p, KERNEL_MARGIN,
};
use phasedelta::reconstruct::{reconstruct_rho, reconstruct_rho_limit, reconstruct_rho_numeric, roundtrip_report};
use phasedelta::states::{recommended_n_max, CatStateSpec};
use phasedelta::verify::{run_criterion, Fault, VerifyOptions, VerifyReport, CRITERIA};

use crate::config::{FaultArg, Field, Format, JobConfig, Method};
use crate::error::{CliError, CliResult};

// Demonstration defaults: an even cat of amplitude 2 on a ±8 window.
const DEFAULT_ALPHA1: [f64; 2] = [2.0, 0.0];
const DEFAULT_ALPHA2: [f64; 2] = [-2.0, 0.0];
const DEFAULT_ZETA: [f64; 2] = [1.0, 0.0];
const DEFAULT_RANGE: [f64; 2] = [-8.0, 8.0];
const DEFAULT_POINTS: usize = 201;
const DEFAULT_ROUNDTRIP_N_MAX: usize = 30;
/// Round trip passes when every entry matches to this absolute tolerance.
pub const ROUNDTRIP_TOL: f64 = 1e-8;
// Default sifting job: f(x) = (1 + x) exp(-x²/4) at z₀ = 1 + 0.4i.
const DEFAULT_SIFT_SCALE: f64 = std::f64::consts::SQRT_2;
const DEFAULT_SIFT_Z0: [f64; 2] = [1.0, 0.4];
const DEFAULT_SIFT_SIGMA: f64 = 0.05;
const DEFAULT_SIFT_LEVELS: usize = 4;
/// Direct real-axis sifting is reported only below this amplification.
const DIRECT_SIFT_FACTOR_LIMIT: f64 = 1e6;

fn c(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

fn cat_spec(cfg: &JobConfig) -> CliResult<CatStateSpec> {
    Ok(CatStateSpec::new(
        c(cfg.alpha1.unwrap_or(DEFAULT_ALPHA1)),
        c(cfg.alpha2.unwrap_or(DEFAULT_ALPHA2)),
        c(cfg.zeta.unwrap_or(DEFAULT_ZETA)),
    )?)
}

fn grid_spec(cfg: &JobConfig, semantics: AxisSemantics) -> CliResult<GridSpec> {
    let [x0, x1] = cfg.x_range.unwrap_or(DEFAULT_RANGE);
    let [y0, y1] = cfg.y_range.unwrap_or(DEFAULT_RANGE);
    Ok(GridSpec::new(
        (x0, x1),
        (y0, y1),
        cfg.nx.unwrap_or(DEFAULT_POINTS),
        cfg.ny.unwrap_or(DEFAULT_POINTS),
        semantics,
    )?)
}

fn gain(cfg: &JobConfig) -> CliResult<AmplifierGain> {
    Ok(AmplifierGain::new(cfg.gain.unwrap_or(1.0))?)
}

/// Flag or file value, then `SOURCE_DATE_EPOCH`, then `"unspecified"`.
fn timestamp(cfg: &JobConfig) -> String {
    cfg.timestamp
        .clone()
        .or_else(|| std::env::var("SOURCE_DATE_EPOCH").ok())
        .unwrap_or_else(|| "unspecified".into())
}

fn base_meta(cfg: &JobConfig, command: &str) -> Metadata {
    let mut m = Metadata::new();
    m.insert("tool".into(), json!(concat!("phasedelta ", env!("CARGO_PKG_VERSION"))));
    m.insert("command".into(), json!(command));
    m.insert("timestamp".into(), json!(timestamp(cfg)));
    m
}

fn state_meta(m: &mut Metadata, spec: &CatStateSpec) {
    let p = |z: C64| json!([z.re, z.im]);
    m.insert("alpha1".into(), p(spec.alpha1()));
    m.insert("alpha2".into(), p(spec.alpha2()));
    m.insert("zeta".into(), p(spec.zeta()));
    m.insert("normalization".into(), json!(spec.norm()));
}

fn write_output(text: &str, output: Option<&Path>) -> CliResult<()> {
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|source| CliError::Io { path: path.display().to_string(), source }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

fn emit_json(value: &Value, cfg: &JobConfig) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write_output(&text, cfg.output.as_deref())
}

fn emit_grid(grid: &Grid2D, meta: &Metadata, cfg: &JobConfig) -> CliResult<()> {
    let text = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => grid.to_csv(meta),
        Format::Json => {
            let mut t = serde_json::to_string_pretty(&grid.to_json(meta)).expect("serializable");
            t.push('\n');
            t
        }
    };
    write_output(&text, cfg.output.as_deref())
}

fn convolution(method: Method) -> ConvolutionMethod {
    match method {
        Method::Direct => ConvolutionMethod::Direct,
        Method::Fft => ConvolutionMethod::Fft,
    }
}

/// Samples the requested field. `command` is `"grid"` or `"amplify"`.
pub fn grid(cfg: &JobConfig, command: &str) -> CliResult<()> {
    let field = cfg.field.unwrap_or(Field::Q);
    if command == "amplify" {
        if cfg.gain.is_none() {
            return Err(CliError::usage("amplify needs --gain"));
        }
        if !matches!(field, Field::Q | Field::PAmplified) {
            return Err(CliError::usage("amplify samples --field q or --field p"));
        }
    }
    let spec = cat_spec(cfg)?;
    let g = gain(cfg)?;
    let mut meta = base_meta(cfg, command);
    meta.insert("gain".into(), json!(g.g()));
    meta.insert("field".into(), serde_json::to_value(field).expect("enum"));

    let grid = match field {
        Field::Q => {
            let out = grid_spec(cfg, AxisSemantics::AlphaPlane)?;
            state_meta(&mut meta, &spec);
            meta.insert(
                "formula".into(),
                json!("Q(alpha) = <alpha|rho_g|alpha>/pi, rho_g the state after amplitude gain g"),
            );
            Grid2D::sample(&out, |x, y| C64::from(amplify_q(&spec, g, C64::new(x, y))))
        }
        Field::Wigner => wigner_grid(cfg, &spec, g, &mut meta)?,
        Field::PRegularized => {
            let sigma = cfg.sigma.ok_or_else(|| CliError::usage("--field p_regularized needs --sigma"))?;
            if g.g() != 1.0 {
                return Err(CliError::usage("--field p_regularized takes no --gain; use --field p_amplified"));
            }
            let out = grid_spec(cfg, AxisSemantics::AlphaPlane)?;
            state_meta(&mut meta, &spec);
            meta.insert("sigma".into(), json!(sigma));
            meta.insert(
                "formula".into(),
                json!("P_sigma(alpha) = sum_k w_k phi_sigma(alpha_r - c_r,k) phi_sigma(alpha_i - c_i,k)"),
            );
            let rep = p_cat_terms(&spec);
            Grid2D::try_sample(&out, |x, y| p_regularized_eval(&rep, sigma, C64::new(x, y)))?
        }
        Field::PAmplified => {
            if g.g() == 1.0 {
                return Err(CliError::Numeric(
                    "sigma_of_gain(1) = 0: at unit gain the P function is a sum of generalized delta \
                     functions and cannot be plotted; use --gain > 1 or --field p_regularized --sigma S"
                        .into(),
                ));
            }
            let out = grid_spec(cfg, AxisSemantics::AlphaPlane)?;
            state_meta(&mut meta, &spec);
            meta.insert("sigma".into(), json!(g.sigma()));
            meta.insert(
                "formula".into(),
                json!("P_g(alpha) = sum_k w_k phi_s(alpha_r - g c_r,k) phi_s(alpha_i - g c_i,k), s = sqrt((g^2-1)/2)"),
            );
            Grid2D::try_sample(&out, |x, y| amplified_p(&spec, g, C64::new(x, y)).map(C64::from))?
        }
    };
    if grid.values().iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(CliError::Numeric("sampled field contains non-finite values".into()));
    }
    emit_grid(&grid, &meta, cfg)
}

/// Wigner function: a number state, the amplified cat through its density
/// matrix, or (with `--method` at gain > 1) the smoothed amplified P.
fn wigner_grid(cfg: &JobConfig, spec: &CatStateSpec, g: AmplifierGain, meta: &mut Metadata) -> CliResult<Grid2D> {
    if let Some(n) = cfg.fock {
        let out = grid_spec(cfg, AxisSemantics::XPQuadratures)?;
        meta.insert("fock".into(), json!(n));
        meta.insert("formula".into(), json!("W(x,p) = (1/pi) int psi_n(x+q) psi_n(x-q) exp(-2ipq) dq"));
        return Ok(wigner_fock(n, &out)?);
    }
    state_meta(meta, spec);
    if let (Some(method), true) = (cfg.method, g.g() > 1.0) {
        let out = grid_spec(cfg, AxisSemantics::AlphaPlane)?;
        meta.insert("method".into(), serde_json::to_value(method).expect("enum"));
        meta.insert("formula".into(), json!("W(alpha) = (2/pi) int P_g(beta) exp(-2|alpha-beta|^2) d^2beta"));
        let reach = g.g() * spec.max_amplitude();
        let excess = [-out.x_min, out.x_max, -out.y_min, out.y_max]
            .iter()
            .map(|edge| reach - edge)
            .fold(0.0, f64::max);
        let src = out.padded(KERNEL_MARGIN + 10.0 * g.sigma() + excess);
        let p = Grid2D::try_sample(&src, |x, y| amplified_p(spec, g, C64::new(x, y)).map(C64::from))?;
        return Ok(wigner_from_p(&p, &out, convolution(method))?);
    }
    let out = grid_spec(cfg, AxisSemantics::XPQuadratures)?;
    let n_max = cfg.n_max.unwrap_or_else(|| {
        let g2 = g.g() * g.g();
        recommended_n_max(g.g() * spec.max_amplitude()) + (40.0 * (g2 - 1.0)).ceil() as usize
    });
    meta.insert("n_max".into(), json!(n_max));
    meta.insert("formula".into(), json!("W(x,p) = (1/pi) int <x+q|rho_g|x-q> exp(-2ipq) dq"));
    let rho = amplified_density_matrix(spec, g, n_max);
    Ok(wigner_from_density(&rho, &out)?)
}

pub fn roundtrip(cfg: &JobConfig) -> CliResult<()> {
    let spec = cat_spec(cfg)?;
    let n_max = cfg.n_max.unwrap_or(DEFAULT_ROUNDTRIP_N_MAX);
    let report = roundtrip_report(&spec, n_max);
    let passed = report.passed(ROUNDTRIP_TOL);
    let mut meta = base_meta(cfg, "roundtrip");
    state_meta(&mut meta, &spec);
    let mut out = json!({
        "meta": meta,
        "tolerance": ROUNDTRIP_TOL,
        "passed": passed,
        "report": report,
    });
    if let Some(sigma) = cfg.sigma {
        let rep = p_cat_terms(&spec);
        let exact = reconstruct_rho(&rep, n_max);
        let num = reconstruct_rho_numeric(&rep, sigma, n_max, None)?;
        let dim = num.max_order.min(n_max) + 1;
        let block_dev = |rho: &phasedelta::states::FockDensityMatrix| {
            let mut d: f64 = 0.0;
            for j in 0..dim {
                for k in 0..dim {
                    if j + k <= num.max_order {
                        d = d.max((rho.get(j, k) - exact.get(j, k)).norm());
                    }
                }
            }
            d
        };
        let mut numeric = json!({
            "sigma": sigma,
            "max_order": num.max_order,
            "cancellation_factor": num.cancellation_factor,
            "ordering_residual": num.ordering_residual,
            "max_abs_deviation": block_dev(&num.rho),
        });
        if let Some(levels) = cfg.levels {
            let lim = reconstruct_rho_limit(&rep, sigma, levels, n_max)?;
            numeric["limit_levels"] = json!(levels);
            numeric["limit_max_abs_deviation"] = json!(block_dev(&lim.limit));
        }
        out["numeric"] = numeric;
    }
    emit_json(&out, cfg)?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "round trip deviation {:.3e} exceeds {ROUNDTRIP_TOL:e} or a term check failed",
            report.max_abs_deviation
        )))
    }
}

pub fn sift_cmd(cfg: &JobConfig) -> CliResult<()> {
    let scale = cfg.scale.unwrap_or(DEFAULT_SIFT_SCALE);
    let coeffs: Vec<C64> =
        cfg.coeffs.clone().unwrap_or_else(|| vec![[1.0, 0.0], [1.0, 0.0]]).into_iter().map(c).collect();
    let f = AnalyticTestFunction::envelope(scale, coeffs.clone())?;
    let z0 = c(cfg.z0.unwrap_or(DEFAULT_SIFT_Z0));
    let sigma0 = cfg.sigma.unwrap_or(DEFAULT_SIFT_SIGMA);
    let levels = cfg.levels.unwrap_or(DEFAULT_SIFT_LEVELS);
    let p = |z: C64| json!([z.re, z.im]);

    // per-level values; the shifted line is the trusted path
    let limit = sift_limit(&f, z0, sigma0, levels)?;
    let mut direct = Vec::with_capacity(levels);
    let mut exact = Vec::with_capacity(levels);
    let mut factors = Vec::with_capacity(levels);
    let mut worst_shifted: f64 = 0.0;
    for (&sigma, &shifted) in limit.sigmas.iter().zip(&limit.values) {
        let e = f.smoothed(z0, sigma)?;
        worst_shifted = worst_shifted.max((shifted - e).norm());
        let factor = cancellation_factor(z0.im, sigma);
        direct.push(if factor < DIRECT_SIFT_FACTOR_LIMIT {
            p(sift(&f, z0, sigma, &sift_window(&f, z0, sigma))?)
        } else {
            Value::Null
        });
        exact.push(p(e));
        factors.push(factor);
    }
    let continuation = f.eval(z0);
    let rel = (limit.limit - continuation).norm() / continuation.norm().max(f64::MIN_POSITIVE);

    let mut meta = base_meta(cfg, "sift");
    meta.insert("test_function".into(), json!("f(z) = sum_n c_n z^n exp(-z^2/(2 s^2))"));
    meta.insert("scale".into(), json!(scale));
    meta.insert("coeffs".into(), Value::Array(coeffs.iter().map(|z| p(*z)).collect()));
    meta.insert(
        "direct_note".into(),
        json!(format!("direct is null where the cancellation factor is >= {DIRECT_SIFT_FACTOR_LIMIT:e}")),
    );
    let out = json!({
        "meta": meta,
        "z0": p(z0),
        "sigma_schedule": limit.sigmas,
        "shifted": limit.values.iter().map(|z| p(*z)).collect::<Vec<_>>(),
        "direct": direct,
        "exact_finite_sigma": exact,
        "shifted_max_abs_error": worst_shifted,
        "cancellation_factor": factors,
        "delta_region_at_z0": classify_point(z0),
        "continuation": p(continuation),
        "limit": p(limit.limit),
        "limit_relative_error": rel,
    });
    emit_json(&out, cfg)
}

pub fn verify(cfg: &JobConfig) -> CliResult<()> {
    let opts = VerifyOptions {
        fault: cfg.fault.map(|f| match f {
            FaultArg::FlipCenterSign => Fault::FlipCenterSign,
        }),
    };
    let ids: Vec<u8> = match &cfg.criteria {
        Some(ids) => ids.clone(),
        None => CRITERIA.iter().map(|(id, _, _)| *id).collect(),
    };
    let mut criteria = Vec::with_capacity(ids.len());
    for id in ids {
        let r = run_criterion(id, &opts).map_err(|_| CliError::usage(format!("unknown criterion {id}; expected 1..=10")))?;
        eprintln!("{}", r.line());
        criteria.push(r);
    }
    let all_passed = criteria.iter().all(|r| r.passed);
    let report = VerifyReport { options: opts, criteria, all_passed };
    let out = json!({ "meta": base_meta(cfg, "verify"), "report": report });
    emit_json(&out, cfg)?;
    if all_passed {
        Ok(())
    } else {
        let failed: Vec<String> = report.criteria.iter().filter(|r| !r.passed).map(|r| r.id.to_string()).collect();
        Err(CliError::Verification(format!("criteria {} failed", failed.join(", "))))
    }
}
