//! Job configuration: an optional TOML or JSON file overlaid by flags.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Field {
    Q,
    Wigner,
    #[value(alias = "p-regularized")]
    PRegularized,
    #[value(alias = "p", alias = "p-amplified")]
    #[serde(alias = "p")]
    PAmplified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Method {
    Direct,
    Fft,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum FaultArg {
    #[value(alias = "flip-center-sign")]
    FlipCenterSign,
}

/// Every setting a job can carry. Absent fields fall back to flags, then
/// to built-in defaults. Complex values are `[re, im]`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub alpha1: Option<[f64; 2]>,
    pub alpha2: Option<[f64; 2]>,
    pub zeta: Option<[f64; 2]>,
    pub x_range: Option<[f64; 2]>,
    pub y_range: Option<[f64; 2]>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub field: Option<Field>,
    pub gain: Option<f64>,
    pub sigma: Option<f64>,
    pub fock: Option<usize>,
    pub n_max: Option<usize>,
    pub method: Option<Method>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub timestamp: Option<String>,
    pub scale: Option<f64>,
    pub coeffs: Option<Vec<[f64; 2]>>,
    pub z0: Option<[f64; 2]>,
    pub levels: Option<usize>,
    pub criteria: Option<Vec<u8>>,
    pub fault: Option<FaultArg>,
}

macro_rules! overlay_fields {
    ($base:ident, $top:ident; $($f:ident),*) => {
        JobConfig { $($f: $top.$f.or($base.$f)),* }
    };
}

impl JobConfig {
    /// Fields set in `top` replace those in `self`.
    pub fn overlay(self, top: JobConfig) -> JobConfig {
        let base = self;
        overlay_fields!(base, top;
            alpha1, alpha2, zeta, x_range, y_range, nx, ny, field, gain, sigma, fock, n_max,
            method, format, output, timestamp, scale, coeffs, z0, levels, criteria, fault)
    }

    /// Reads a config file; `.json` is parsed as JSON, anything else as TOML.
    pub fn from_file(path: &Path) -> CliResult<JobConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let parsed = if is_json {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|e| CliError::usage(format!("config file {}: {e}", path.display())))
    }
}

/// `[re, im]` from a two-element flag value.
pub fn pair(values: Option<Vec<f64>>) -> Option<[f64; 2]> {
    values.map(|v| [v[0], v[1]])
}

/// `[[re, im], ...]` from an even-length flag value.
pub fn pairs(name: &str, values: Option<Vec<f64>>) -> CliResult<Option<Vec<[f64; 2]>>> {
    match values {
        None => Ok(None),
        Some(v) if v.len() % 2 == 0 && !v.is_empty() => Ok(Some(v.chunks(2).map(|c| [c[0], c[1]]).collect())),
        Some(_) => Err(CliError::usage(format!("--{name} takes (re, im) pairs"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_on_conflict() {
        let file = JobConfig { nx: Some(21), ny: Some(31), gain: Some(2.0), ..Default::default() };
        let flags = JobConfig { nx: Some(11), field: Some(Field::Q), ..Default::default() };
        let merged = file.overlay(flags);
        assert_eq!(merged.nx, Some(11));
        assert_eq!(merged.ny, Some(31));
        assert_eq!(merged.gain, Some(2.0));
        assert_eq!(merged.field, Some(Field::Q));
    }

    #[test]
    fn toml_and_json_files() {
        let dir = std::env::temp_dir().join(format!("phasedelta-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let t = dir.join("job.toml");
        std::fs::write(&t, "alpha1 = [1.5, 0.0]\nfield = \"p\"\ngain = 2.0\nx_range = [-3.0, 3.0]\n").unwrap();
        let c = JobConfig::from_file(&t).unwrap();
        assert_eq!(c.alpha1, Some([1.5, 0.0]));
        assert_eq!(c.field, Some(Field::PAmplified));
        let j = dir.join("job.json");
        std::fs::write(&j, r#"{"nx": 5, "format": "json", "coeffs": [[1, 0], [0, 1]]}"#).unwrap();
        let c = JobConfig::from_file(&j).unwrap();
        assert_eq!(c.nx, Some(5));
        assert_eq!(c.coeffs, Some(vec![[1.0, 0.0], [0.0, 1.0]]));
        let bad = dir.join("bad.toml");
        std::fs::write(&bad, "nxx = 3\n").unwrap();
        assert!(matches!(JobConfig::from_file(&bad), Err(CliError::Usage(_))));
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn pair_parsing() {
        assert_eq!(pair(Some(vec![1.0, -2.0])), Some([1.0, -2.0]));
        assert_eq!(pairs("coeffs", Some(vec![1.0, 0.0, 0.5, 0.5])).unwrap().unwrap().len(), 2);
        assert!(pairs("coeffs", Some(vec![1.0])).is_err());
    }
}
