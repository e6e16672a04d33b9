use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{pair, pairs, FaultArg, Field, Format, JobConfig, Method};
use crate::error::CliResult;

/// Phase-space distributions of cat states, generalized delta functions and
/// the linear amplifier.
#[derive(Debug, Parser)]
#[command(name = "phasedelta", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample Q, Wigner, regularized P or amplified P on a grid.
    Grid(JobArgs),
    /// Sample the amplified Q (`--field q`) or P (`--field p`) on a grid.
    Amplify(JobArgs),
    /// Rebuild the Fock density matrix from the P terms and compare.
    Roundtrip(JobArgs),
    /// Sift a Gaussian-envelope test function through a complex-center delta.
    Sift(JobArgs),
    /// Run the acceptance criteria.
    Verify(JobArgs),
}

#[derive(Debug, Args)]
pub struct JobArgs {
    /// TOML or JSON job file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// First coherent amplitude.
    #[arg(long, num_args = 2, value_names = ["RE", "IM"], allow_negative_numbers = true)]
    pub alpha1: Option<Vec<f64>>,
    /// Second coherent amplitude.
    #[arg(long, num_args = 2, value_names = ["RE", "IM"], allow_negative_numbers = true)]
    pub alpha2: Option<Vec<f64>>,
    /// Relative amplitude of the second component.
    #[arg(long, num_args = 2, value_names = ["RE", "IM"], allow_negative_numbers = true)]
    pub zeta: Option<Vec<f64>>,

    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], allow_negative_numbers = true)]
    pub x_range: Option<Vec<f64>>,
    #[arg(long, num_args = 2, value_names = ["MIN", "MAX"], allow_negative_numbers = true)]
    pub y_range: Option<Vec<f64>>,
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long)]
    pub ny: Option<usize>,

    #[arg(long, value_enum)]
    pub field: Option<Field>,
    /// Amplitude gain g >= 1.
    #[arg(long)]
    pub gain: Option<f64>,
    /// Regularization width.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Number state whose Wigner function to sample instead of the cat.
    #[arg(long)]
    pub fock: Option<usize>,
    /// Fock truncation.
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,

    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Timestamp recorded in metadata.
    #[arg(long)]
    pub timestamp: Option<String>,

    /// Envelope scale s of the sifted test function p(x) exp(-x²/2s²).
    #[arg(long)]
    pub scale: Option<f64>,
    /// Polynomial coefficients of the test function, lowest order first.
    #[arg(long, num_args = 2.., value_names = ["RE", "IM"], allow_negative_numbers = true)]
    pub coeffs: Option<Vec<f64>>,
    /// Sifting center.
    #[arg(long, num_args = 2, value_names = ["RE", "IM"], allow_negative_numbers = true)]
    pub z0: Option<Vec<f64>>,
    /// Levels of the σ-halving schedule.
    #[arg(long)]
    pub levels: Option<usize>,

    /// Criterion to run (repeatable); all when absent.
    #[arg(long = "criterion")]
    pub criteria: Option<Vec<u8>>,
    /// Inject a deliberate defect.
    #[arg(long, value_enum)]
    pub fault: Option<FaultArg>,
}

impl JobArgs {
    /// File values overlaid by the flags given on the command line.
    pub fn resolve(self) -> CliResult<JobConfig> {
        let file = match &self.config {
            Some(p) => JobConfig::from_file(p)?,
            None => JobConfig::default(),
        };
        let flags = JobConfig {
            alpha1: pair(self.alpha1),
            alpha2: pair(self.alpha2),
            zeta: pair(self.zeta),
            x_range: pair(self.x_range),
            y_range: pair(self.y_range),
            nx: self.nx,
            ny: self.ny,
            field: self.field,
            gain: self.gain,
            sigma: self.sigma,
            fock: self.fock,
            n_max: self.n_max,
            method: self.method,
            format: self.format,
            output: self.output,
            timestamp: self.timestamp,
            scale: self.scale,
            coeffs: pairs("coeffs", self.coeffs)?,
            z0: pair(self.z0),
            levels: self.levels,
            criteria: self.criteria,
            fault: self.fault,
        };
        Ok(file.overlay(flags))
    }
}
