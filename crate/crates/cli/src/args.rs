use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use elastospec::lame::{BoundaryCondition, FlatDomain, LameParameters};

#[derive(Debug, Parser)]
#[command(name = "elastospec", version, about = "Two-term spectral asymptotics of the Lamé operator")]
pub struct Cli {
    /// Worker threads; output does not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print every coefficient family for one dimension and boundary condition.
    Coeffs(CoeffsArgs),
    /// Build and write a certified box or disk spectrum.
    Spectrum(SpectrumArgs),
    /// Fit the second coefficient and compare it with the predicted families.
    Fit(FitArgs),
    /// Tabulate the heat trace with tail bounds.
    Heattrace(HeatArgs),
    /// Completeness audit of a disk spectrum.
    Audit(AuditArgs),
    /// Run the acceptance criteria and print a pass/fail table.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Material {
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(long)]
    pub mu: f64,
    /// Dirichlet, Free, DF, FD, ScalarDirichlet or ScalarNeumann.
    #[arg(long)]
    pub bc: BoundaryCondition,
}

impl Material {
    pub fn params(&self) -> elastospec::Result<LameParameters> {
        LameParameters::new(self.lambda, self.mu)
    }
}

#[derive(Debug, Clone, Args)]
pub struct Geometry {
    /// Box side lengths, e.g. `pi,pi` or `1,2.5,3`.
    #[arg(long = "box", value_name = "L1,L2[,L3]", conflicts_with = "disk")]
    pub lengths: Option<String>,
    /// Per-axis periodicity flags, e.g. `0,1`.
    #[arg(long, requires = "lengths")]
    pub periodic: Option<String>,
    /// The unit disk.
    #[arg(long)]
    pub disk: bool,
}

impl Geometry {
    pub fn domain(&self) -> Result<FlatDomain, String> {
        if self.disk {
            return Ok(FlatDomain::unit_disk());
        }
        let Some(lengths) = &self.lengths else {
            return Err("one of --box or --disk is required".into());
        };
        let lengths = lengths.split(',').map(parse_length).collect::<Result<Vec<_>, _>>()?;
        let periodic = match &self.periodic {
            None => vec![false; lengths.len()],
            Some(flags) => flags
                .split(',')
                .map(|f| match f.trim() {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => Err(format!("periodic flags are 0 or 1, got {other:?}")),
                })
                .collect::<Result<Vec<_>, _>>()?,
        };
        if periodic.len() != lengths.len() {
            return Err(format!(
                "--periodic has {} flags for {} lengths",
                periodic.len(),
                lengths.len()
            ));
        }
        FlatDomain::boxed(lengths, periodic).map_err(|e| e.to_string())
    }
}

/// Parses `2.5`, `pi`, `2pi` or `2*pi`.
pub fn parse_length(text: &str) -> Result<f64, String> {
    let t = text.trim().to_ascii_lowercase();
    let value = if let Some(factor) = t.strip_suffix("pi") {
        let factor = factor.trim_end_matches('*');
        let f = if factor.is_empty() {
            1.0
        } else {
            factor.parse::<f64>().map_err(|e| format!("bad length {text:?}: {e}"))?
        };
        f * std::f64::consts::PI
    } else {
        t.parse::<f64>().map_err(|e| format!("bad length {text:?}: {e}"))?
    };
    Ok(value)
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    #[arg(long)]
    pub d: usize,
    #[command(flatten)]
    pub material: Material,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub geometry: Geometry,
    #[command(flatten)]
    pub material: Material,
    #[arg(long)]
    pub lmax: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub spectrum: SpectrumArgs,
    /// Points in the remainder profile grid.
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    /// Also write the `Lambda,R_raw,R_averaged` plot data here.
    #[arg(long)]
    pub profile: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HeatArgs {
    #[command(flatten)]
    pub spectrum: SpectrumArgs,
    /// Comma-separated times; defaults to a log grid from 20/lmax to 2000/lmax.
    #[arg(long)]
    pub t: Option<String>,
    #[arg(long, default_value_t = 16)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[command(flatten)]
    pub material: Material,
    #[arg(long)]
    pub lmax: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// Criteria to run, e.g. `3,4`; all by default.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u8>,
}

pub fn material_json(m: &Material) -> serde_json::Value {
    json!({ "lambda": m.lambda, "mu": m.mu, "bc": m.bc })
}
