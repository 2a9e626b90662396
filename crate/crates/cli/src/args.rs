use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "geostatic", version, about = "Horizons, mass checks and flat-distance bounds for Brill-Lindquist data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// A curvature input given as a number or estimated from the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstantArg {
    Value(f64),
    Auto,
}

fn parse_constant(s: &str) -> Result<ConstantArg, String> {
    if s == "auto" {
        return Ok(ConstantArg::Auto);
    }
    s.parse::<f64>().map(ConstantArg::Value).map_err(|e| format!("expected a number or `auto`: {e}"))
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Configuration file (JSON). For `converge` this is a sequence file.
    #[arg(value_name = "CONFIG")]
    pub config_pos: Option<PathBuf>,
    #[arg(long = "config", value_name = "PATH", conflicts_with = "config_pos")]
    pub config: Option<PathBuf>,
    /// Directory for summary.json, the CSV table, manifest.json and figures.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Tolerance of the command's main check (see the README for defaults).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Sectional curvature bound, or `auto`.
    #[arg(long, value_parser = parse_constant)]
    pub kappa: Option<ConstantArg>,
    /// Injectivity radius bound, or `auto`.
    #[arg(long, value_parser = parse_constant)]
    pub i0: Option<ConstantArg>,
    /// Also write an SVG figure (horizon, outermost, converge).
    #[arg(long)]
    pub svg: bool,
}

impl Common {
    pub fn config_path(&self) -> Option<&PathBuf> {
        self.config.as_ref().or(self.config_pos.as_ref())
    }
}

#[derive(Debug, Clone, Args)]
pub struct HorizonArgs {
    #[command(flatten)]
    pub common: Common,
    /// Hole index, or a point `x,y,z`.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub center: String,
    /// Radius of the starting sphere.
    #[arg(long)]
    pub init: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args)]
pub struct InvertArgs {
    #[command(flatten)]
    pub common: Common,
    /// Pivot hole; every hole when omitted.
    #[arg(long)]
    pub pivot: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args)]
pub struct AnnulusArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 0)]
    pub hole: usize,
    /// Scale c of the pullback u -> p_i + c u.
    #[arg(long)]
    pub scale: f64,
}

#[derive(Debug, Clone, Args)]
pub struct FlatArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "R")]
    pub radius: f64,
    /// Defaults to the smallest eps at which every gate holds.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub pairs: usize,
    /// Quasi-random points for the volume of W.
    #[arg(long, default_value_t = 1_000_000)]
    pub points: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "R")]
    pub radius: f64,
    #[arg(long, default_value_t = 200)]
    pub pairs: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub points: usize,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Total mass, end masses, charges and separation factors.
    Masses(Common),
    /// One minimal surface from a starting sphere.
    Horizon(HorizonArgs),
    /// Outermost horizons of every hole.
    Outermost(Common),
    /// Location checks and the radii gamma_j.
    Locate(Common),
    /// Penrose inequality on the outermost horizons.
    Penrose(Common),
    /// Sampled constraint residuals R = 2|E|^2 and div E = 0.
    Constraints(SampleArgs),
    /// Inversion about a hole with isometry and mass checks.
    Invert(InvertArgs),
    /// Rescaled pullback of the metric near a hole.
    Annulus(AnnulusArgs),
    /// Sampled distance defect on W'.
    Lambda(FlatArgs),
    /// Volume and area estimates for W and its complements.
    Volumes(FlatArgs),
    /// Full flat-distance bound for one (R, eps).
    FlatDistance(FlatArgs),
    /// Flat-distance bounds along a sequence of hole sets.
    Converge(ConvergeArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Masses(_) => "masses",
            Command::Horizon(_) => "horizon",
            Command::Outermost(_) => "outermost",
            Command::Locate(_) => "locate",
            Command::Penrose(_) => "penrose",
            Command::Constraints(_) => "constraints",
            Command::Invert(_) => "invert",
            Command::Annulus(_) => "annulus",
            Command::Lambda(_) => "lambda",
            Command::Volumes(_) => "volumes",
            Command::FlatDistance(_) => "flat-distance",
            Command::Converge(_) => "converge",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Masses(c) | Command::Outermost(c) | Command::Locate(c) | Command::Penrose(c) => c,
            Command::Horizon(a) => &a.common,
            Command::Constraints(a) => &a.common,
            Command::Invert(a) => &a.common,
            Command::Annulus(a) => &a.common,
            Command::Lambda(a) | Command::Volumes(a) | Command::FlatDistance(a) => &a.common,
            Command::Converge(a) => &a.common,
        }
    }
}
