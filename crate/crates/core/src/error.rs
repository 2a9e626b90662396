use std::fmt;

use serde::Serialize;

use crate::Vec3;

/// A single invariant broken by a raw configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    EmptyHoleSet,
    DuplicatePosition { first: usize, second: usize },
    NonPositiveAlpha { index: usize, alpha: f64 },
    NegativeBeta { index: usize, beta: f64 },
    ZeroBetaWithStrictFlag { index: usize },
    NonFinite { index: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyHoleSet => write!(f, "hole set is empty"),
            Violation::DuplicatePosition { first, second } => {
                write!(f, "holes {first} and {second} share a position")
            }
            Violation::NonPositiveAlpha { index, alpha } => {
                write!(f, "hole {index}: alpha = {alpha} must be > 0")
            }
            Violation::NegativeBeta { index, beta } => {
                write!(f, "hole {index}: beta = {beta} must be >= 0")
            }
            Violation::ZeroBetaWithStrictFlag { index } => {
                write!(f, "hole {index}: beta = 0 requires strict_beta = false")
            }
            Violation::NonFinite { index } => write!(f, "hole {index}: non-finite parameter"),
        }
    }
}

/// Every violation found while validating one configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigError {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "invalid hole set: {}", parts.join("; "))
    }
}

impl std::error::Error for ConfigError {}

/// Named hypothesis gates guarding the bound and location operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Gate {
    /// All beta strictly positive.
    StrictBeta,
    /// 0 < eps < eps0.
    EpsBelowEps0,
    /// m < R eps^3.
    MassBelowREps3,
    /// m < eps sigma / 32.
    MassBelowEpsSigma,
    /// No |p_i| inside (R - 32 R eps, R + 32 R eps).
    AccumulationInterval,
    /// m < sigma / (20 C1).
    MassBelowSigmaC1,
    /// sigma is defined (no hole at the origin).
    SeparationDefined,
    /// R > 0.
    PositiveRadius,
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Gate::StrictBeta => "strict_beta (all beta > 0)",
            Gate::EpsBelowEps0 => "0 < eps < eps0",
            Gate::MassBelowREps3 => "m < R*eps^3",
            Gate::MassBelowEpsSigma => "m < eps*sigma/32",
            Gate::AccumulationInterval => "|p_i| outside (R-32R*eps, R+32R*eps)",
            Gate::MassBelowSigmaC1 => "m < sigma/(20*C1)",
            Gate::SeparationDefined => "sigma defined (no hole at origin)",
            Gate::PositiveRadius => "R > 0",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("configuration parse error: {0}")]
    Parse(String),
    #[error("evaluation point {point:?} coincides with hole {hole}")]
    EvaluationAtHole { point: [f64; 3], hole: usize },
    #[error("hole index {index} out of range for {len} holes")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("hole {index} sits at the origin; separation undefined")]
    HoleAtOrigin { index: usize },
    #[error("surface passes through or encloses hole {hole} on its grid")]
    SurfaceThroughHole { hole: usize },
    #[error("excluded balls cover the outer ball")]
    EmptyRegion,
    #[error("hole {hole} lies inside the integration region without an excluding ball")]
    UnboundedVolume { hole: usize },
    #[error("endpoints are disconnected by the excluded balls")]
    Unreachable,
    #[error(
        "scale c = {c} violates both branches: sigma_i = {sigma_i} <= 5c and sigma_i_out = {sigma_i_out} >= c/5"
    )]
    ScaleViolatesSeparation { c: f64, sigma_i: f64, sigma_i_out: f64 },
    #[error("input `{name}` must be positive, got {value}")]
    NonPositiveInput { name: &'static str, value: f64 },
    #[error("input `{name}` must be nonnegative, got {value}")]
    NegativeInput { name: &'static str, value: f64 },
    #[error("no horizon found around hole {hole}")]
    MissingHorizon { hole: usize },
    #[error("grid does not resolve the surface: {0}")]
    DegenerateGrid(String),
    #[error("no convergence after {iterations} iterations (scaled residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("flow collapsed toward the hole (radius {radius:e} below floor)")]
    CollapseTowardHole { radius: f64 },
    #[error("inversion scale alpha*beta of the pivot is zero")]
    ZeroScale,
    #[error("hypothesis violated: {}", gate_list(.gates))]
    HypothesisViolated { gates: Vec<Gate> },
    #[error("lambda = {lambda} exceeds 2D = {two_d}")]
    LambdaExceedsDiameter { lambda: f64, two_d: f64 },
    #[error("admissible s-interval is empty")]
    RangeEmpty,
    #[error("no feasible eps for sequence index {k}")]
    NoFeasibleEpsilon { k: i32 },
}

fn gate_list(gates: &[Gate]) -> String {
    gates.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(", ")
}

impl Error {
    pub(crate) fn at_hole(x: &Vec3, hole: usize) -> Self {
        Error::EvaluationAtHole { point: [x.x, x.y, x.z], hole }
    }

    /// True for failures of the numerical solvers (as opposed to bad input or unmet hypotheses).
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::CollapseTowardHole { .. }
                | Error::DegenerateGrid(_)
                | Error::SurfaceThroughHole { .. }
                | Error::Unreachable
                | Error::UnboundedVolume { .. }
                | Error::EmptyRegion
                | Error::MissingHorizon { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
