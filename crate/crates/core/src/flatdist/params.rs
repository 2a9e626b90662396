use serde::Serialize;

use crate::error::{Error, Gate, Result};
use crate::horizon::{find_outermost, locate_checks, Constants, HorizonOptions};
use crate::manifold::HoleSet;

/// One hypothesis gate and whether it held.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateStatus {
    pub gate: Gate,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateReport {
    pub mass: f64,
    pub sigma: Option<f64>,
    pub statuses: Vec<GateStatus>,
}

impl GateReport {
    pub fn failing(&self) -> Vec<Gate> {
        self.statuses.iter().filter(|s| !s.pass).map(|s| s.gate).collect()
    }

    pub fn pass(&self) -> bool {
        self.statuses.iter().all(|s| s.pass)
    }

    /// `Ok(())` when every gate holds, otherwise the full list of failures.
    pub fn require(&self) -> Result<()> {
        let gates = self.failing();
        if gates.is_empty() {
            Ok(())
        } else {
            Err(Error::HypothesisViolated { gates })
        }
    }
}

/// Evaluates every hypothesis of the distance pipeline for (holes, R, eps).
pub fn evaluate_gates(holes: &HoleSet, radius: f64, eps: f64, constants: &Constants) -> GateReport {
    let m = holes.adm_mass();
    let sigma = holes.separation().ok().map(|s| s.sigma);
    let accumulation = holes.holes().iter().all(|h| {
        let rho = h.position.norm();
        rho <= radius - 32.0 * radius * eps || rho >= radius + 32.0 * radius * eps
    });
    let statuses = vec![
        GateStatus { gate: Gate::PositiveRadius, pass: radius > 0.0 && radius.is_finite() },
        GateStatus { gate: Gate::StrictBeta, pass: holes.strict_beta() },
        GateStatus { gate: Gate::SeparationDefined, pass: sigma.is_some() },
        GateStatus { gate: Gate::EpsBelowEps0, pass: eps > 0.0 && eps < constants.eps0 },
        GateStatus { gate: Gate::MassBelowREps3, pass: m < radius * eps.powi(3) },
        GateStatus { gate: Gate::MassBelowEpsSigma, pass: sigma.is_some_and(|s| m < eps * s / 32.0) },
        GateStatus { gate: Gate::AccumulationInterval, pass: accumulation },
        GateStatus { gate: Gate::MassBelowSigmaC1, pass: sigma.is_some_and(|s| m < s / (20.0 * constants.c1)) },
    ];
    GateReport { mass: m, sigma, statuses }
}

/// delta_{i,R}: the larger of the neck cut-off and the inner annulus radius.
pub fn delta_ir(holes: &HoleSet, i: usize, radius: f64, constants: &Constants) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(Error::NonPositiveInput { name: "R", value: radius });
    }
    let h = holes.hole(i)?;
    let w = h.weight();
    Ok((w * (-radius / w).exp()).max(h.alpha * h.beta / (4.0 * constants.c1 * w)))
}

/// gamma_{i,eps} = max(8 (alpha_i + beta_i) / eps, gamma_i).
pub fn gamma_i_eps(holes: &HoleSet, i: usize, eps: f64, gamma_i: f64, constants: &Constants) -> Result<f64> {
    if !(eps > 0.0 && eps < constants.eps0) {
        return Err(Error::HypothesisViolated { gates: vec![Gate::EpsBelowEps0] });
    }
    let h = holes.hole(i)?;
    Ok((8.0 * h.weight() / eps).max(gamma_i))
}

/// The three size bounds on the gamma_{i,eps}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaBounds {
    pub max_gamma: f64,
    pub max_bound: f64,
    pub sum_sq: f64,
    pub sum_sq_bound: f64,
    pub sum_cube: f64,
    pub sum_cube_bound: f64,
    pub pass: bool,
}

pub fn gamma_bounds(mass: f64, eps: f64, gammas: &[f64]) -> GammaBounds {
    let max_gamma = gammas.iter().copied().fold(0.0, f64::max);
    let sum_sq: f64 = gammas.iter().map(|g| g * g).sum();
    let sum_cube: f64 = gammas.iter().map(|g| g.powi(3)).sum();
    let r = mass / eps;
    let (max_bound, sum_sq_bound, sum_cube_bound) = (8.0 * r, 96.0 * r * r, 768.0 * r.powi(3));
    GammaBounds {
        max_gamma,
        max_bound,
        sum_sq,
        sum_sq_bound,
        sum_cube,
        sum_cube_bound,
        pass: max_gamma <= max_bound && sum_sq < sum_sq_bound && sum_cube < sum_cube_bound,
    }
}

/// Outer radii gamma_i of the horizon annuli, one per hole.
pub fn horizon_gammas(holes: &HoleSet, options: &HorizonOptions) -> Result<Vec<f64>> {
    let out = find_outermost(holes, options)?;
    let loc = locate_checks(holes, &out.horizons, &options.constants)?;
    loc.gammas.iter().map(|g| g.gamma.ok_or(Error::MissingHorizon { hole: g.hole })).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineParams {
    #[serde(rename = "R")]
    pub radius: f64,
    pub eps: f64,
    pub constants: Constants,
    pub gates: GateReport,
    /// 24 R eps.
    pub lambda: f64,
    pub delta_ir: Vec<f64>,
    pub gamma_i: Vec<f64>,
    pub gamma_i_eps: Vec<f64>,
    pub gamma_bounds: GammaBounds,
}

impl PipelineParams {
    pub fn mass(&self) -> f64 {
        self.gates.mass
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }
}

/// Radii for one (R, eps), given the horizon radii gamma_i. Fails with every
/// violated gate named.
pub fn params(holes: &HoleSet, radius: f64, eps: f64, gamma_i: &[f64], constants: &Constants) -> Result<PipelineParams> {
    let gates = evaluate_gates(holes, radius, eps, constants);
    gates.require()?;
    if gamma_i.len() != holes.len() {
        return Err(Error::IndexOutOfRange { index: gamma_i.len(), len: holes.len() });
    }
    let n = holes.len();
    let delta = (0..n).map(|i| delta_ir(holes, i, radius, constants)).collect::<Result<Vec<_>>>()?;
    let gamma_eps = (0..n).map(|i| gamma_i_eps(holes, i, eps, gamma_i[i], constants)).collect::<Result<Vec<_>>>()?;
    let gamma_bounds = gamma_bounds(gates.mass, eps, &gamma_eps);
    Ok(PipelineParams {
        radius,
        eps,
        constants: *constants,
        gates,
        lambda: 24.0 * radius * eps,
        delta_ir: delta,
        gamma_i: gamma_i.to_vec(),
        gamma_i_eps: gamma_eps,
        gamma_bounds,
    })
}
