use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flatdist::bound::{main_bound, PipelineOptions};
use crate::flatdist::params::evaluate_gates;
use crate::horizon::Constants;
use crate::manifold::{Hole, HoleSet};

/// A sequence of hole sets with fixed positions and parameters
/// alpha_k = alpha * 10^-k, beta_k = beta * 10^-k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpec {
    pub positions: Vec<[f64; 3]>,
    pub alpha: f64,
    pub beta: f64,
    pub k_min: i32,
    pub k_max: i32,
}

impl SequenceSpec {
    pub fn holes(&self, k: i32) -> Result<HoleSet> {
        let s = 10f64.powi(-k);
        let holes = self.positions.iter().map(|p| Hole::new(*p, self.alpha * s, self.beta * s)).collect();
        Ok(HoleSet::new(holes, true)?)
    }
}

/// Smallest eps in (0, eps0) at which every gate holds, to 40 bisection steps.
/// The feasible set is an interval: the mass gates need eps large, the
/// accumulation gate and eps0 need it small.
pub fn smallest_feasible_eps(holes: &HoleSet, radius: f64, constants: &Constants) -> Option<f64> {
    let passes = |e: f64| evaluate_gates(holes, radius, e, constants).pass();
    let mut hi = constants.eps0 * (1.0 - 1e-12);
    for h in holes.holes() {
        let rho = h.position.norm();
        if rho < radius {
            hi = hi.min((radius - rho) / (32.0 * radius) * (1.0 - 1e-12));
        }
    }
    if !(hi > 0.0) || !passes(hi) {
        return None;
    }
    let mut lo = 0.0;
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if passes(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub k: i32,
    pub m: f64,
    pub sigma: f64,
    pub eps: Option<f64>,
    pub lambda_numeric: Option<f64>,
    pub lambda_analytic: Option<f64>,
    #[serde(rename = "dF_numeric")]
    pub d_f_numeric: Option<f64>,
    #[serde(rename = "dF_envelope")]
    pub d_f_envelope: Option<f64>,
    #[serde(rename = "dDF_numeric")]
    pub d_df_numeric: Option<f64>,
    pub pipeline_pass: Option<bool>,
    /// Reason the row has no estimate.
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    #[serde(rename = "R")]
    pub radius: f64,
    pub rows: Vec<ConvergenceRow>,
    pub strictly_decreasing: bool,
    /// Last dF over the first, among rows with an estimate.
    pub final_ratio: Option<f64>,
    /// Least-squares slope of ln dF against ln eps.
    pub slope: Option<f64>,
}

fn slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// One pipeline run per k with the smallest gate-passing eps. Indices with no
/// feasible eps are reported in the table, not raised.
pub fn convergence_run(spec: &SequenceSpec, radius: f64, options: &PipelineOptions) -> Result<ConvergenceTable> {
    if !(radius > 0.0) {
        return Err(Error::NonPositiveInput { name: "R", value: radius });
    }
    let constants = options.horizon.constants;
    let mut rows = Vec::new();
    for k in spec.k_min..=spec.k_max {
        let holes = spec.holes(k)?;
        let m = holes.adm_mass();
        let sigma = holes.separation()?.sigma;
        let mut row = ConvergenceRow {
            k,
            m,
            sigma,
            eps: None,
            lambda_numeric: None,
            lambda_analytic: None,
            d_f_numeric: None,
            d_f_envelope: None,
            d_df_numeric: None,
            pipeline_pass: None,
            skipped: None,
        };
        match smallest_feasible_eps(&holes, radius, &constants) {
            None => row.skipped = Some(Error::NoFeasibleEpsilon { k }.to_string()),
            Some(eps) => {
                let est = main_bound(&holes, radius, eps, options)?;
                row.eps = Some(eps);
                row.lambda_numeric = Some(est.lambda.lambda_numeric);
                row.lambda_analytic = Some(est.lambda.lambda_analytic);
                row.d_f_numeric = Some(est.numeric.d_f);
                row.d_f_envelope = Some(est.envelope.d_f);
                row.d_df_numeric = Some(est.numeric.d_df);
                row.pipeline_pass = Some(est.pass);
            }
        }
        rows.push(row);
    }
    let done: Vec<(f64, f64)> = rows.iter().filter_map(|r| Some((r.eps?, r.d_f_numeric?))).collect();
    let strictly_decreasing = done.len() >= 2 && done.windows(2).all(|w| w[1].1 < w[0].1);
    let final_ratio = (done.len() >= 2).then(|| done[done.len() - 1].1 / done[0].1);
    let (lx, ly): (Vec<f64>, Vec<f64>) = done.iter().map(|(e, d)| (e.ln(), d.ln())).unzip();
    Ok(ConvergenceTable { radius, rows, strictly_decreasing, final_ratio, slope: slope(&lx, &ly) })
}
