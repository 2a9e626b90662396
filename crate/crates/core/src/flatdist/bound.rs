use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flatdist::lambda::{lambda_estimate, LambdaEstimate};
use crate::flatdist::params::{evaluate_gates, horizon_gammas, params, PipelineParams};
use crate::flatdist::region::{m1_containment, region_w, ContainmentReport, WRegion};
use crate::flatdist::volumes::{volume_report, VolumeReport};
use crate::geometry::{PathOptions, VolumeBudget};
use crate::horizon::{Constants, HorizonOptions};
use crate::manifold::HoleSet;

/// Explicit values for the existential constants of the distance estimate,
/// evaluated at eps0 from the chains of inequalities that bound each term.
/// They are artifacts of this implementation, not published numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtractedConstants {
    pub eps0: f64,
    pub c1: f64,
    /// Vol_g(W) <= C' R^3 and Vol_g(dW) <= C' R^2.
    pub c_prime: f64,
    /// Both complement volumes <= C'' R^3 eps.
    pub c_double_prime: f64,
    /// The flat-side chain alone, (4 pi / 3)(72 + 24^3 eps0^2 + 768 eps0^5).
    pub c_double_prime_flat: f64,
    /// The g-side chain: outer shell plus the per-hole annuli.
    pub c_double_prime_g: f64,
    /// a <= C_a R sqrt(eps).
    pub c_a: f64,
    /// 2 hbar + a <= C_2 R sqrt(eps), using hbar <= 10 R sqrt(eps).
    pub c_2: f64,
    pub c_f_prime: f64,
    pub c_f_double_prime: f64,
    pub c_df: f64,
    pub status: &'static str,
}

/// sup over 0 < eps <= eps0 of arccos(1/(1+eps)) / sqrt(eps), including the limit sqrt(2) at 0.
fn arccos_ratio_sup(eps0: f64) -> f64 {
    let mut best = 2f64.sqrt();
    for k in 1..=4000 {
        let e = eps0 * k as f64 / 4000.0;
        best = best.max((1.0 / (1.0 + e)).acos() / e.sqrt());
    }
    best
}

pub fn extracted_constants(constants: &Constants) -> ExtractedConstants {
    let e = constants.eps0;
    let c1 = constants.c1;
    let c_prime = (4.0 * PI / 3.0 * (1.0 + e).powi(3)).max(4.0 * PI * (1.0 + e).powi(2) * (1.0 + 96.0 * e.powi(4)));
    let flat = 4.0 * PI / 3.0 * (72.0 + 24f64.powi(3) * e * e + 768.0 * e.powi(5));
    let annuli = e.powi(5)
        * (64.0 / 3.0 * PI * 768.0
            + 48.0 * PI * 96.0 * e
            + 600.0 * PI * e * e
            + 20.0 * PI * (4.0 * e * e + 1.0)
            + e.powi(3) * (60.0 * PI * c1 + 96.0 * PI * c1 * c1 + 64.0 * PI * c1.powi(3)));
    let g_side = 4.0 * PI / 3.0 * (1.0 + e).powi(3) * (72.0 + 24f64.powi(3) * e * e) + annuli;
    let c_double_prime = flat.max(g_side);
    let c_a = 2.0 / PI * arccos_ratio_sup(e) * (1.0 + 1e-12);
    let c_2 = 20.0 + c_a;
    let c_f_prime = 2.0 * c_2 * c_prime;
    let tail = 2.0 * c_double_prime * e.sqrt();
    ExtractedConstants {
        eps0: e,
        c1,
        c_prime,
        c_double_prime,
        c_double_prime_flat: flat,
        c_double_prime_g: g_side,
        c_a,
        c_2,
        c_f_prime,
        c_f_double_prime: 2.0 * c_2 * c_prime + tail,
        c_df: 3.0 * c_2 * c_prime + tail,
        status: "extracted (implementation artifact)",
    }
}

/// Inputs of the subregion estimate for two manifolds sharing W.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LsInputs {
    pub eps: f64,
    pub lambda: f64,
    #[serde(rename = "D")]
    pub diameter: f64,
    pub vol_w_1: f64,
    pub vol_w_2: f64,
    pub area_boundary_1: f64,
    pub area_boundary_2: f64,
    pub excess_1: f64,
    pub excess_2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LsBound {
    pub a: f64,
    pub hbar: f64,
    #[serde(rename = "D")]
    pub diameter: f64,
    #[serde(rename = "dF")]
    pub d_f: f64,
    #[serde(rename = "dDF")]
    pub d_df: f64,
}

/// Flat and D-flat distance bounds from a common subregion W.
pub fn ls_bound(x: &LsInputs) -> Result<LsBound> {
    let named = [
        ("eps", x.eps),
        ("lambda", x.lambda),
        ("D", x.diameter),
        ("vol_w_1", x.vol_w_1),
        ("vol_w_2", x.vol_w_2),
        ("area_boundary_1", x.area_boundary_1),
        ("area_boundary_2", x.area_boundary_2),
        ("excess_1", x.excess_1),
        ("excess_2", x.excess_2),
    ];
    if let Some((name, value)) = named.iter().find(|(_, v)| !(*v >= 0.0 && v.is_finite())) {
        return Err(Error::NegativeInput { name, value: *value });
    }
    if !(x.diameter > 0.0) {
        return Err(Error::NonPositiveInput { name: "D", value: x.diameter });
    }
    if x.lambda > 2.0 * x.diameter {
        return Err(Error::LambdaExceedsDiameter { lambda: x.lambda, two_d: 2.0 * x.diameter });
    }
    let d = x.diameter;
    let a = (1.0 / (1.0 + x.eps)).acos() / PI * d * (1.0 + 1e-12);
    let hbar = (2.0 * x.lambda * d).sqrt().max(d * (x.eps * x.eps + 2.0 * x.eps).sqrt());
    let width = 2.0 * hbar + a;
    let vols = x.vol_w_1 + x.vol_w_2;
    let areas = x.area_boundary_1 + x.area_boundary_2;
    let excess = x.excess_1 + x.excess_2;
    Ok(LsBound {
        a,
        hbar,
        diameter: d,
        d_f: width * (vols + areas) + excess,
        d_df: (width * (vols + d * areas) + d * excess) / d,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PipelineOptions {
    pub horizon: HorizonOptions,
    pub pair_count: usize,
    pub path: PathOptions,
    pub volume: VolumeBudget,
    pub pinch_samples: usize,
    pub seed: u64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            horizon: HorizonOptions::default(),
            pair_count: 200,
            path: PathOptions::default(),
            volume: VolumeBudget::default(),
            pinch_samples: 4000,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Envelope {
    #[serde(rename = "dF")]
    pub d_f: f64,
    #[serde(rename = "dDF")]
    pub d_df: f64,
    /// C_a R sqrt(eps), the bound on a.
    pub a_bound: f64,
    /// C_2 R sqrt(eps), the bound on 2 hbar + a.
    pub width_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatDistanceEstimate {
    pub params: PipelineParams,
    pub lambda: LambdaEstimate,
    pub region: WRegion,
    pub containment: ContainmentReport,
    pub volumes: VolumeReport,
    /// Bound computed from the numeric volumes, with lambda = 24 R eps.
    pub numeric: LsBound,
    /// The same bound with the sampled lambda in place of 24 R eps; diagnostic only.
    pub numeric_sampled_lambda: LsBound,
    pub envelope: Envelope,
    pub constants: ExtractedConstants,
    pub within_envelope: bool,
    pub pass: bool,
}

/// Runs the full pipeline for one (holes, R, eps).
pub fn main_bound(holes: &HoleSet, radius: f64, eps: f64, options: &PipelineOptions) -> Result<FlatDistanceEstimate> {
    let constants = options.horizon.constants;
    evaluate_gates(holes, radius, eps, &constants).require()?;
    let gamma_i = horizon_gammas(holes, &options.horizon)?;
    let p = params(holes, radius, eps, &gamma_i, &constants)?;
    let lambda = lambda_estimate(holes, &p, options.pair_count, options.seed, &options.path)?;
    let region = region_w(holes, &p, p.lambda, options.pinch_samples, options.seed)?;
    let containment = m1_containment(holes, radius, &constants, 16)?;
    let k = extracted_constants(&constants);
    let volumes = volume_report(holes, &p, &region, &k, &options.volume)?;
    let inputs = LsInputs {
        eps,
        lambda: p.lambda,
        diameter: p.diameter(),
        vol_w_1: volumes.vol_g_w.value,
        vol_w_2: volumes.vol_delta_w,
        area_boundary_1: volumes.area_g_boundary.value,
        area_boundary_2: volumes.area_delta_boundary,
        excess_1: volumes.excess_g.value,
        excess_2: volumes.excess_delta.value,
    };
    let numeric = ls_bound(&inputs)?;
    let numeric_sampled_lambda = ls_bound(&LsInputs { lambda: lambda.lambda_numeric, ..inputs })?;
    let rs = radius * eps.sqrt();
    let envelope = Envelope {
        d_f: (k.c_f_prime * radius + k.c_f_double_prime) * radius.powi(2) * rs,
        d_df: k.c_df * radius.powi(2) * rs,
        a_bound: k.c_a * rs,
        width_bound: k.c_2 * rs,
    };
    let within_envelope = numeric.d_f <= envelope.d_f
        && numeric.d_df <= envelope.d_df
        && numeric.a <= envelope.a_bound
        && 2.0 * numeric.hbar + numeric.a <= envelope.width_bound;
    let pass = within_envelope
        && lambda.pass
        && region.pinch.pass
        && region.pieces_disjoint
        && containment.pass
        && volumes.pass
        && p.gamma_bounds.pass;
    Ok(FlatDistanceEstimate {
        params: p,
        lambda,
        region,
        containment,
        volumes,
        numeric,
        numeric_sampled_lambda,
        envelope,
        constants: k,
        within_envelope,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Gate;
    use crate::manifold::presets;

    #[test]
    fn ls_reference_example() {
        let x = LsInputs {
            eps: 0.1,
            lambda: 0.05,
            diameter: 2.0,
            vol_w_1: 4.0,
            vol_w_2: 4.0,
            area_boundary_1: 12.0,
            area_boundary_2: 12.0,
            excess_1: 0.1,
            excess_2: 0.1,
        };
        let b = ls_bound(&x).unwrap();
        // arccos(1/(1+e)) = atan(sqrt(e^2 + 2e)).
        let a_oracle = (0.21f64).sqrt().atan() / PI * 2.0;
        assert!((b.a / a_oracle - 1.0 - 1e-12).abs() < 1e-14);
        assert!((b.a - 0.27356).abs() < 1e-5);
        assert!((b.hbar - 0.91652).abs() < 1e-5);
        assert!((b.d_f - 67.61).abs() < 0.01, "{}", b.d_f);
    }

    #[test]
    fn ls_degenerate_and_errors() {
        let zero = LsInputs {
            eps: 0.0,
            lambda: 0.0,
            diameter: 1.0,
            vol_w_1: 3.0,
            vol_w_2: 3.0,
            area_boundary_1: 1.0,
            area_boundary_2: 1.0,
            excess_1: 0.0,
            excess_2: 0.0,
        };
        let b = ls_bound(&zero).unwrap();
        assert_eq!((b.a, b.hbar, b.d_f), (0.0, 0.0, 0.0));
        assert!(matches!(ls_bound(&LsInputs { lambda: 2.5, ..zero }), Err(Error::LambdaExceedsDiameter { .. })));
        assert!(matches!(ls_bound(&LsInputs { vol_w_1: -1.0, ..zero }), Err(Error::NegativeInput { name: "vol_w_1", .. })));
    }

    #[test]
    fn constants_at_defaults() {
        let k = extracted_constants(&Constants::default());
        let e = k.eps0;
        assert!((k.c_prime - 4.0 * PI * (1.0 + e).powi(2) * (1.0 + 96.0 * e.powi(4))).abs() < 1e-12);
        assert!(k.c_double_prime_g > k.c_double_prime_flat);
        assert!((k.c_a - 2.0 * 2f64.sqrt() / PI).abs() < 1e-9);
        assert!(k.c_f_double_prime > k.c_f_prime && k.c_df > k.c_f_prime);
    }

    #[test]
    fn a_scales_like_sqrt_eps() {
        let k = extracted_constants(&Constants::default());
        for i in 1..50 {
            let eps = k.eps0 * i as f64 / 50.0;
            let x = LsInputs {
                eps,
                lambda: 0.0,
                diameter: 20.0,
                vol_w_1: 0.0,
                vol_w_2: 0.0,
                area_boundary_1: 0.0,
                area_boundary_2: 0.0,
                excess_1: 0.0,
                excess_2: 0.0,
            };
            let b = ls_bound(&x).unwrap();
            assert!(b.a <= k.c_a * 10.0 * eps.sqrt());
            assert!(2.0 * b.hbar + b.a <= k.c_2 * 10.0 * eps.sqrt());
        }
    }

    #[test]
    fn heavy_config_is_gated() {
        let holes = presets::symmetric_pair(4.0, 0.5, 0.5);
        match main_bound(&holes, 10.0, 0.02, &PipelineOptions::default()) {
            Err(Error::HypothesisViolated { gates }) => {
                assert!(gates.contains(&Gate::MassBelowREps3));
                assert!(gates.contains(&Gate::MassBelowEpsSigma));
            }
            other => panic!("{other:?}"),
        }
    }
}
