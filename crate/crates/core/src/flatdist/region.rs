use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Gate, Result};
use crate::flatdist::params::{delta_ir, PipelineParams};
use crate::geometry::curvature::random_unit;
use crate::geometry::{Ball, Region};
use crate::horizon::Constants;
use crate::manifold::HoleSet;
use crate::Vec3;

/// Sampled range of the conformal factor squared over W.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PinchCheck {
    pub samples: usize,
    pub min_factor_sq: f64,
    pub max_factor_sq: f64,
    /// (1 + eps)^2.
    pub upper: f64,
    pub pass: bool,
}

/// Whether the excluded ball of one hole stays clear of the shell R - lambda < |x| < R.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShellClearance {
    pub hole: usize,
    pub rho: f64,
    pub gamma_eps: f64,
    pub in_accumulation_interval: bool,
    pub clear_of_shell: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WRegion {
    pub region: Region,
    /// Radius of the outer ball, R - lambda.
    pub inner_radius: f64,
    pub pinch: PinchCheck,
    pub clearance: Vec<ShellClearance>,
    pub pieces_disjoint: bool,
}

/// W = B(0, R - lambda) minus the balls B(p_i, gamma_{i,eps}), with the
/// metric pinch on W checked by sampling the interior and the boundary spheres.
pub fn region_w(holes: &HoleSet, params: &PipelineParams, lambda: f64, samples: usize, seed: u64) -> Result<WRegion> {
    params.gates.require()?;
    let (radius, eps) = (params.radius, params.eps);
    if !(lambda >= 0.0 && lambda < radius) {
        return Err(Error::NonPositiveInput { name: "R - lambda", value: radius - lambda });
    }
    let inner = radius - lambda;
    let excluded: Vec<Ball> =
        holes.holes().iter().zip(&params.gamma_i_eps).map(|(h, g)| Ball::new(h.position, *g)).collect();
    let region = Region { outer: Ball::new(Vec3::zeros(), inner), excluded };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(samples * 2);
    while points.len() < samples {
        let x = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * inner;
        if region.contains(&x) {
            points.push(x);
        }
    }
    let per_sphere = (samples / 8).max(16);
    for _ in 0..per_sphere {
        let x = random_unit(&mut rng) * inner;
        if !region.excluded.iter().any(|b| b.contains(&x)) {
            points.push(x);
        }
        for b in &region.excluded {
            let y = b.c() + random_unit(&mut rng) * b.radius;
            if region.outer.contains(&y) || (y.norm() - inner).abs() < 1e-12 * inner {
                points.push(y);
            }
        }
    }
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for x in &points {
        let f = holes.factor(x).powi(2);
        lo = lo.min(f);
        hi = hi.max(f);
    }
    let upper = (1.0 + eps).powi(2);
    let pinch = PinchCheck { samples: points.len(), min_factor_sq: lo, max_factor_sq: hi, upper, pass: lo >= 1.0 && hi <= upper };

    let clearance: Vec<ShellClearance> = holes
        .holes()
        .iter()
        .zip(&params.gamma_i_eps)
        .enumerate()
        .map(|(i, (h, g))| {
            let rho = h.position.norm();
            ShellClearance {
                hole: i,
                rho,
                gamma_eps: *g,
                in_accumulation_interval: rho > radius - 32.0 * radius * eps && rho < radius + 32.0 * radius * eps,
                clear_of_shell: rho + g <= inner || rho - g >= radius,
            }
        })
        .collect();
    let pieces_disjoint = clearance.iter().all(|c| c.clear_of_shell && !c.in_accumulation_interval);
    if clearance.iter().any(|c| c.in_accumulation_interval) {
        return Err(Error::HypothesisViolated { gates: vec![Gate::AccumulationInterval] });
    }
    Ok(WRegion { region, inner_radius: inner, pinch, clearance, pieces_disjoint })
}

/// Radial lower bound on the distance from the origin to the sphere
/// |x - p_i| = delta_{i,R} for one hole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContainmentRow {
    pub hole: usize,
    pub delta_ir: f64,
    /// True when delta_{i,R} is the neck cut-off (alpha+beta) exp(-R/(alpha+beta)).
    pub neck_branch: bool,
    /// Integral of (1 + alpha/r)(1 + beta/r) from delta_{i,R} to alpha_i + beta_i.
    pub integral_to_weight: f64,
    /// The same integral taken out to |p_i|; a certified lower bound on the distance.
    pub integral_to_origin: f64,
    /// Sampled minimum of Psi / ((1 + alpha/r)(1 + beta/r)) along rays from p_i; must be >= 1 up to rounding.
    pub comparison_min: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContainmentReport {
    #[serde(rename = "R")]
    pub radius: f64,
    pub rows: Vec<ContainmentRow>,
    pub pass: bool,
}

fn radial_integral(alpha: f64, beta: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    (b - a) + (alpha + beta) * (b / a).ln() + alpha * beta * (1.0 / a - 1.0 / b)
}

/// Certifies that B_g(0, R) stays out of every ball B(p_i, delta_{i,R}).
///
/// On the neck branch the radial integral out to |p_i| must exceed R. On the
/// other branch the ball lies inside the horizon annulus and containment
/// follows from the location of the outermost region; the integral is still
/// reported.
pub fn m1_containment(holes: &HoleSet, radius: f64, constants: &Constants, sample_count: usize) -> Result<ContainmentReport> {
    let m = holes.adm_mass();
    let sigma = holes.separation()?.sigma;
    if !(m < sigma / (20.0 * constants.c1)) {
        return Err(Error::HypothesisViolated { gates: vec![Gate::MassBelowSigmaC1] });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0a1);
    let mut rows = Vec::new();
    for (i, h) in holes.holes().iter().enumerate() {
        let delta = delta_ir(holes, i, radius, constants)?;
        let w = h.weight();
        let neck_branch = w * (-radius / w).exp() >= h.alpha * h.beta / (4.0 * constants.c1 * w);
        let rho = h.position.norm();
        let to_weight = radial_integral(h.alpha, h.beta, delta, w);
        let to_origin = radial_integral(h.alpha, h.beta, delta, rho);
        let mut comparison_min = f64::INFINITY;
        let rays = sample_count.max(1);
        for _ in 0..rays {
            let u = random_unit(&mut rng);
            for k in 0..16 {
                let x = h.position + u * (delta * (rho / delta).powf(k as f64 / 16.0));
                let r = (x - h.position).norm();
                let single = (1.0 + h.alpha / r) * (1.0 + h.beta / r);
                comparison_min = comparison_min.min(holes.factor(&x) / single);
            }
        }
        let pass = comparison_min >= 1.0 - 1e-12 && (to_origin > radius || !neck_branch);
        rows.push(ContainmentRow {
            hole: i,
            delta_ir: delta,
            neck_branch,
            integral_to_weight: to_weight,
            integral_to_origin: to_origin,
            comparison_min,
            pass,
        });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(ContainmentReport { radius, rows, pass })
}
