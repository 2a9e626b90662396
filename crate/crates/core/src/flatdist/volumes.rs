use std::f64::consts::PI;

use serde::Serialize;

use crate::error::Result;
use crate::flatdist::bound::ExtractedConstants;
use crate::flatdist::params::PipelineParams;
use crate::flatdist::region::WRegion;
use crate::geometry::{region_volume, shell_volume, VolumeBudget};
use crate::manifold::HoleSet;
use crate::surface::SphereGrid;
use crate::Vec3;

fn ball_volume(r: f64) -> f64 {
    4.0 / 3.0 * PI * r.powi(3)
}

/// Volume of the intersection of balls of radii r1, r2 with centers d apart.
pub fn ball_intersection_volume(r1: f64, r2: f64, d: f64) -> f64 {
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        return ball_volume(r1.min(r2));
    }
    PI * (r1 + r2 - d).powi(2) * (d * d + 2.0 * d * (r1 + r2) - 3.0 * (r1 - r2).powi(2)) / (12.0 * d)
}

/// Integral of Psi^2 over the sphere |x - c| = rho, with the difference
/// against a half-resolution grid as the error estimate.
pub fn sphere_area_g(holes: &HoleSet, center: &Vec3, rho: f64) -> (f64, f64) {
    let at = |nt: usize| {
        let grid = SphereGrid::new(nt, 2 * nt).expect("grid above minimum");
        let mut vals = Vec::with_capacity(grid.len());
        for j in 0..grid.n_theta {
            for k in 0..grid.n_phi {
                vals.push(holes.factor(&(center + grid.direction(j, k) * rho)).powi(2));
            }
        }
        grid.integrate(&vals) * rho * rho
    };
    let (fine, coarse) = (at(64), at(32));
    (fine, (fine - coarse).abs().max(16.0 * f64::EPSILON * fine))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bounded {
    pub value: f64,
    pub error: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Bounded {
    fn new(value: f64, error: f64, bound: f64) -> Self {
        Bounded { value, error, bound, pass: value <= bound }
    }
}

/// Per-hole annulus gamma_{i,eps} > |x - p_i| > delta_{i,R}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HoleAnnulus {
    pub hole: usize,
    pub inner: f64,
    pub outer: f64,
    pub volume_g: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolumeReport {
    pub vol_g_w: Bounded,
    pub vol_delta_w: f64,
    pub area_g_boundary: Bounded,
    pub area_delta_boundary: f64,
    /// Upper bound for Vol_g(M1 \ W): the outer shell plus the per-hole annuli.
    pub excess_g: Bounded,
    pub outer_shell_g: f64,
    pub hole_annuli: Vec<HoleAnnulus>,
    /// Vol_delta(M2 \ W) in closed form.
    pub excess_delta: Bounded,
    /// Vol_delta(M2 \ W) from the sampled flat volume of W.
    pub excess_delta_sampled: f64,
    pub excess_delta_sampled_error: f64,
    pub sampled_matches_closed_form: bool,
    pub pass: bool,
}

/// Volumes and boundary areas of W and of the two complements, each checked
/// against its extracted constant.
pub fn volume_report(
    holes: &HoleSet,
    params: &PipelineParams,
    w: &WRegion,
    constants: &ExtractedConstants,
    budget: &VolumeBudget,
) -> Result<VolumeReport> {
    params.gates.require()?;
    let (radius, eps) = (params.radius, params.eps);
    let inner = w.inner_radius;
    let balls = &w.region.excluded;

    let mut vol_delta_w = ball_volume(inner);
    let mut area_delta = 4.0 * PI * inner * inner;
    let mut area_g_sum = 0.0;
    let mut area_g_err2 = 0.0;
    let (outer_area, outer_err) = sphere_area_g(holes, &Vec3::zeros(), inner);
    area_g_sum += outer_area;
    area_g_err2 += outer_err * outer_err;
    for b in balls {
        let d = b.c().norm();
        vol_delta_w -= ball_intersection_volume(inner, b.radius, d);
        if d + b.radius <= inner {
            area_delta += 4.0 * PI * b.radius * b.radius;
            let (a, e) = sphere_area_g(holes, &b.c(), b.radius);
            area_g_sum += a;
            area_g_err2 += e * e;
        }
    }
    let vw = region_volume(holes, &w.region, budget)?;

    let (outer_shell, shell_err) = shell_volume(holes, &Vec3::zeros(), inner, radius);
    let mut excess_g = outer_shell;
    let mut excess_err2 = shell_err * shell_err;
    let mut annuli = Vec::new();
    for (i, h) in holes.holes().iter().enumerate() {
        let (lo, hi) = (params.delta_ir[i], params.gamma_i_eps[i]);
        if hi > lo && h.position.norm() < radius {
            let (v, e) = shell_volume(holes, &h.position, lo, hi);
            excess_g += v;
            excess_err2 += e * e;
            annuli.push(HoleAnnulus { hole: i, inner: lo, outer: hi, volume_g: v, error: e });
        }
    }
    let closed = ball_volume(radius) - ball_volume(inner)
        + holes
            .holes()
            .iter()
            .zip(&params.gamma_i_eps)
            .filter(|(h, _)| h.position.norm() < radius)
            .map(|(_, g)| ball_volume(*g))
            .sum::<f64>();
    let sampled = ball_volume(radius) - vw.flat_volume;
    let sampled_ok = (sampled - closed).abs() <= 5.0 * vw.flat_error + 1e-9 * ball_volume(radius);

    let r3 = radius.powi(3);
    let vol_g_w = Bounded::new(vw.volume, vw.error, constants.c_prime * r3);
    let area_g_boundary = Bounded::new(area_g_sum, area_g_err2.sqrt(), constants.c_prime * radius * radius);
    let excess_g = Bounded::new(excess_g, excess_err2.sqrt(), constants.c_double_prime * r3 * eps);
    let excess_delta = Bounded::new(closed, 0.0, constants.c_double_prime * r3 * eps);
    let pass = vol_g_w.pass
        && area_g_boundary.pass
        && excess_g.pass
        && excess_delta.pass
        && sampled_ok
        && vw.volume >= vol_delta_w * (1.0 - 1e-9) - 5.0 * vw.error
        && area_g_sum >= area_delta * (1.0 - 1e-9);
    Ok(VolumeReport {
        vol_g_w,
        vol_delta_w,
        area_g_boundary,
        area_delta_boundary: area_delta,
        excess_g,
        outer_shell_g: outer_shell,
        hole_annuli: annuli,
        excess_delta,
        excess_delta_sampled: sampled,
        excess_delta_sampled_error: vw.flat_error,
        sampled_matches_closed_form: sampled_ok,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flatdist::bound::extracted_constants;
    use crate::flatdist::params::params;
    use crate::flatdist::region::region_w;
    use crate::horizon::Constants;
    use crate::manifold::presets;

    #[test]
    fn lens_volume_limits() {
        let (r1, r2) = (1.3, 0.7);
        assert!((ball_intersection_volume(r1, r2, 0.2) - ball_volume(0.7)).abs() < 1e-15);
        assert_eq!(ball_intersection_volume(r1, r2, 2.5), 0.0);
        // Unit balls one radius apart share 5/16 of a ball.
        let v = ball_intersection_volume(1.0, 1.0, 1.0);
        assert!((v - 5.0 * PI / 12.0).abs() < 1e-14);
    }

    #[test]
    fn sphere_area_in_schwarzschild() {
        let holes = presets::schwarzschild(1.0);
        let (a, e) = sphere_area_g(&holes, &Vec3::zeros(), 2.0);
        let exact = 4.0 * PI * 4.0 * (1.25f64).powi(4);
        assert!((a - exact).abs() < 1e-12 * exact && e < 1e-10 * exact);
    }

    #[test]
    fn reference_volumes() {
        let c = Constants::default();
        let holes = presets::small_pair();
        let p = params(&holes, 10.0, 0.02, &[2.69e-3, 2.69e-3], &c).unwrap();
        let w = region_w(&holes, &p, p.lambda, 1000, 1).unwrap();
        let k = extracted_constants(&c);
        let budget = VolumeBudget { points: 200_000, ..Default::default() };
        let v = volume_report(&holes, &p, &w, &k, &budget).unwrap();
        let expect = 4.0 / 3.0 * PI * (1000.0 - 5.2f64.powi(3)) + 2.0 * ball_volume(4e-3);
        assert!((v.excess_delta.value - expect).abs() < 1e-9 * expect);
        assert!((v.excess_delta.value - 3599.8).abs() < 0.1, "{}", v.excess_delta.value);
        assert!(v.sampled_matches_closed_form, "{v:?}");
        assert!(v.pass, "{v:?}");
        assert!(v.vol_g_w.value >= v.vol_delta_w);
    }
}
