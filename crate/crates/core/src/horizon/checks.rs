use serde::Serialize;

use crate::error::Result;
use crate::horizon::constants::Constants;
use crate::horizon::finder::HorizonResult;
use crate::manifold::{HoleSet, JetOrder};
use crate::surface::RadialSurface;
use crate::Vec3;

/// Largest |grad Psi|^2 / Psi^4 over the surface nodes.
pub fn max_gradient_ratio(holes: &HoleSet, surface: &RadialSurface) -> Result<f64> {
    let mut worst = 0.0f64;
    for j in 0..surface.n_theta {
        for k in 0..surface.n_phi {
            let jet = holes.conformal_eval(&surface.point(j, k), JetOrder::Gradient)?;
            worst = worst.max(jet.grad_big_psi.norm_squared() / jet.big_psi.powi(4));
        }
    }
    Ok(worst)
}

/// Lower bound 4 pi / max(|grad Psi|^2 / Psi^4) on the area of a minimal sphere.
/// Meaningful only when the surface is minimal.
pub fn area_lower_bound(holes: &HoleSet, surface: &RadialSurface) -> Result<f64> {
    Ok(4.0 * std::f64::consts::PI / max_gradient_ratio(holes, surface)?)
}

/// 2 rho beta / (rho + beta)^3, the Schwarzschild value of |grad Psi| / Psi^2
/// in terms of rho and beta = m/2.
pub fn schwarzschild_gradient_ratio(rho: f64, beta: f64) -> f64 {
    2.0 * rho * beta / (rho + beta).powi(3)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceMassBound {
    pub area: f64,
    pub area_lower_bound: f64,
    /// 16 pi m^2 >= area lower bound.
    pub holds: bool,
    pub area_at_least_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PenroseReport {
    pub mass: f64,
    pub total_area: f64,
    /// sqrt(total area / 16 pi).
    pub bound: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub surfaces: Vec<SurfaceMassBound>,
}

/// m >= sqrt(sum of areas / 16 pi), plus the per-surface gradient bound.
pub fn penrose_check(holes: &HoleSet, horizons: &[HorizonResult], tolerance: f64) -> Result<PenroseReport> {
    let mass = holes.adm_mass();
    let total_area: f64 = horizons.iter().map(|h| h.area_g).sum();
    let bound = (total_area / (16.0 * std::f64::consts::PI)).sqrt();
    let mut surfaces = Vec::new();
    for h in horizons {
        let lb = area_lower_bound(holes, &h.surface)?;
        surfaces.push(SurfaceMassBound {
            area: h.area_g,
            area_lower_bound: lb,
            holds: 16.0 * std::f64::consts::PI * mass * mass >= lb * (1.0 - tolerance),
            area_at_least_bound: h.area_g >= lb * (1.0 - tolerance),
        });
    }
    let pass = mass >= bound * (1.0 - tolerance) && surfaces.iter().all(|s| s.holds);
    Ok(PenroseReport { mass, total_area, bound, slack: mass - bound, tolerance, pass, surfaces })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocateRow {
    pub hole: usize,
    pub area: f64,
    pub min_distance: f64,
    pub max_distance: f64,
    /// sqrt(A / 4 pi).
    pub touch_radius: f64,
    pub annulus_inner: f64,
    pub annulus_outer: f64,
    /// (a) the surface meets the closed ball of radius sqrt(A / 4 pi).
    pub meets_touch_ball: bool,
    /// (b) the surface lies in the ball of radius 2 C1 sqrt(A / pi).
    pub inside_outer: bool,
    /// (c) the surface avoids the inner annulus ball.
    pub avoids_inner: bool,
    /// (e) 2 C1 sqrt(A / pi) <= 8 C1 m < sigma / 2.
    pub disjointness_chain: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaRow {
    pub hole: usize,
    /// Max of 2 C1 sqrt(A_i / pi) over horizons contained in that ball about the hole.
    pub gamma: Option<f64>,
    pub bound: f64,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocateReport {
    pub c1: f64,
    pub constants_source: &'static str,
    pub mass: f64,
    pub sigma: Option<f64>,
    pub hypothesis_holds: bool,
    pub verdict: Verdict,
    pub rows: Vec<LocateRow>,
    pub gammas: Vec<GammaRow>,
}

fn distance_range(surface: &RadialSurface, p: &Vec3) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for j in 0..surface.n_theta {
        for k in 0..surface.n_phi {
            let d = (surface.point(j, k) - p).norm();
            lo = lo.min(d);
            hi = hi.max(d);
        }
    }
    (lo, hi)
}

/// Location checks for each horizon against the hole it surrounds, and the
/// radii gamma_j. The verdict is NotApplicable unless m < sigma / (20 C1);
/// the individual checks are evaluated either way.
pub fn locate_checks(holes: &HoleSet, horizons: &[HorizonResult], constants: &Constants) -> Result<LocateReport> {
    let c1 = constants.c1;
    let m = holes.adm_mass();
    let sigma = holes.separation().ok().map(|s| s.sigma);
    let hypothesis_holds = sigma.is_some_and(|s| m < s / (20.0 * c1));
    let pi = std::f64::consts::PI;
    let mut rows = Vec::new();
    for h in horizons {
        let Some(ann) = h.annulus else { continue };
        let hole = holes.hole(ann.hole)?;
        let (lo, hi) = distance_range(&h.surface, &hole.position);
        let touch = (h.area_g / (4.0 * pi)).sqrt();
        let inner = hole.alpha * hole.beta / (4.0 * c1 * hole.weight());
        let outer = 2.0 * c1 * (h.area_g / pi).sqrt();
        rows.push(LocateRow {
            hole: ann.hole,
            area: h.area_g,
            min_distance: lo,
            max_distance: hi,
            touch_radius: touch,
            annulus_inner: inner,
            annulus_outer: outer,
            meets_touch_ball: lo <= touch,
            inside_outer: hi < outer,
            avoids_inner: lo > inner,
            disjointness_chain: outer <= 8.0 * c1 * m && sigma.is_some_and(|s| 8.0 * c1 * m < s / 2.0),
        });
    }
    let mut gammas = Vec::new();
    for (j, hole) in holes.holes().iter().enumerate() {
        let mut gamma: Option<f64> = None;
        for h in horizons {
            let radius = 2.0 * c1 * (h.area_g / pi).sqrt();
            let (_, hi) = distance_range(&h.surface, &hole.position);
            if hi < radius {
                gamma = Some(gamma.map_or(radius, |g| g.max(radius)));
            }
        }
        let bound = 8.0 * c1 * m;
        gammas.push(GammaRow { hole: j, gamma, bound, within_bound: gamma.is_some_and(|g| g <= bound) });
    }
    let all_pass = rows
        .iter()
        .all(|r| r.meets_touch_ball && r.inside_outer && r.avoids_inner && r.disjointness_chain)
        && gammas.iter().all(|g| g.within_bound);
    let verdict = if !hypothesis_holds {
        Verdict::NotApplicable
    } else if all_pass {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(LocateReport {
        c1,
        constants_source: constants.source,
        mass: m,
        sigma,
        hypothesis_holds,
        verdict,
        rows,
        gammas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::horizon::finder::{find_horizon, find_outermost, HorizonOptions};
    use crate::manifold::presets;

    #[test]
    fn gradient_ratio_peaks_at_half_beta() {
        let beta = 0.7;
        let mut best = (0.0, 0.0);
        for i in 1..100_000 {
            let rho = i as f64 * 1e-5 * 3.0;
            let v = schwarzschild_gradient_ratio(rho, beta);
            if v > best.1 {
                best = (rho, v);
            }
        }
        assert!((best.0 - beta / 2.0).abs() < 1e-4);
        let m = 1.3;
        let f = schwarzschild_gradient_ratio(m / 2.0, m / 2.0);
        assert!((16.0 * std::f64::consts::PI * m * m * f * f - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn schwarzschild_checks() {
        let holes = presets::schwarzschild(1.0);
        let opts = HorizonOptions::default();
        let h = find_horizon(&holes, &Vec3::zeros(), 2.0, &opts).unwrap();
        let lb = area_lower_bound(&holes, &h.surface).unwrap();
        assert!((lb / h.area_g - 1.0).abs() < 1e-6);
        let p = penrose_check(&holes, std::slice::from_ref(&h), 1e-9).unwrap();
        assert!(p.pass && p.slack.abs() < 1e-6);
        let loc = locate_checks(&holes, &[h], &opts.constants).unwrap();
        assert_eq!(loc.verdict, Verdict::NotApplicable);
        let row = &loc.rows[0];
        assert!((row.annulus_inner - 0.25 / (4.0 * opts.constants.c1)).abs() < 1e-12);
        assert!((row.annulus_inner - 1.859e-3).abs() < 1e-6);
        assert!(row.meets_touch_ball && row.inside_outer && row.avoids_inner);
    }

    #[test]
    fn small_pair_passes_everything() {
        let holes = presets::small_pair();
        let opts = HorizonOptions::default();
        let out = find_outermost(&holes, &opts).unwrap();
        assert_eq!(out.horizons.len(), 2);
        assert!(out.disjointness_applicable && out.pairwise_disjoint);
        let p = penrose_check(&holes, &out.horizons, 1e-9).unwrap();
        assert!(p.pass);
        let m1 = holes.end_mass(0).unwrap();
        assert!((p.bound / (2f64.sqrt() * m1) - 1.0).abs() < 1e-3);
        let loc = locate_checks(&holes, &out.horizons, &opts.constants).unwrap();
        assert_eq!(loc.verdict, Verdict::Pass, "{loc:?}");
    }

    #[test]
    fn heavy_pair_is_not_applicable() {
        let holes = presets::symmetric_pair(4.0, 0.5, 0.5);
        let opts = HorizonOptions::default();
        let out = find_outermost(&holes, &opts).unwrap();
        let loc = locate_checks(&holes, &out.horizons, &opts.constants).unwrap();
        assert_eq!(loc.verdict, Verdict::NotApplicable);
    }
}
