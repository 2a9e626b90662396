//! Minimal-surface search by a preconditioned inward flow of a radial graph.
//!
//! The surface is kept as a real spherical-harmonic expansion of r about the
//! center. Each step projects the residual H + 2 dPsi/dn / Psi onto the
//! harmonics and moves degree l by -tau rbar^2 res_l / (1 + l(l+1)). On a
//! Schwarzschild horizon the residual operator acts on degree l exactly as
//! (1 + l(l+1)) / rbar^2, so all degrees settle at the same rate. Steps are
//! capped at 5% of the mean radius, so the flow cannot jump over the first
//! stationary surface on its way in.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::area::{check_avoids_holes, surface_area};
use crate::horizon::constants::Constants;
use crate::manifold::{HoleSet, JetOrder};
use crate::surface::{
    geometry_from_jet, sh_count, sh_index, Harmonics, RadialSurface, SphereGrid, SurfaceGeometry, SurfaceModel,
};
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HorizonOptions {
    pub n_theta: usize,
    pub n_phi: usize,
    /// Starting harmonic degree; raised in steps of 8 when truncation limits the residual.
    pub lmax: usize,
    /// Convergence threshold on rbar * max |residual|.
    pub tol: f64,
    pub max_iterations: usize,
    pub tau: f64,
    pub constants: Constants,
}

impl Default for HorizonOptions {
    fn default() -> Self {
        HorizonOptions {
            n_theta: 64,
            n_phi: 128,
            lmax: 8,
            tol: 1e-9,
            max_iterations: 100_000,
            tau: 0.6,
            constants: Constants::default(),
        }
    }
}

/// Radii of the annulus that must contain a horizon around hole `hole`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Annulus {
    pub hole: usize,
    pub inner: f64,
    pub outer: f64,
    pub c1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizonResult {
    pub surface: RadialSurface,
    pub mean_radius: f64,
    pub area_g: f64,
    pub area_error: f64,
    pub residual_max: f64,
    pub scaled_residual: f64,
    pub iterations: usize,
    pub lmax: usize,
    pub enclosed_holes: Vec<usize>,
    pub annulus: Option<Annulus>,
    #[serde(skip)]
    pub model: SurfaceModel,
}

/// Annulus radii alpha beta / (4 C1 (alpha + beta)) and 2 C1 sqrt(A / pi).
pub fn annulus_radii(holes: &HoleSet, hole: usize, area: f64, c1: f64) -> Result<Annulus> {
    let h = holes.hole(hole)?;
    Ok(Annulus {
        hole,
        inner: h.alpha * h.beta / (4.0 * c1 * h.weight()),
        outer: 2.0 * c1 * (area / std::f64::consts::PI).sqrt(),
        c1,
    })
}

fn residual_on(holes: &HoleSet, geo: &SurfaceGeometry) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(geo.points.len());
    for ((d, n), h) in geo.offsets.iter().zip(&geo.normals).zip(&geo.mean_curvature) {
        let jet = holes.conformal_eval_about(&geo.center, d, JetOrder::Gradient).map_err(|e| match e {
            Error::EvaluationAtHole { hole, .. } => Error::SurfaceThroughHole { hole },
            other => other,
        })?;
        out.push(h + 2.0 * jet.grad_big_psi.dot(n) / jet.big_psi);
    }
    Ok(out)
}

/// Pointwise H + 2 grad Psi . n / Psi at the nodes of `surface`.
pub fn mc_residual(holes: &HoleSet, surface: &RadialSurface) -> Result<Vec<f64>> {
    let model = surface.model()?;
    check_avoids_holes(holes, &model)?;
    let h = Harmonics::new(surface.grid(), model.lmax)?;
    let geo = geometry_from_jet(&model.center, &h.grid, &h.synthesize_jet(&model.coeffs, true));
    residual_on(holes, &geo)
}

fn enclosed(holes: &HoleSet, model: &SurfaceModel) -> Vec<usize> {
    holes
        .holes()
        .iter()
        .enumerate()
        .filter(|(_, h)| model.contains(&h.position))
        .map(|(i, _)| i)
        .collect()
}

/// Flow a large sphere about `center` inward to the first minimal surface.
pub fn find_horizon(holes: &HoleSet, center: &Vec3, init_radius: f64, options: &HorizonOptions) -> Result<HorizonResult> {
    if !(init_radius > 0.0) {
        return Err(Error::NonPositiveInput { name: "init_radius", value: init_radius });
    }
    let grid = SphereGrid::new(options.n_theta, options.n_phi)?;
    let lmax_cap = grid.max_degree();
    let mut lmax = options.lmax.min(lmax_cap);
    let mut h = Harmonics::new(grid.clone(), lmax)?;
    let y00 = (4.0 * std::f64::consts::PI).sqrt();
    let mut coeffs = vec![0.0; h.count()];
    coeffs[0] = init_radius * y00;
    let floor = 1e-3 * init_radius;
    let mut tau = options.tau;
    let mut last_scaled = f64::INFINITY;
    for iteration in 0..options.max_iterations {
        let jet = h.synthesize_jet(&coeffs, true);
        let rmin = jet.v.iter().copied().fold(f64::INFINITY, f64::min);
        if rmin < floor {
            return Err(Error::CollapseTowardHole { radius: rmin.max(0.0) });
        }
        let geo = geometry_from_jet(center, &grid, &jet);
        let res = residual_on(holes, &geo)?;
        let rbar = coeffs[0] / y00;
        let scaled = rbar * res.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if !scaled.is_finite() {
            return Err(Error::NoConvergence { iterations: iteration, residual: scaled });
        }
        let proj = h.analyze(&res);
        if scaled < options.tol {
            let surface = RadialSurface::new(*center, grid.n_theta, grid.n_phi, jet.v)?;
            let model = SurfaceModel { center: *center, lmax, coeffs };
            let area = surface_area(holes, &surface)?;
            let enclosed_holes = enclosed(holes, &model);
            let annulus = enclosed_holes
                .iter()
                .min_by(|a, b| {
                    let da = (holes.holes()[**a].position - center).norm();
                    let db = (holes.holes()[**b].position - center).norm();
                    da.total_cmp(&db)
                })
                .map(|&i| annulus_radii(holes, i, area.area, options.constants.c1))
                .transpose()?;
            return Ok(HorizonResult {
                mean_radius: surface.mean_radius(),
                surface,
                area_g: area.area,
                area_error: area.error_estimate,
                residual_max: scaled / rbar,
                scaled_residual: scaled,
                iterations: iteration,
                lmax,
                enclosed_holes,
                annulus,
                model,
            });
        }
        let proj_rms = rbar * (proj.iter().map(|v| v * v).sum::<f64>() / (4.0 * std::f64::consts::PI)).sqrt();
        if proj_rms < 0.05 * options.tol {
            if lmax == lmax_cap {
                return Err(Error::NoConvergence { iterations: iteration, residual: scaled });
            }
            lmax = (lmax + 8).min(lmax_cap);
            h = Harmonics::new(grid.clone(), lmax)?;
            coeffs.resize(sh_count(lmax), 0.0);
            last_scaled = f64::INFINITY;
            continue;
        }
        if scaled > 1.5 * last_scaled && scaled < 0.5 {
            tau = (0.5 * tau).max(1e-3);
        }
        last_scaled = scaled;
        let mut step: Vec<f64> = vec![0.0; coeffs.len()];
        for l in 0..=lmax {
            let pre = tau * rbar * rbar / (1.0 + (l * (l + 1)) as f64);
            for m in -(l as i64)..=(l as i64) {
                let i = sh_index(l, m);
                step[i] = -pre * proj[i];
            }
        }
        let change = h.synthesize(&step).iter().map(|v| v.abs()).fold(0.0, f64::max);
        let cap = 0.05 * rbar;
        let scale = if change > cap { cap / change } else { 1.0 };
        for (c, s) in coeffs.iter_mut().zip(&step) {
            *c += scale * s;
        }
    }
    Err(Error::NoConvergence { iterations: options.max_iterations, residual: last_scaled })
}

/// How the outermost horizons are arranged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HorizonLayout {
    /// One surface per hole.
    Disjoint,
    /// Every hole inside a single surface.
    Shared,
    /// Some holes share a surface, others have their own.
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutermostReport {
    pub horizons: Vec<HorizonResult>,
    pub layout: HorizonLayout,
    /// Whether m < sigma / (20 C1) held, so pairwise disjointness is guaranteed.
    pub disjointness_applicable: bool,
    /// Per-hole horizons pairwise disjoint (checked regardless of applicability).
    pub pairwise_disjoint: bool,
    /// Surfaces found from cluster centroids that enclose no hole.
    pub hole_free_candidates: Vec<HorizonResult>,
}

/// Whether two radial surfaces are disjoint, by bounding balls and then
/// by testing every node of each against the other.
pub fn surfaces_disjoint(a: &HorizonResult, b: &HorizonResult) -> bool {
    let (ca, cb) = (a.model.center, b.model.center);
    let ra = a.surface.r.iter().copied().fold(0.0, f64::max);
    let rb = b.surface.r.iter().copied().fold(0.0, f64::max);
    if ra + rb < (ca - cb).norm() {
        return true;
    }
    let nodes_outside = |s: &HorizonResult, other: &HorizonResult| {
        let g = s.surface.grid();
        (0..g.n_theta).all(|j| (0..g.n_phi).all(|k| !other.model.contains(&s.surface.point(j, k))))
    };
    nodes_outside(a, b) && nodes_outside(b, a)
}

fn trial_radius(holes: &HoleSet, i: usize) -> f64 {
    2.0 * holes.holes()[i].weight()
}

/// Per-hole and merged-cluster searches for the outermost minimal surfaces.
pub fn find_outermost(holes: &HoleSet, options: &HorizonOptions) -> Result<OutermostReport> {
    if !holes.strict_beta() {
        return Err(Error::HypothesisViolated { gates: vec![crate::error::Gate::StrictBeta] });
    }
    let n = holes.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let d = (holes.holes()[i].position - holes.holes()[j].position).norm();
            if d < trial_radius(holes, i) + trial_radius(holes, j) {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|i| root(&mut parent, i)).collect();
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        match clusters.iter_mut().find(|c| roots[c[0]] == roots[i]) {
            Some(c) => c.push(i),
            None => clusters.push(vec![i]),
        }
    }
    let mut horizons = Vec::new();
    let mut candidates = Vec::new();
    let mut covered = vec![false; n];
    for cluster in clusters.iter().filter(|c| c.len() > 1) {
        let w: f64 = cluster.iter().map(|&i| holes.holes()[i].weight()).sum();
        let centroid = cluster.iter().map(|&i| holes.holes()[i].position * holes.holes()[i].weight()).sum::<Vec3>() / w;
        let reach = cluster
            .iter()
            .map(|&i| (holes.holes()[i].position - centroid).norm() + trial_radius(holes, i))
            .fold(0.0, f64::max);
        if let Ok(found) = find_horizon(holes, &centroid, 1.5 * reach, options) {
            if found.enclosed_holes.is_empty() {
                candidates.push(found);
            } else if cluster.iter().all(|i| found.enclosed_holes.contains(i)) {
                for &i in &found.enclosed_holes {
                    covered[i] = true;
                }
                horizons.push(found);
            }
        }
    }
    let singles: Vec<usize> = (0..n).filter(|&i| !covered[i]).collect();
    let sep = holes.separation().ok();
    let results = crate::par::map(&singles, |&i| {
        let p = holes.holes()[i].position;
        let mut init = 2.0 * trial_radius(holes, i);
        let nearest = holes
            .holes()
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, h)| (h.position - p).norm())
            .fold(f64::INFINITY, f64::min);
        init = init.min(0.45 * nearest);
        find_horizon(holes, &p, init, options)
    });
    for r in results {
        horizons.push(r?);
    }
    let shared = horizons.iter().filter(|h| h.enclosed_holes.len() > 1).count();
    let layout = if shared == 0 {
        HorizonLayout::Disjoint
    } else if horizons.len() == 1 {
        HorizonLayout::Shared
    } else {
        HorizonLayout::Mixed
    };
    let mut pairwise_disjoint = true;
    for a in 0..horizons.len() {
        for b in a + 1..horizons.len() {
            pairwise_disjoint &= surfaces_disjoint(&horizons[a], &horizons[b]);
        }
    }
    let disjointness_applicable = sep.is_some_and(|s| holes.adm_mass() < s.sigma / (20.0 * options.constants.c1));
    Ok(OutermostReport { horizons, layout, disjointness_applicable, pairwise_disjoint, hole_free_candidates: candidates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::presets;

    #[test]
    fn schwarzschild_sphere_residuals() {
        let holes = presets::schwarzschild(1.0);
        for (rho, sign) in [(0.5, 0.0), (0.4, -1.0), (0.7, 1.0)] {
            let s = RadialSurface::sphere(Vec3::zeros(), rho, 16, 32).unwrap();
            let res = mc_residual(&holes, &s).unwrap();
            let exact = 2.0 * (rho - 0.5) / (rho * (rho + 0.5));
            for v in res {
                assert!((v - exact).abs() < 1e-12);
                assert!(v * sign >= 0.0);
            }
        }
        let far = RadialSurface::sphere(Vec3::new(1e5, 0.0, 0.0), 1.0, 16, 32).unwrap();
        for v in mc_residual(&holes, &far).unwrap() {
            assert!((v - 2.0).abs() < 1e-4);
        }
    }

    #[test]
    fn schwarzschild_horizon_found_from_outside() {
        let r = find_horizon(&presets::schwarzschild(1.0), &Vec3::zeros(), 2.0, &HorizonOptions::default()).unwrap();
        assert!((r.mean_radius - 0.5).abs() < 1e-8);
        assert!((r.area_g / (16.0 * std::f64::consts::PI) - 1.0).abs() < 1e-8);
        assert_eq!(r.enclosed_holes, vec![0]);
    }

    #[test]
    fn off_center_start_recovers_sphere() {
        let r = find_horizon(&presets::schwarzschild(1.0), &Vec3::new(0.1, -0.05, 0.08), 2.0, &HorizonOptions::default()).unwrap();
        let worst = (0..r.surface.n_theta)
            .flat_map(|j| (0..r.surface.n_phi).map(move |k| (j, k)))
            .map(|(j, k)| (r.surface.point(j, k).norm() - 0.5).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn extreme_rn_collapses() {
        let r = find_horizon(&presets::extreme_reissner_nordstrom(1.0), &Vec3::zeros(), 2.0, &HorizonOptions::default());
        assert!(matches!(r, Err(Error::CollapseTowardHole { .. })), "{r:?}");
    }

    #[test]
    fn small_pair_horizon_is_perturbative() {
        let holes = presets::small_pair();
        let r = find_horizon(&holes, &holes.holes()[0].position, 4e-5, &HorizonOptions::default()).unwrap();
        let m1 = holes.end_mass(0).unwrap();
        assert!((r.mean_radius / (m1 / 2.0) - 1.0).abs() < 1e-3, "{}", r.mean_radius);
    }

    #[test]
    fn close_equal_pair_shares_one_surface() {
        let opts = HorizonOptions::default();
        let near = find_outermost(&presets::symmetric_pair(0.5, 1.0, 1.0), &opts).unwrap();
        assert_eq!(near.layout, HorizonLayout::Shared);
        assert_eq!(near.horizons[0].enclosed_holes, vec![0, 1]);
        let far = find_outermost(&presets::symmetric_pair(20.0, 1.0, 1.0), &opts).unwrap();
        assert_eq!(far.layout, HorizonLayout::Disjoint);
        assert!(far.pairwise_disjoint && far.horizons.len() == 2);
    }
}
