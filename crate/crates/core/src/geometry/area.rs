use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::HoleSet;
use crate::surface::{Harmonics, RadialSurface, SurfaceGeometry, SurfaceModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AreaEstimate {
    pub area: f64,
    /// |A(n) - A(n/2)|, floored at a few ulps of the area.
    pub error_estimate: f64,
}

/// Reject surfaces that pass through a hole.
pub(crate) fn check_avoids_holes(holes: &HoleSet, model: &SurfaceModel) -> Result<()> {
    for (i, h) in holes.holes().iter().enumerate() {
        let d = h.position - model.center;
        let dist = d.norm();
        if dist == 0.0 {
            continue;
        }
        let r = model.radius(&d);
        if (dist - r).abs() <= 1e-9 * r {
            return Err(Error::SurfaceThroughHole { hole: i });
        }
    }
    Ok(())
}

pub(crate) fn area_on_geometry(holes: &HoleSet, h: &Harmonics, geo: &SurfaceGeometry) -> Result<f64> {
    let mut dens = Vec::with_capacity(geo.points.len());
    for ((x, d), a) in geo.points.iter().zip(&geo.offsets).zip(&geo.area_density) {
        let psi = holes.factor_about(&geo.center, d);
        if !psi.is_finite() {
            let hole = holes.hole_at(x).unwrap_or(0);
            return Err(Error::SurfaceThroughHole { hole });
        }
        dens.push(psi * psi * a);
    }
    Ok(h.grid.integrate(&dens))
}

fn area_of(holes: &HoleSet, surface: &RadialSurface) -> Result<f64> {
    let model = surface.model()?;
    let h = Harmonics::new(surface.grid(), model.lmax)?;
    let geo = crate::surface::geometry_from_jet(&model.center, &h.grid, &h.synthesize_jet(&model.coeffs, true));
    area_on_geometry(holes, &h, &geo)
}

/// g-area of a radial surface: Psi^2 against the Euclidean area element.
pub fn surface_area(holes: &HoleSet, surface: &RadialSurface) -> Result<AreaEstimate> {
    let model = surface.model()?;
    check_avoids_holes(holes, &model)?;
    let fine = area_of(holes, surface)?;
    let coarse_grid = (surface.n_theta / 2, surface.n_phi / 2);
    let error_estimate = match model.resample(coarse_grid.0, coarse_grid.1) {
        Ok(coarse) => (fine - area_of(holes, &coarse)?).abs(),
        Err(_) => f64::INFINITY,
    };
    Ok(AreaEstimate { area: fine, error_estimate: error_estimate.max(16.0 * f64::EPSILON * fine) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{presets, Hole};
    use crate::Vec3;
    use std::f64::consts::PI;

    #[test]
    fn schwarzschild_neck_area() {
        let s = RadialSurface::sphere(Vec3::zeros(), 0.5, 32, 64).unwrap();
        let a = surface_area(&presets::schwarzschild(1.0), &s).unwrap();
        assert!((a.area - 16.0 * PI).abs() < 1e-12 * 16.0 * PI);
    }

    #[test]
    fn far_unit_sphere_is_nearly_flat() {
        let holes = HoleSet::new(vec![Hole::new([1e6, 0.0, 0.0], 1e-3, 1e-3)], true).unwrap();
        let a = surface_area(&holes, &RadialSurface::sphere(Vec3::zeros(), 1.0, 16, 32).unwrap()).unwrap();
        assert!((a.area / (4.0 * PI) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn refinement_stays_within_estimate() {
        let holes = presets::symmetric_pair(2.0, 0.2, 0.3);
        let center = Vec3::new(1.0, 0.0, 0.0);
        let area = |nt: usize| {
            surface_area(&holes, &RadialSurface::sphere(center, 0.6, nt, 2 * nt).unwrap()).unwrap()
        };
        let (a, b) = (area(24), area(48));
        assert!((b.area - a.area).abs() <= a.error_estimate, "{a:?} {b:?}");
    }

    #[test]
    fn surface_through_hole_is_rejected() {
        let holes = presets::symmetric_pair(2.0, 0.2, 0.3);
        let s = RadialSurface::sphere(Vec3::zeros(), 1.0, 16, 32).unwrap();
        assert!(matches!(surface_area(&holes, &s), Err(Error::SurfaceThroughHole { .. })));
    }
}
