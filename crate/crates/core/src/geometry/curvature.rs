//! Metric, Christoffel symbols and curvature of g = Psi^2 delta, written with
//! f = ln Psi so everything follows from the analytic jet of Psi.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::manifold::{ConformalJet, HoleSet, JetOrder};
use crate::{Mat3, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSample {
    pub point: Vec3,
    /// Psi^2.
    pub factor: f64,
    pub tensor: Mat3,
}

pub fn metric_at(holes: &HoleSet, x: &Vec3) -> Result<MetricSample> {
    let j = holes.conformal_eval(x, JetOrder::Value)?;
    let factor = j.big_psi * j.big_psi;
    Ok(MetricSample { point: *x, factor, tensor: Mat3::identity() * factor })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureSample {
    pub point: Vec3,
    /// christoffels[k][i][j] = Gamma^k_ij.
    pub christoffels: [[[f64; 3]; 3]; 3],
    pub scalar_curvature: f64,
    /// Min and max sectional curvature over the coordinate planes and the
    /// extra random planes.
    pub sectional_range: [f64; 2],
    pub coordinate_sectional: [f64; 3],
    pub e_norm_sq: f64,
}

/// Gradient and Hessian of f = ln Psi.
pub(crate) fn log_jet(j: &ConformalJet) -> (Vec3, Mat3) {
    let g = j.grad_big_psi / j.big_psi;
    let h = j.hess_big_psi / j.big_psi - g * g.transpose();
    (g, h)
}

/// Sectional curvature of the plane spanned by Euclidean-orthonormal u, v.
pub(crate) fn sectional(psi: f64, df: &Vec3, hf: &Mat3, u: &Vec3, v: &Vec3) -> f64 {
    let hu = u.dot(&(hf * u));
    let hv = v.dot(&(hf * v));
    let (du, dv) = (u.dot(df), v.dot(df));
    -(hu + hv - du * du - dv * dv + df.norm_squared()) / (psi * psi)
}

pub(crate) fn scalar_from_log(psi: f64, df: &Vec3, hf: &Mat3) -> f64 {
    -(4.0 * hf.trace() + 2.0 * df.norm_squared()) / (psi * psi)
}

pub(crate) fn e_norm_sq_from_jet(j: &ConformalJet) -> f64 {
    let e = j.grad_psi / j.psi - j.grad_chi / j.chi;
    e.norm_squared() / (j.big_psi * j.big_psi)
}

/// Number of random planes added to the three coordinate planes.
pub const RANDOM_PLANES: usize = 10;

pub fn curvature_at(holes: &HoleSet, x: &Vec3) -> Result<CurvatureSample> {
    curvature_at_seeded(holes, x, 0x5eed)
}

pub fn curvature_at_seeded(holes: &HoleSet, x: &Vec3, seed: u64) -> Result<CurvatureSample> {
    let j = holes.conformal_eval(x, JetOrder::Hessian)?;
    let (df, hf) = log_jet(&j);
    let mut christoffels = [[[0.0; 3]; 3]; 3];
    for (k, plane) in christoffels.iter_mut().enumerate() {
        for (i, row) in plane.iter_mut().enumerate() {
            for (l, entry) in row.iter_mut().enumerate() {
                let mut v = 0.0;
                if k == i {
                    v += df[l];
                }
                if k == l {
                    v += df[i];
                }
                if i == l {
                    v -= df[k];
                }
                *entry = v;
            }
        }
    }
    let e = [Vec3::x(), Vec3::y(), Vec3::z()];
    let coordinate_sectional = [
        sectional(j.big_psi, &df, &hf, &e[0], &e[1]),
        sectional(j.big_psi, &df, &hf, &e[0], &e[2]),
        sectional(j.big_psi, &df, &hf, &e[1], &e[2]),
    ];
    let mut lo = coordinate_sectional.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = coordinate_sectional.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_PLANES {
        let (u, v) = random_plane(&mut rng);
        let k = sectional(j.big_psi, &df, &hf, &u, &v);
        lo = lo.min(k);
        hi = hi.max(k);
    }
    Ok(CurvatureSample {
        point: *x,
        christoffels,
        scalar_curvature: scalar_from_log(j.big_psi, &df, &hf),
        sectional_range: [lo, hi],
        coordinate_sectional,
        e_norm_sq: e_norm_sq_from_jet(&j),
    })
}

pub(crate) fn random_unit(rng: &mut impl Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

fn random_plane(rng: &mut impl Rng) -> (Vec3, Vec3) {
    let u = random_unit(rng);
    loop {
        let w = random_unit(rng);
        let v = w - u * u.dot(&w);
        if v.norm() > 1e-3 {
            return (u, v.normalize());
        }
    }
}

/// One sample of the constraint check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintRow {
    pub point: [f64; 3],
    pub scalar_curvature: f64,
    pub two_e_norm_sq: f64,
    pub residual: f64,
    pub divergence_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub samples: usize,
    pub excluded: usize,
    pub max_residual: f64,
    pub max_divergence_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub rows: Vec<ConstraintRow>,
}

/// Residuals of R = 2|E|^2 and div E = 0 at one point, each relative to the
/// size of the terms that cancel in it.
pub fn constraint_row(holes: &HoleSet, x: &Vec3) -> Result<ConstraintRow> {
    let j = holes.conformal_eval(x, JetOrder::Hessian)?;
    let (df, hf) = log_jet(&j);
    let p2 = j.big_psi * j.big_psi;
    let r = scalar_from_log(j.big_psi, &df, &hf);
    let two_e = 2.0 * e_norm_sq_from_jet(&j);
    let scale = (4.0 * hf.trace().abs() + 2.0 * df.norm_squared()) / p2;
    let residual = (r - two_e).abs() / r.abs().max(two_e).max(scale).max(1e-300);

    let lap_chi = j.hess_chi.trace();
    let lap_psi = j.hess_psi.trace();
    let gphi = j.grad_psi / j.psi - j.grad_chi / j.chi;
    let terms = [
        lap_psi / j.psi,
        -j.grad_psi.norm_squared() / (j.psi * j.psi),
        -lap_chi / j.chi,
        j.grad_chi.norm_squared() / (j.chi * j.chi),
    ];
    let lap_phi: f64 = terms.iter().sum();
    let div = (j.grad_big_psi.dot(&gphi) + j.big_psi * lap_phi) / (p2 * j.big_psi);
    let div_scale = (j.grad_big_psi.norm() * gphi.norm()
        + j.big_psi * terms.iter().map(|t| t.abs()).sum::<f64>())
        / (p2 * j.big_psi);
    let divergence_residual = if div_scale > 0.0 { div.abs() / div_scale } else { 0.0 };
    Ok(ConstraintRow { point: (*x).into(), scalar_curvature: r, two_e_norm_sq: two_e, residual, divergence_residual })
}

/// Sample points spread over the bulk around the holes and close to each hole.
pub fn constraint_sample_points(holes: &HoleSet, count: usize, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = holes.len() as f64;
    let center = holes.holes().iter().map(|h| h.position).sum::<Vec3>() / n;
    let spread = holes
        .holes()
        .iter()
        .map(|h| (h.position - center).norm())
        .fold(holes.adm_mass(), f64::max);
    let radius = 2.0 * spread;
    (0..count)
        .map(|i| {
            if i % 2 == 0 {
                center + random_unit(&mut rng) * (radius * rng.gen::<f64>().cbrt())
            } else {
                let h = holes.holes()[rng.gen_range(0..holes.len())];
                let lo = (1e-3 * h.weight()).ln();
                let hi = radius.ln().max(lo + 1.0);
                h.position + random_unit(&mut rng) * rng.gen_range(lo..hi).exp()
            }
        })
        .collect()
}

/// Largest |sectional curvature| over sample points at least one hole weight
/// away from every hole. Used when the curvature bound is not supplied.
pub fn estimate_kappa(holes: &HoleSet, count: usize, seed: u64) -> Result<f64> {
    let mut kappa = 0.0f64;
    for x in constraint_sample_points(holes, count, seed) {
        if holes.holes().iter().any(|h| (x - h.position).norm() < h.weight()) {
            continue;
        }
        let [lo, hi] = curvature_at(holes, &x)?.sectional_range;
        kappa = kappa.max(lo.abs()).max(hi.abs());
    }
    Ok(kappa)
}

pub fn verify_constraints(holes: &HoleSet, sample_count: usize, seed: u64, tolerance: f64) -> ConstraintReport {
    verify_constraints_at(holes, &constraint_sample_points(holes, sample_count, seed), tolerance)
}

/// Constraint check at given points; points at holes are skipped and counted.
pub fn verify_constraints_at(holes: &HoleSet, points: &[Vec3], tolerance: f64) -> ConstraintReport {
    let results = crate::par::map(points, |x| constraint_row(holes, x));
    let rows: Vec<ConstraintRow> = results.into_iter().filter_map(|r| r.ok()).collect();
    let excluded = points.len() - rows.len();
    let max_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    let max_divergence_residual = rows.iter().map(|r| r.divergence_residual).fold(0.0, f64::max);
    ConstraintReport {
        samples: rows.len(),
        excluded,
        max_residual,
        max_divergence_residual,
        tolerance,
        pass: max_residual < tolerance && max_divergence_residual < tolerance,
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{presets, Hole};

    fn generic() -> HoleSet {
        HoleSet::new(
            vec![Hole::new([1.0, 0.0, 0.0], 0.1, 0.3), Hole::new([0.0, 0.0, 0.0], 0.2, 0.4)],
            true,
        )
        .unwrap()
    }

    /// Scalar curvature of Psi^2 delta by finite differences of the metric
    /// alone, through Christoffels and the Ricci tensor.
    fn fd_scalar(holes: &HoleSet, x: &Vec3, h: f64) -> f64 {
        let g = |y: &Vec3| holes.factor(y).powi(2);
        let dg = |y: &Vec3, l: usize| {
            let mut e = Vec3::zeros();
            e[l] = h;
            (g(&(y + e)) - g(&(y - e))) / (2.0 * h)
        };
        let gamma = |y: &Vec3| {
            let gv = g(y);
            let d = [dg(y, 0), dg(y, 1), dg(y, 2)];
            let mut out = [[[0.0; 3]; 3]; 3];
            for k in 0..3 {
                for i in 0..3 {
                    for j in 0..3 {
                        let mut v = 0.0;
                        if k == j {
                            v += d[i];
                        }
                        if k == i {
                            v += d[j];
                        }
                        if i == j {
                            v -= d[k];
                        }
                        out[k][i][j] = 0.5 * v / gv;
                    }
                }
            }
            out
        };
        let g0 = gamma(x);
        let mut dgam = [[[[0.0; 3]; 3]; 3]; 3];
        for l in 0..3 {
            let mut e = Vec3::zeros();
            e[l] = h;
            let (p, m) = (gamma(&(x + e)), gamma(&(x - e)));
            for k in 0..3 {
                for i in 0..3 {
                    for j in 0..3 {
                        dgam[l][k][i][j] = (p[k][i][j] - m[k][i][j]) / (2.0 * h);
                    }
                }
            }
        }
        let mut r = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    continue;
                }
                let mut ric = 0.0;
                for k in 0..3 {
                    ric += dgam[k][k][i][j] - dgam[j][k][i][k];
                    for p in 0..3 {
                        ric += g0[k][k][p] * g0[p][i][j] - g0[k][j][p] * g0[p][i][k];
                    }
                }
                r += ric;
            }
        }
        r / g(x)
    }

    #[test]
    fn neck_metric_factor() {
        let m = metric_at(&presets::schwarzschild(1.0), &Vec3::new(0.5, 0.0, 0.0)).unwrap();
        assert_eq!(m.factor, 16.0);
        assert_eq!(m.tensor, Mat3::identity() * 16.0);
    }

    #[test]
    fn kappa_estimate_outside_unit_neighborhood() {
        // Outside rho = 1 the areal radius is at least 9/4, and |K| <= 2m / r^3.
        let k = estimate_kappa(&presets::schwarzschild(1.0), 400, 3).unwrap();
        assert!(k > 0.0 && k <= 2.0 / 2.25f64.powi(3) * (1.0 + 1e-6), "{k}");
    }

    #[test]
    fn christoffels_are_symmetric() {
        let c = curvature_at(&generic(), &Vec3::new(0.3, 0.4, -0.1)).unwrap();
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(c.christoffels[k][i][j], c.christoffels[k][j][i]);
                }
            }
        }
    }

    #[test]
    fn scalar_curvature_matches_finite_difference_oracle() {
        let holes = generic();
        for x in [Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.5, 0.3, 0.2), Vec3::new(-1.0, 0.5, 2.0)] {
            let c = curvature_at(&holes, &x).unwrap();
            let (a, b) = (fd_scalar(&holes, &x, 2e-3), fd_scalar(&holes, &x, 1e-3));
            let rich = (4.0 * b - a) / 3.0;
            assert!(
                (rich - c.scalar_curvature).abs() < 1e-6 * c.scalar_curvature.abs().max(1e-3),
                "{x:?}: fd {rich} analytic {}",
                c.scalar_curvature
            );
            assert!((c.scalar_curvature - 2.0 * c.e_norm_sq).abs() < 1e-8 * c.scalar_curvature);
        }
    }

    #[test]
    fn coordinate_sectionals_sum_to_half_scalar() {
        let c = curvature_at(&generic(), &Vec3::new(0.2, -0.7, 0.4)).unwrap();
        let s: f64 = c.coordinate_sectional.iter().sum();
        assert!((s - 0.5 * c.scalar_curvature).abs() < 1e-12 * c.scalar_curvature.abs().max(1.0));
        assert!(c.sectional_range[0] <= c.sectional_range[1]);
    }

    #[test]
    fn zero_charge_is_scalar_flat() {
        let holes = presets::symmetric_pair(1.0, 0.3, 0.3);
        let c = curvature_at(&holes, &Vec3::new(0.1, 0.2, 0.05)).unwrap();
        assert!(c.scalar_curvature.abs() < 1e-10);
        let rep = verify_constraints(&holes, 200, 3, 1e-6);
        assert!(rep.pass, "{} {}", rep.max_residual, rep.max_divergence_residual);
    }

    #[test]
    fn far_field_curvature_vanishes() {
        let c = curvature_at(&generic(), &Vec3::new(1e4, 0.0, 0.0)).unwrap();
        assert!(c.scalar_curvature.abs() < 1e-12 && c.sectional_range[1].abs() < 1e-10);
    }

    #[test]
    fn points_at_holes_are_excluded() {
        let holes = generic();
        let rep = verify_constraints_at(&holes, &[Vec3::zeros(), Vec3::new(0.5, 0.5, 0.5)], 1e-6);
        assert_eq!((rep.samples, rep.excluded), (1, 1));
        assert!(rep.pass);
    }
}
