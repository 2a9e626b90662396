use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::curvature::curvature_at;
use crate::manifold::HoleSet;
use crate::surface::SphereGrid;
use crate::Vec3;

/// Which separation condition admitted the scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScaleBranch {
    /// sigma_i > 5c: the annulus sees only hole i.
    Inner,
    /// sigma_i_out < c/5: the annulus sits outside every hole.
    Outer,
    /// n = 1, no other hole to separate from.
    Single,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnulusSample {
    pub u: [f64; 3],
    pub factor: f64,
}

/// Pullback of g under u -> p_i + c u, rescaled by c^-2, on 1/4 <= |u| <= 4.
/// Its conformal factor at u is Psi(p_i + c u).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnulusMetric {
    pub hole: usize,
    pub scale: f64,
    pub branch: ScaleBranch,
    pub samples: Vec<AnnulusSample>,
    /// Min and max of factor^2 over the samples.
    pub k1: f64,
    pub k2: f64,
    pub min_factor: f64,
    /// Max |sectional curvature| of the rescaled metric over the samples.
    pub kappa_est: f64,
}

impl AnnulusMetric {
    pub fn dominates_flat(&self) -> bool {
        self.min_factor >= 1.0
    }
}

pub const INNER: f64 = 0.25;
pub const OUTER: f64 = 4.0;

/// Sample points u in the shell lo <= |u| <= hi, log-spaced in radius.
pub fn shell_points(lo: f64, hi: f64, radii: usize, n_theta: usize) -> Vec<Vec3> {
    let grid = SphereGrid::new(n_theta, 2 * n_theta).expect("static grid");
    let mut out = Vec::new();
    for a in 0..radii {
        let t = a as f64 / (radii - 1) as f64;
        let r = lo * (hi / lo).powf(t);
        for j in 0..grid.n_theta {
            for k in 0..grid.n_phi {
                out.push(grid.direction(j, k) * r);
            }
        }
    }
    out
}

pub fn annulus_pullback(holes: &HoleSet, i: usize, c: f64) -> Result<AnnulusMetric> {
    let p = holes.hole(i)?.position;
    if !(c > 0.0) {
        return Err(Error::NonPositiveInput { name: "c", value: c });
    }
    let branch = match holes.len() {
        1 => ScaleBranch::Single,
        _ => {
            let mut lo = f64::INFINITY;
            let mut hi = 0.0f64;
            for (j, h) in holes.holes().iter().enumerate() {
                if j != i {
                    let r = (h.position - p).norm();
                    lo = lo.min(r);
                    hi = hi.max(r);
                }
            }
            if lo > 5.0 * c {
                ScaleBranch::Inner
            } else if hi < c / 5.0 {
                ScaleBranch::Outer
            } else {
                return Err(Error::ScaleViolatesSeparation { c, sigma_i: lo, sigma_i_out: hi });
            }
        }
    };
    let points = shell_points(INNER, OUTER, 12, 8);
    let rows = crate::par::map(&points, |u| {
        let x = p + u * c;
        let factor = holes.factor(&x);
        let k = curvature_at(holes, &x).map(|s| s.sectional_range[0].abs().max(s.sectional_range[1].abs()));
        (AnnulusSample { u: (*u).into(), factor }, k)
    });
    let mut samples = Vec::with_capacity(rows.len());
    let mut kappa = 0.0f64;
    for (s, k) in rows {
        kappa = kappa.max(k?);
        samples.push(s);
    }
    let k1 = samples.iter().map(|s| s.factor * s.factor).fold(f64::INFINITY, f64::min);
    let k2 = samples.iter().map(|s| s.factor * s.factor).fold(0.0, f64::max);
    let min_factor = samples.iter().map(|s| s.factor).fold(f64::INFINITY, f64::min);
    Ok(AnnulusMetric { hole: i, scale: c, branch, samples, k1, k2, min_factor, kappa_est: c * c * kappa })
}
