//! The area-growth function e^{2 sqrt(kappa) s} s^-2 Area(B_s(x0) cap Sigma)
//! on a surface, with g-balls approximated from inside by the sets reached by
//! meridians of g-length below s.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::horizon::constants::Constants;
use crate::manifold::HoleSet;
use crate::surface::{unit, SurfaceModel};
use crate::{Mat3, Vec3};

/// Polar chart of a surface about x0 = point(0, .).
pub trait CapChart: Sync {
    fn point(&self, theta: f64, phi: f64) -> Vec3;
    /// Upper end of the polar parameter.
    fn theta_max(&self) -> f64;
}

/// Radial surface in polar coordinates about the direction of x0.
pub struct SphereChart<'a> {
    pub model: &'a SurfaceModel,
    pub frame: Mat3,
}

impl<'a> SphereChart<'a> {
    pub fn new(model: &'a SurfaceModel, x0_direction: &Vec3) -> Self {
        let e3 = x0_direction.normalize();
        let trial = if e3.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
        let e1 = (trial - e3 * e3.dot(&trial)).normalize();
        let e2 = e3.cross(&e1);
        SphereChart { model, frame: Mat3::from_columns(&[e1, e2, e3]) }
    }
}

impl CapChart for SphereChart<'_> {
    fn point(&self, theta: f64, phi: f64) -> Vec3 {
        self.model.point(&(self.frame * unit(theta, phi)))
    }

    fn theta_max(&self) -> f64 {
        std::f64::consts::PI
    }
}

/// Flat plane through `origin` spanned by orthonormal `u`, `v`.
pub struct PlaneChart {
    pub origin: Vec3,
    pub u: Vec3,
    pub v: Vec3,
    pub extent: f64,
}

impl CapChart for PlaneChart {
    fn point(&self, t: f64, phi: f64) -> Vec3 {
        self.origin + (self.u * phi.cos() + self.v * phi.sin()) * t
    }

    fn theta_max(&self) -> f64 {
        self.extent
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicitySample {
    pub s: f64,
    pub area: f64,
    pub value: f64,
    pub floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub x0: [f64; 3],
    pub kappa: f64,
    pub s_max: f64,
    pub tolerance: f64,
    pub samples: Vec<MonotonicitySample>,
    /// Largest relative decrease between consecutive samples.
    pub worst_drop: f64,
    pub non_decreasing: bool,
    pub floor_holds: bool,
    pub pass: bool,
}

const MERIDIANS: usize = 48;
const NODES: usize = 2400;

struct Meridian {
    length: Vec<f64>,
    area: Vec<f64>,
}

fn meridian(holes: &HoleSet, chart: &dyn CapChart, phi: f64, theta_cap: f64, dphi: f64) -> Meridian {
    // Geometric nodes resolve the cap from 1e-5 of the range upward.
    let mut theta = vec![0.0];
    let lo = 1e-5 * theta_cap;
    for n in 0..NODES {
        theta.push(lo * (theta_cap / lo).powf(n as f64 / (NODES - 1) as f64));
    }
    let density = |t: f64| -> (f64, f64) {
        let h = 1e-6 * t.max(lo);
        let x = chart.point(t, phi);
        let xt = (chart.point(t + h, phi) - chart.point((t - h).max(0.0), phi)) / (h + h.min(t));
        let hp = 1e-6;
        let xp = (chart.point(t, phi + hp) - chart.point(t, phi - hp)) / (2.0 * hp);
        let psi = holes.factor(&x);
        (psi * xt.norm(), psi * psi * xt.cross(&xp).norm() * dphi)
    };
    let mut length = vec![0.0];
    let mut area = vec![0.0];
    let mut prev = density(0.0);
    for w in theta.windows(2) {
        let cur = density(w[1]);
        let h = w[1] - w[0];
        length.push(length.last().unwrap() + 0.5 * h * (prev.0 + cur.0));
        area.push(area.last().unwrap() + 0.5 * h * (prev.1 + cur.1));
        prev = cur;
    }
    Meridian { length, area }
}

fn area_within(m: &Meridian, s: f64) -> f64 {
    let i = m.length.partition_point(|l| *l < s);
    if i == 0 {
        return 0.0;
    }
    if i >= m.length.len() {
        return *m.area.last().unwrap();
    }
    let t = (s - m.length[i - 1]) / (m.length[i] - m.length[i - 1]);
    m.area[i - 1] + t * (m.area[i] - m.area[i - 1])
}

/// Sample the growth function on a log grid of s in [s_max / 100, s_max].
pub fn monotonicity_profile(
    holes: &HoleSet,
    chart: &dyn CapChart,
    kappa: f64,
    s_max: f64,
    tolerance: f64,
) -> Result<MonotonicityReport> {
    let dphi = 2.0 * std::f64::consts::PI / MERIDIANS as f64;
    let phis: Vec<f64> = (0..MERIDIANS).map(|k| k as f64 * dphi).collect();
    let meridians = crate::par::map(&phis, |&phi| meridian(holes, chart, phi, chart.theta_max(), dphi));
    // Meridian balls stop being caps once s reaches the shortest full meridian.
    let reach = meridians.iter().map(|m| *m.length.last().unwrap()).fold(f64::INFINITY, f64::min);
    let s_max = s_max.min(0.95 * reach);
    if !(s_max > 0.0) || !s_max.is_finite() {
        return Err(Error::RangeEmpty);
    }
    let sk = kappa.max(0.0).sqrt();
    let count = 40;
    let mut samples = Vec::with_capacity(count);
    for i in 0..count {
        let s = s_max * 100f64.powf(i as f64 / (count - 1) as f64 - 1.0);
        let area: f64 = meridians.iter().map(|m| area_within(m, s)).sum();
        samples.push(MonotonicitySample {
            s,
            area,
            value: (2.0 * sk * s).exp() * area / (s * s),
            floor: std::f64::consts::PI * (-2.0 * sk * s).exp() * s * s,
        });
    }
    let worst_drop = samples
        .windows(2)
        .map(|w| (w[0].value - w[1].value) / w[0].value)
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0);
    let non_decreasing = worst_drop <= tolerance;
    let floor_holds = samples.iter().all(|s| s.area >= s.floor * (1.0 - tolerance));
    Ok(MonotonicityReport {
        x0: chart.point(0.0, 0.0).into(),
        kappa,
        s_max,
        tolerance,
        samples,
        worst_drop,
        non_decreasing,
        floor_holds,
        pass: non_decreasing && floor_holds,
    })
}

/// Growth-function check on a closed radial surface at the point in direction
/// `x0_direction` from its center, for s up to min(i0, 1/sqrt(kappa)).
pub fn monotonicity_check(
    holes: &HoleSet,
    model: &SurfaceModel,
    x0_direction: &Vec3,
    constants: &Constants,
    tolerance: f64,
) -> Result<MonotonicityReport> {
    let s_max = constants.i0.min(1.0 / constants.kappa.sqrt());
    monotonicity_profile(holes, &SphereChart::new(model, x0_direction), constants.kappa, s_max, tolerance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::horizon::finder::{find_horizon, HorizonOptions};
    use crate::manifold::{presets, Hole};

    #[test]
    fn flat_plane_gives_pi() {
        let holes = HoleSet::new(vec![Hole::new([1e9, 0.0, 0.0], 1e-9, 1e-9)], true).unwrap();
        let chart = PlaneChart { origin: Vec3::zeros(), u: Vec3::x(), v: Vec3::y(), extent: 2.0 };
        let r = monotonicity_profile(&holes, &chart, 0.0, 1.0, 1e-3).unwrap();
        for s in &r.samples {
            assert!((s.value - std::f64::consts::PI).abs() < 1e-4, "{s:?}");
        }
        assert!(r.pass);
    }

    #[test]
    fn schwarzschild_caps_match_round_sphere() {
        let holes = presets::schwarzschild(1.0);
        let h = find_horizon(&holes, &Vec3::zeros(), 2.0, &HorizonOptions::default()).unwrap();
        let c = Constants::default();
        let r = monotonicity_check(&holes, &h.model, &Vec3::new(0.3, -0.4, 0.8), &c, 1e-3).unwrap();
        assert!(r.pass, "{r:?}");
        for s in &r.samples {
            // Round sphere of g-radius 2.
            let exact = 2.0 * std::f64::consts::PI * 4.0 * (1.0 - (s.s / 2.0).cos());
            assert!((s.area / exact - 1.0).abs() < 1e-4, "{} vs {exact}", s.area);
        }
    }

    #[test]
    fn empty_range_rejected() {
        let holes = presets::schwarzschild(1.0);
        let chart = PlaneChart { origin: Vec3::new(5.0, 0.0, 0.0), u: Vec3::y(), v: Vec3::z(), extent: 1.0 };
        assert!(matches!(monotonicity_profile(&holes, &chart, 1.0, 0.0, 1e-3), Err(Error::RangeEmpty)));
    }
}
