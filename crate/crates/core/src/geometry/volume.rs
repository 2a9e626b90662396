//! g-volumes of balls with balls removed.
//!
//! Each excluded ball centred on a hole is wrapped in a spherical shell that
//! is integrated with a deterministic product rule (Gauss-Legendre in ln rho
//! and mu, uniform in phi); this absorbs the steep growth of Psi^3 near the
//! hole. The remaining region is covered with randomized Halton points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::HoleSet;
use crate::numeric::{gauss_legendre, gauss_legendre_on};
use crate::qmc::ShiftedSequence;
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    #[serde(rename = "c")]
    pub center: [f64; 3],
    #[serde(rename = "r")]
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec3, radius: f64) -> Self {
        Ball { center: center.into(), radius }
    }

    pub fn c(&self) -> Vec3 {
        Vec3::from(self.center)
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        (x - self.c()).norm_squared() < self.radius * self.radius
    }

    pub fn flat_volume(&self) -> f64 {
        4.0 / 3.0 * std::f64::consts::PI * self.radius.powi(3)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub outer: Ball,
    #[serde(default)]
    pub excluded: Vec<Ball>,
}

impl Region {
    pub fn contains(&self, x: &Vec3) -> bool {
        self.outer.contains(x) && !self.excluded.iter().any(|b| b.contains(x))
    }

    /// Broken invariants: overlapping excluded balls, or balls poking out of
    /// the outer ball.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, b) in self.excluded.iter().enumerate() {
            if (b.c() - self.outer.c()).norm() + b.radius > self.outer.radius {
                out.push(format!("excluded ball {i} not contained in outer ball"));
            }
            for (j, c) in self.excluded.iter().enumerate().skip(i + 1) {
                if (b.c() - c.c()).norm() < b.radius + c.radius {
                    out.push(format!("excluded balls {i} and {j} overlap"));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeBudget {
    pub points: usize,
    pub replicates: usize,
    pub seed: u64,
}

impl Default for VolumeBudget {
    fn default() -> Self {
        VolumeBudget { points: 1_000_000, replicates: 8, seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolumeEstimate {
    pub volume: f64,
    /// One-sigma error.
    pub error: f64,
    /// Euclidean volume of the same region, from the same points and shells.
    pub flat_volume: f64,
    pub flat_error: f64,
    pub shells: usize,
}

/// Integral of `f` over the shell a <= |x - c| <= b with a product rule.
/// Returns the value and a coarse-versus-fine error estimate.
pub fn shell_integral(center: &Vec3, a: f64, b: f64, f: &(dyn Fn(&Vec3) -> f64 + Sync)) -> (f64, f64) {
    let fine = shell_rule(center, a, b, f, 24, 48, 0.5, 8);
    let coarse = shell_rule(center, a, b, f, 12, 24, 1.0, 8);
    (fine, (fine - coarse).abs())
}

fn shell_rule(
    center: &Vec3,
    a: f64,
    b: f64,
    f: &(dyn Fn(&Vec3) -> f64 + Sync),
    n_mu: usize,
    n_phi: usize,
    panel: f64,
    order: usize,
) -> f64 {
    let (mu, wmu) = gauss_legendre(n_mu);
    let dphi = 2.0 * std::f64::consts::PI / n_phi as f64;
    let dirs: Vec<(Vec3, f64)> = mu
        .iter()
        .zip(&wmu)
        .flat_map(|(&m, &w)| {
            let s = (1.0 - m * m).sqrt();
            (0..n_phi).map(move |k| {
                let p = (k as f64 + 0.5) * dphi;
                (Vec3::new(s * p.cos(), s * p.sin(), m), w * dphi)
            })
        })
        .collect();
    let sphere_mean = |rho: f64| -> f64 { dirs.iter().map(|(d, w)| w * f(&(center + d * rho))).sum() };
    let mut total = 0.0;
    if a > 0.0 {
        let (la, lb) = (a.ln(), b.ln());
        let panels = ((lb - la) / panel).ceil().max(1.0) as usize;
        let h = (lb - la) / panels as f64;
        for p in 0..panels {
            let (t, w) = gauss_legendre_on(order, la + p as f64 * h, la + (p + 1) as f64 * h);
            for (ti, wi) in t.iter().zip(&w) {
                let rho = ti.exp();
                total += wi * rho.powi(3) * sphere_mean(rho);
            }
        }
    } else {
        let panels = 4;
        let h = b / panels as f64;
        for p in 0..panels {
            let (r, w) = gauss_legendre_on(order, p as f64 * h, (p + 1) as f64 * h);
            for (ri, wi) in r.iter().zip(&w) {
                total += wi * ri * ri * sphere_mean(*ri);
            }
        }
    }
    total
}

/// g-volume of the shell a <= |x - c| <= b.
pub fn shell_volume(holes: &HoleSet, center: &Vec3, a: f64, b: f64) -> (f64, f64) {
    shell_integral(center, a, b, &|x| holes.factor(x).powi(3))
}

struct Shell {
    center: Vec3,
    inner: f64,
    outer: f64,
}

/// Quasi-Monte Carlo g-volume of a region with per-hole shell stratification.
pub fn region_volume(holes: &HoleSet, region: &Region, budget: &VolumeBudget) -> Result<VolumeEstimate> {
    let oc = region.outer.c();
    let orad = region.outer.radius;
    if !(orad > 0.0) {
        return Err(Error::NonPositiveInput { name: "outer radius", value: orad });
    }
    if region.excluded.iter().any(|b| (b.c() - oc).norm() + orad <= b.radius) {
        return Err(Error::EmptyRegion);
    }
    let mut shells = Vec::new();
    for (i, h) in holes.holes().iter().enumerate() {
        if (h.position - oc).norm() >= orad {
            continue;
        }
        let Some(cover) = region.excluded.iter().find(|b| b.contains(&h.position)) else {
            return Err(Error::UnboundedVolume { hole: i });
        };
        if (cover.c() - h.position).norm() > 1e-12 * cover.radius {
            continue;
        }
        let a = cover.radius;
        let mut b = 4.0 * a + 20.0 * h.weight();
        b = b.min(orad - (h.position - oc).norm());
        for e in &region.excluded {
            if e != cover {
                b = b.min((e.c() - h.position).norm() - e.radius);
            }
        }
        for (j, o) in holes.holes().iter().enumerate() {
            if j != i {
                b = b.min(0.5 * (o.position - h.position).norm());
            }
        }
        if b > 1.01 * a {
            shells.push(Shell { center: h.position, inner: a, outer: b });
        }
    }
    let in_shell = |x: &Vec3| {
        shells.iter().any(|s| {
            let d2 = (x - s.center).norm_squared();
            d2 >= s.inner * s.inner && d2 <= s.outer * s.outer
        })
    };
    let replicates = ShiftedSequence::replicates(budget.seed, budget.replicates.max(2));
    let per = (budget.points / replicates.len()).max(1) as u64;
    let cube = (2.0 * orad).powi(3);
    let sums = crate::par::map(&replicates, |seq| {
        let (mut sg, mut sd, mut hits) = (0.0, 0.0, 0u64);
        for n in 0..per {
            let u = seq.point(n);
            let x = oc + Vec3::new(2.0 * u[0] - 1.0, 2.0 * u[1] - 1.0, 2.0 * u[2] - 1.0) * orad;
            if region.contains(&x) && !in_shell(&x) {
                sg += holes.factor(&x).powi(3);
                sd += 1.0;
                hits += 1;
            }
        }
        (cube * sg / per as f64, cube * sd / per as f64, hits)
    });
    let hits: u64 = sums.iter().map(|s| s.2).sum();
    if hits == 0 && shells.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let stats = |vals: Vec<f64>| {
        let k = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / k;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
        (mean, (var / k).sqrt())
    };
    let (mut vol, e1) = stats(sums.iter().map(|s| s.0).collect());
    let (mut flat, e2) = stats(sums.iter().map(|s| s.1).collect());
    let mut err2 = e1 * e1;
    for s in &shells {
        let (v, e) = shell_volume(holes, &s.center, s.inner, s.outer);
        vol += v;
        err2 += e * e;
        flat += 4.0 / 3.0 * std::f64::consts::PI * (s.outer.powi(3) - s.inner.powi(3));
    }
    Ok(VolumeEstimate { volume: vol, error: err2.sqrt(), flat_volume: flat, flat_error: e2, shells: shells.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{presets, Hole};
    use std::f64::consts::PI;

    fn radial_oracle(a: f64, b: f64) -> f64 {
        // Composite Simpson on the Schwarzschild m = 1 integrand.
        let n = 20_000;
        let h = (b - a) / n as f64;
        let f = |r: f64| 4.0 * PI * (1.0 + 0.5 / r).powi(6) * r * r;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn schwarzschild_shell_matches_radial_quadrature() {
        let region = Region { outer: Ball::new(Vec3::zeros(), 2.0), excluded: vec![Ball::new(Vec3::zeros(), 1.0)] };
        let v = region_volume(&presets::schwarzschild(1.0), &region, &VolumeBudget::default()).unwrap();
        let oracle = radial_oracle(1.0, 2.0);
        assert!((v.volume - oracle).abs() <= 1e-9 * oracle + v.error, "{} vs {oracle}", v.volume);
    }

    #[test]
    fn off_center_ball_uses_sampling() {
        let holes = presets::schwarzschild(1.0);
        let region = Region {
            outer: Ball::new(Vec3::new(1.0, 0.0, 0.0), 1.5),
            excluded: vec![Ball::new(Vec3::zeros(), 0.3)],
        };
        let v = region_volume(&holes, &region, &VolumeBudget { points: 400_000, ..Default::default() }).unwrap();
        assert!(v.volume > v.flat_volume);
        let flat_exact = 4.0 / 3.0 * PI * (1.5f64.powi(3) - 0.3f64.powi(3));
        assert!((v.flat_volume - flat_exact).abs() < 5.0 * v.flat_error + 1e-3 * flat_exact);
        assert!(v.error < 1e-2 * v.volume);
    }

    #[test]
    fn far_field_ball() {
        let holes = HoleSet::new(vec![Hole::new([100.0, 0.0, 0.0], 1e-9, 1e-9)], true).unwrap();
        let region = Region { outer: Ball::new(Vec3::zeros(), 1.0), excluded: vec![] };
        let v = region_volume(&holes, &region, &VolumeBudget { points: 200_000, ..Default::default() }).unwrap();
        assert!((v.volume - 4.0 * PI / 3.0).abs() < 5.0 * v.error + 1e-3);
    }

    #[test]
    fn uncovered_hole_and_empty_region() {
        let holes = presets::small_pair();
        let region = Region { outer: Ball::new(Vec3::zeros(), 5.0), excluded: vec![] };
        assert!(matches!(region_volume(&holes, &region, &VolumeBudget::default()), Err(Error::UnboundedVolume { hole: 0 })));
        let covered = Region { outer: Ball::new(Vec3::zeros(), 1.0), excluded: vec![Ball::new(Vec3::zeros(), 2.0)] };
        assert!(matches!(region_volume(&holes, &covered, &VolumeBudget::default()), Err(Error::EmptyRegion)));
    }

    #[test]
    fn region_json_literal() {
        let r: Region = serde_json::from_str(r#"{"outer":{"c":[0,0,0],"r":10},"excluded":[{"c":[2,0,0],"r":0.004}]}"#).unwrap();
        assert_eq!(r.excluded[0].radius, 0.004);
        assert!(r.violations().is_empty());
    }
}
