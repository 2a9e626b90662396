//! Radial graphs over a latitude-longitude grid and the real spherical
//! harmonic transform used to differentiate them.
//!
//! Grid latitudes sit at theta_j = (j + 1/2) pi / n_theta, so no node lies on a
//! pole; longitudes are phi_k = 2 pi k / n_phi. Integrals over the sphere use
//! Fejer weights in mu = cos(theta) times the uniform rule in phi, which is
//! exact for band-limited integrands of degree below n_theta.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::fejer_weights;
use crate::Vec3;

#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    /// Fejer weight times 2 pi / n_phi for each latitude.
    pub weights: Vec<f64>,
}

impl SphereGrid {
    pub const MIN_THETA: usize = 8;

    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < Self::MIN_THETA || n_phi < 2 * Self::MIN_THETA || !n_phi.is_multiple_of(2) {
            return Err(Error::DegenerateGrid(format!(
                "grid {n_theta}x{n_phi} below the minimum {}x{} (n_phi even)",
                Self::MIN_THETA,
                2 * Self::MIN_THETA
            )));
        }
        let theta = (0..n_theta).map(|j| (j as f64 + 0.5) * PI / n_theta as f64).collect();
        let phi = (0..n_phi).map(|k| 2.0 * PI * k as f64 / n_phi as f64).collect();
        let dphi = 2.0 * PI / n_phi as f64;
        let weights = fejer_weights(n_theta).into_iter().map(|w| w * dphi).collect();
        Ok(SphereGrid { n_theta, n_phi, theta, phi, weights })
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest degree whose products are integrated exactly by the grid.
    pub fn max_degree(&self) -> usize {
        ((self.n_theta - 1) / 2).min(self.n_phi / 2 - 1)
    }

    pub fn direction(&self, j: usize, k: usize) -> Vec3 {
        unit(self.theta[j], self.phi[k])
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        let mut total = 0.0;
        for j in 0..self.n_theta {
            let row: f64 = values[j * self.n_phi..(j + 1) * self.n_phi].iter().sum();
            total += self.weights[j] * row;
        }
        total
    }
}

pub fn unit(theta: f64, phi: f64) -> Vec3 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vec3::new(st * cp, st * sp, ct)
}

/// Polar angles of a nonzero vector.
pub fn angles(v: &Vec3) -> (f64, f64) {
    let r = v.norm();
    let theta = (v.z / r).clamp(-1.0, 1.0).acos();
    let mut phi = v.y.atan2(v.x);
    if phi < 0.0 {
        phi += 2.0 * PI;
    }
    (theta, phi)
}

#[inline]
fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Index of the real harmonic (l, m), with m < 0 denoting the sine family.
#[inline]
pub fn sh_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

pub fn sh_count(lmax: usize) -> usize {
    (lmax + 1) * (lmax + 1)
}

/// Orthonormal associated Legendre values and theta-derivatives for all
/// 0 <= m <= l <= lmax, stored at index l(l+1)/2 + m.
pub fn legendre_table(lmax: usize, theta: f64) -> (Vec<f64>, Vec<f64>) {
    let n = tri(lmax, lmax) + 1;
    let mut p = vec![0.0; n];
    let mut dp = vec![0.0; n];
    let (s, c) = theta.sin_cos();
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            pmm *= ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * s;
        }
        p[tri(m, m)] = pmm;
        if m < lmax {
            p[tri(m + 1, m)] = ((2 * m + 3) as f64).sqrt() * c * pmm;
        }
        for l in m + 2..=lmax {
            let lf = l as f64;
            let mf = m as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            p[tri(l, m)] = a * (c * p[tri(l - 1, m)] - b * p[tri(l - 2, m)]);
        }
    }
    for l in 0..=lmax {
        for m in 0..=l {
            let lf = l as f64;
            let mf = m as f64;
            let prev = if l > m {
                ((2.0 * lf + 1.0) * (lf * lf - mf * mf) / (2.0 * lf - 1.0)).sqrt() * p[tri(l - 1, m)]
            } else {
                0.0
            };
            dp[tri(l, m)] = (lf * c * p[tri(l, m)] - prev) / s;
        }
    }
    (p, dp)
}

/// Evaluate a real harmonic expansion at one direction.
pub fn sh_eval(coeffs: &[f64], lmax: usize, theta: f64, phi: f64) -> f64 {
    let (p, _) = legendre_table(lmax, theta);
    let mut total = 0.0;
    for m in 0..=lmax {
        let (sm, cm) = (m as f64 * phi).sin_cos();
        for l in m..=lmax {
            let pl = p[tri(l, m)];
            if m == 0 {
                total += coeffs[sh_index(l, 0)] * pl;
            } else {
                let s2 = std::f64::consts::SQRT_2 * pl;
                total += s2 * (coeffs[sh_index(l, m as i64)] * cm + coeffs[sh_index(l, -(m as i64))] * sm);
            }
        }
    }
    total
}

/// A field and its first and second angular derivatives on the grid.
#[derive(Debug, Clone)]
pub struct AngularJet {
    pub v: Vec<f64>,
    pub v_t: Vec<f64>,
    pub v_p: Vec<f64>,
    pub v_tt: Vec<f64>,
    pub v_tp: Vec<f64>,
    pub v_pp: Vec<f64>,
}

/// Precomputed tables for analysis and synthesis on one grid.
#[derive(Debug, Clone)]
pub struct Harmonics {
    pub lmax: usize,
    pub grid: SphereGrid,
    p: Vec<Vec<f64>>,
    dp: Vec<Vec<f64>>,
    d2p: Vec<Vec<f64>>,
    cos_tab: Vec<Vec<f64>>,
    sin_tab: Vec<Vec<f64>>,
}

impl Harmonics {
    pub fn new(grid: SphereGrid, lmax: usize) -> Result<Self> {
        if lmax > grid.max_degree() {
            return Err(Error::DegenerateGrid(format!(
                "degree {lmax} exceeds grid limit {}",
                grid.max_degree()
            )));
        }
        let mut p = Vec::with_capacity(grid.n_theta);
        let mut dp = Vec::with_capacity(grid.n_theta);
        let mut d2p = Vec::with_capacity(grid.n_theta);
        for &t in &grid.theta {
            let (pt, dpt) = legendre_table(lmax, t);
            let (s, c) = t.sin_cos();
            let mut d2 = vec![0.0; pt.len()];
            for l in 0..=lmax {
                for m in 0..=l {
                    let i = tri(l, m);
                    let ll = (l * (l + 1)) as f64;
                    let mm = (m * m) as f64;
                    d2[i] = -c / s * dpt[i] - (ll - mm / (s * s)) * pt[i];
                }
            }
            p.push(pt);
            dp.push(dpt);
            d2p.push(d2);
        }
        let cos_tab = (0..=lmax)
            .map(|m| grid.phi.iter().map(|f| (m as f64 * f).cos()).collect())
            .collect();
        let sin_tab = (0..=lmax)
            .map(|m| grid.phi.iter().map(|f| (m as f64 * f).sin()).collect())
            .collect();
        Ok(Harmonics { lmax, grid, p, dp, d2p, cos_tab, sin_tab })
    }

    pub fn count(&self) -> usize {
        sh_count(self.lmax)
    }

    /// Project grid values onto the harmonics up to `lmax`.
    pub fn analyze(&self, values: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let mut out = vec![0.0; self.count()];
        for j in 0..g.n_theta {
            let row = &values[j * g.n_phi..(j + 1) * g.n_phi];
            let w = g.weights[j];
            for m in 0..=self.lmax {
                let a: f64 = row.iter().zip(&self.cos_tab[m]).map(|(v, c)| v * c).sum();
                let b: f64 = if m == 0 {
                    0.0
                } else {
                    row.iter().zip(&self.sin_tab[m]).map(|(v, s)| v * s).sum()
                };
                for l in m..=self.lmax {
                    let pl = self.p[j][tri(l, m)] * w;
                    if m == 0 {
                        out[sh_index(l, 0)] += pl * a;
                    } else {
                        let s2 = std::f64::consts::SQRT_2 * pl;
                        out[sh_index(l, m as i64)] += s2 * a;
                        out[sh_index(l, -(m as i64))] += s2 * b;
                    }
                }
            }
        }
        out
    }

    /// Values only.
    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        self.synthesize_jet(coeffs, false).v
    }

    /// Values and derivatives up to second order in (theta, phi).
    pub fn synthesize_jet(&self, coeffs: &[f64], derivatives: bool) -> AngularJet {
        let g = &self.grid;
        let n = g.len();
        let mut jet = AngularJet {
            v: vec![0.0; n],
            v_t: vec![0.0; if derivatives { n } else { 0 }],
            v_p: vec![0.0; if derivatives { n } else { 0 }],
            v_tt: vec![0.0; if derivatives { n } else { 0 }],
            v_tp: vec![0.0; if derivatives { n } else { 0 }],
            v_pp: vec![0.0; if derivatives { n } else { 0 }],
        };
        for j in 0..g.n_theta {
            for m in 0..=self.lmax {
                let (mut a, mut b, mut at, mut bt, mut att, mut btt) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
                let scale = if m == 0 { 1.0 } else { std::f64::consts::SQRT_2 };
                for l in m..=self.lmax {
                    let i = tri(l, m);
                    let ca = coeffs[sh_index(l, m as i64)] * scale;
                    let cb = if m == 0 { 0.0 } else { coeffs[sh_index(l, -(m as i64))] * scale };
                    a += ca * self.p[j][i];
                    b += cb * self.p[j][i];
                    if derivatives {
                        at += ca * self.dp[j][i];
                        bt += cb * self.dp[j][i];
                        att += ca * self.d2p[j][i];
                        btt += cb * self.d2p[j][i];
                    }
                }
                let mf = m as f64;
                for k in 0..g.n_phi {
                    let idx = j * g.n_phi + k;
                    let (c, s) = (self.cos_tab[m][k], self.sin_tab[m][k]);
                    jet.v[idx] += a * c + b * s;
                    if derivatives {
                        jet.v_p[idx] += mf * (b * c - a * s);
                        jet.v_pp[idx] -= mf * mf * (a * c + b * s);
                        jet.v_t[idx] += at * c + bt * s;
                        jet.v_tt[idx] += att * c + btt * s;
                        jet.v_tp[idx] += mf * (bt * c - at * s);
                    }
                }
            }
        }
        jet
    }
}

/// Closed surface r(theta, phi) about `center`, sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialSurface {
    pub center: [f64; 3],
    pub n_theta: usize,
    pub n_phi: usize,
    /// Row-major by latitude: r[j * n_phi + k].
    pub r: Vec<f64>,
}

/// Embedded geometry of a radial surface at its grid nodes.
#[derive(Debug, Clone)]
pub struct SurfaceGeometry {
    pub center: Vec3,
    pub points: Vec<Vec3>,
    /// points - center, kept separately so evaluations near a small surface
    /// far from the origin do not lose digits.
    pub offsets: Vec<Vec3>,
    pub normals: Vec<Vec3>,
    /// Euclidean mean curvature, +2/r on a round sphere.
    pub mean_curvature: Vec<f64>,
    /// |X_theta x X_phi| / sin(theta), to be paired with the mu-weights.
    pub area_density: Vec<f64>,
}

impl RadialSurface {
    pub fn new(center: Vec3, n_theta: usize, n_phi: usize, r: Vec<f64>) -> Result<Self> {
        SphereGrid::new(n_theta, n_phi)?;
        if r.len() != n_theta * n_phi {
            return Err(Error::DegenerateGrid(format!(
                "expected {} radii, got {}",
                n_theta * n_phi,
                r.len()
            )));
        }
        if let Some(bad) = r.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::DegenerateGrid(format!("radius {bad} is not positive")));
        }
        Ok(RadialSurface { center: center.into(), n_theta, n_phi, r })
    }

    pub fn sphere(center: Vec3, radius: f64, n_theta: usize, n_phi: usize) -> Result<Self> {
        Self::new(center, n_theta, n_phi, vec![radius; n_theta * n_phi])
    }

    /// Sample `f(direction)` at every grid node.
    pub fn from_fn(center: Vec3, n_theta: usize, n_phi: usize, f: impl Fn(Vec3) -> f64) -> Result<Self> {
        let grid = SphereGrid::new(n_theta, n_phi)?;
        let mut r = Vec::with_capacity(grid.len());
        for j in 0..n_theta {
            for k in 0..n_phi {
                r.push(f(grid.direction(j, k)));
            }
        }
        Self::new(center, n_theta, n_phi, r)
    }

    pub fn center(&self) -> Vec3 {
        Vec3::from(self.center)
    }

    pub fn grid(&self) -> SphereGrid {
        SphereGrid::new(self.n_theta, self.n_phi).expect("validated at construction")
    }

    pub fn point(&self, j: usize, k: usize) -> Vec3 {
        let g = self.grid();
        self.center() + g.direction(j, k) * self.r[j * self.n_phi + k]
    }

    pub fn mean_radius(&self) -> f64 {
        let g = self.grid();
        g.integrate(&self.r) / (4.0 * PI)
    }

    /// Harmonic model of the surface, with a check that the grid resolves it.
    pub fn model(&self) -> Result<SurfaceModel> {
        let grid = self.grid();
        let lmax = grid.max_degree();
        let h = Harmonics::new(grid, lmax)?;
        let coeffs = h.analyze(&self.r);
        let back = h.synthesize(&coeffs);
        let scale = self.r.iter().copied().fold(0.0, f64::max);
        let err = self.r.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if err > 1e-5 * scale {
            return Err(Error::DegenerateGrid(format!(
                "radial function not resolved: reconstruction error {err:e}"
            )));
        }
        Ok(SurfaceModel { center: self.center(), lmax, coeffs })
    }

    /// Embedded geometry on this surface's own grid.
    pub fn geometry(&self) -> Result<SurfaceGeometry> {
        let model = self.model()?;
        let h = Harmonics::new(self.grid(), model.lmax)?;
        Ok(geometry_from_jet(&model.center, &h.grid, &h.synthesize_jet(&model.coeffs, true)))
    }
}

/// Band-limited harmonic representation of a radial function about a center.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceModel {
    pub center: Vec3,
    pub lmax: usize,
    pub coeffs: Vec<f64>,
}

impl SurfaceModel {
    pub fn radius(&self, direction: &Vec3) -> f64 {
        let (t, p) = angles(direction);
        sh_eval(&self.coeffs, self.lmax, t, p)
    }

    pub fn point(&self, direction: &Vec3) -> Vec3 {
        let d = direction.normalize();
        self.center + d * self.radius(&d)
    }

    /// True when `x` lies strictly inside the surface.
    pub fn contains(&self, x: &Vec3) -> bool {
        let d = x - self.center;
        let n = d.norm();
        n == 0.0 || n < self.radius(&d)
    }

    /// Resample onto a different grid, truncating to what it can hold.
    pub fn resample(&self, n_theta: usize, n_phi: usize) -> Result<RadialSurface> {
        let grid = SphereGrid::new(n_theta, n_phi)?;
        let lmax = self.lmax.min(grid.max_degree());
        let h = Harmonics::new(grid, lmax)?;
        let coeffs: Vec<f64> = self.coeffs[..sh_count(lmax)].to_vec();
        RadialSurface::new(self.center, n_theta, n_phi, h.synthesize(&coeffs))
    }
}

/// Positions, outward normals, mean curvature and area density from the
/// angular jet of r.
pub fn geometry_from_jet(center: &Vec3, grid: &SphereGrid, jet: &AngularJet) -> SurfaceGeometry {
    let n = grid.len();
    let mut points = Vec::with_capacity(n);
    let mut offsets = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    let mut mean_curvature = Vec::with_capacity(n);
    let mut area_density = Vec::with_capacity(n);
    for j in 0..grid.n_theta {
        let (st, ct) = grid.theta[j].sin_cos();
        for k in 0..grid.n_phi {
            let idx = j * grid.n_phi + k;
            let (sp, cp) = grid.phi[k].sin_cos();
            let w = Vec3::new(st * cp, st * sp, ct);
            let et = Vec3::new(ct * cp, ct * sp, -st);
            let ep = Vec3::new(-sp, cp, 0.0);
            let (r, rt, rp) = (jet.v[idx], jet.v_t[idx], jet.v_p[idx]);
            let (rtt, rtp, rpp) = (jet.v_tt[idx], jet.v_tp[idx], jet.v_pp[idx]);
            let x_t = w * rt + et * r;
            let x_p = w * rp + ep * (r * st);
            let x_tt = w * (rtt - r) + et * (2.0 * rt);
            let x_tp = w * rtp + ep * (rt * st + r * ct) + et * rp;
            let x_pp = w * (rpp - r * st * st) + ep * (2.0 * rp * st) - et * (r * st * ct);
            let cross = x_t.cross(&x_p);
            let norm = cross.norm();
            let nrm = cross / norm;
            let (e, f, g) = (x_t.dot(&x_t), x_t.dot(&x_p), x_p.dot(&x_p));
            let (l2, m2, n2) = (x_tt.dot(&nrm), x_tp.dot(&nrm), x_pp.dot(&nrm));
            let h = -(l2 * g - 2.0 * m2 * f + n2 * e) / (e * g - f * f);
            points.push(center + w * r);
            offsets.push(w * r);
            normals.push(nrm);
            mean_curvature.push(h);
            area_density.push(norm / st);
        }
    }
    SurfaceGeometry { center: *center, points, offsets, normals, mean_curvature, area_density }
}
