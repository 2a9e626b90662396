//! Hole data, the conformal factors chi and psi, and the closed-form masses,
//! charges and separation factors derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, Error, Result, Violation};
use crate::numeric::compensated_sum;
use crate::{Mat3, Vec3};

/// One puncture with its two potential strengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hole {
    pub position: Vec3,
    pub alpha: f64,
    pub beta: f64,
}

impl Hole {
    pub fn new(position: [f64; 3], alpha: f64, beta: f64) -> Self {
        Hole { position: Vec3::from(position), alpha, beta }
    }

    /// alpha + beta, the bare mass parameter of the hole.
    pub fn weight(&self) -> f64 {
        self.alpha + self.beta
    }
}

/// Hole entry as it appears in a configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawHole {
    pub p: [f64; 3],
    pub alpha: f64,
    pub beta: f64,
}

/// Unvalidated configuration file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawConfig {
    pub holes: Vec<RawHole>,
    #[serde(default = "default_strict")]
    pub strict_beta: bool,
}

fn default_strict() -> bool {
    true
}

/// A validated, immutable set of holes. Construction goes through [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct HoleSet {
    holes: Vec<Hole>,
    strict_beta: bool,
}

/// Coincidence tolerance used for duplicate detection and hole evaluation.
pub(crate) fn hole_tolerance(p: &Vec3) -> f64 {
    1e-12 * p.norm().max(1.0)
}

/// Check every invariant of a raw configuration, collecting all violations.
pub fn validate(raw: &RawConfig) -> std::result::Result<HoleSet, ConfigError> {
    let mut violations = Vec::new();
    if raw.holes.is_empty() {
        violations.push(Violation::EmptyHoleSet);
    }
    for (i, h) in raw.holes.iter().enumerate() {
        if !(h.p.iter().all(|c| c.is_finite()) && h.alpha.is_finite() && h.beta.is_finite()) {
            violations.push(Violation::NonFinite { index: i });
            continue;
        }
        if h.alpha <= 0.0 {
            violations.push(Violation::NonPositiveAlpha { index: i, alpha: h.alpha });
        }
        if h.beta < 0.0 {
            violations.push(Violation::NegativeBeta { index: i, beta: h.beta });
        } else if h.beta == 0.0 && raw.strict_beta {
            violations.push(Violation::ZeroBetaWithStrictFlag { index: i });
        }
    }
    for i in 0..raw.holes.len() {
        for j in i + 1..raw.holes.len() {
            let a = Vec3::from(raw.holes[i].p);
            let b = Vec3::from(raw.holes[j].p);
            if (a - b).norm() < hole_tolerance(&a).max(hole_tolerance(&b)) {
                violations.push(Violation::DuplicatePosition { first: i, second: j });
            }
        }
    }
    if !violations.is_empty() {
        return Err(ConfigError { violations });
    }
    Ok(HoleSet {
        holes: raw.holes.iter().map(|h| Hole::new(h.p, h.alpha, h.beta)).collect(),
        strict_beta: raw.strict_beta,
    })
}

/// How many derivatives [`HoleSet::conformal_eval`] computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum JetOrder {
    Value = 0,
    Gradient = 1,
    Hessian = 2,
}

impl JetOrder {
    pub fn from_index(order: u8) -> Option<Self> {
        match order {
            0 => Some(JetOrder::Value),
            1 => Some(JetOrder::Gradient),
            2 => Some(JetOrder::Hessian),
            _ => None,
        }
    }
}

/// Values and derivatives of chi, psi and Psi = chi psi at one point.
/// Entries above the requested order are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalJet {
    pub point: Vec3,
    pub order: JetOrder,
    pub chi: f64,
    pub psi: f64,
    pub big_psi: f64,
    pub grad_chi: Vec3,
    pub grad_psi: Vec3,
    pub grad_big_psi: Vec3,
    pub hess_chi: Mat3,
    pub hess_psi: Mat3,
    pub hess_big_psi: Mat3,
}

/// Per-hole and global separation distances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationData {
    pub sigma: f64,
    /// Minimum distance to another hole; `None` when n = 1.
    pub sigma_i: Option<Vec<f64>>,
    /// Maximum distance to another hole; `None` when n = 1.
    pub sigma_i_out: Option<Vec<f64>>,
    pub base_distances: Vec<f64>,
}

/// Per-hole contribution to the total mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassTerm {
    pub index: usize,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassCertificate {
    pub mass: f64,
    pub decomposition: Vec<MassTerm>,
    /// Every term is nonnegative, so m = 0 would force alpha_i = beta_i = 0 for
    /// all i, i.e. no holes and the flat metric.
    pub zero_mass_forces_flat: bool,
    pub pass: bool,
}

impl HoleSet {
    /// Validate a list of holes directly.
    pub fn new(holes: Vec<Hole>, strict_beta: bool) -> std::result::Result<Self, ConfigError> {
        validate(&RawConfig {
            holes: holes
                .iter()
                .map(|h| RawHole { p: h.position.into(), alpha: h.alpha, beta: h.beta })
                .collect(),
            strict_beta,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawConfig =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(validate(&raw)?)
    }

    pub fn to_config(&self) -> RawConfig {
        RawConfig {
            holes: self
                .holes
                .iter()
                .map(|h| RawHole { p: h.position.into(), alpha: h.alpha, beta: h.beta })
                .collect(),
            strict_beta: self.strict_beta,
        }
    }

    pub fn holes(&self) -> &[Hole] {
        &self.holes
    }

    pub fn hole(&self, i: usize) -> Result<&Hole> {
        self.holes.get(i).ok_or(Error::IndexOutOfRange { index: i, len: self.holes.len() })
    }

    pub fn len(&self) -> usize {
        self.holes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.holes.is_empty()
    }

    pub fn strict_beta(&self) -> bool {
        self.strict_beta
    }

    /// Index of the hole within evaluation tolerance of `x`, if any.
    pub fn hole_at(&self, x: &Vec3) -> Option<usize> {
        self.holes
            .iter()
            .position(|h| (x - h.position).norm() < hole_tolerance(&h.position))
    }

    /// Euclidean distance from `x` to the nearest hole.
    pub fn nearest_hole_distance(&self, x: &Vec3) -> f64 {
        self.holes.iter().map(|h| (x - h.position).norm()).fold(f64::INFINITY, f64::min)
    }

    /// (chi, psi) at `x` without the hole check.
    #[inline]
    pub fn potentials(&self, x: &Vec3) -> (f64, f64) {
        let mut chi = 1.0;
        let mut psi = 1.0;
        for h in &self.holes {
            let inv = 1.0 / (x - h.position).norm();
            chi += h.alpha * inv;
            psi += h.beta * inv;
        }
        (chi, psi)
    }

    /// Psi = chi psi at `x` without the hole check (infinite at a hole).
    #[inline]
    pub fn factor(&self, x: &Vec3) -> f64 {
        let (chi, psi) = self.potentials(x);
        chi * psi
    }

    /// Psi at base + offset, with each hole distance formed as
    /// (base - p) + offset.
    #[inline]
    pub fn factor_about(&self, base: &Vec3, offset: &Vec3) -> f64 {
        let mut chi = 1.0;
        let mut psi = 1.0;
        for h in &self.holes {
            let inv = 1.0 / ((base - h.position) + offset).norm();
            chi += h.alpha * inv;
            psi += h.beta * inv;
        }
        chi * psi
    }

    /// Jet of the conformal factors up to `order`, from the closed-form
    /// derivatives of 1/|x - p|.
    pub fn conformal_eval(&self, x: &Vec3, order: JetOrder) -> Result<ConformalJet> {
        self.conformal_eval_about(x, &Vec3::zeros(), order)
    }

    /// The jet at base + offset, with hole distances formed as (base - p) + offset.
    pub fn conformal_eval_about(&self, base: &Vec3, offset: &Vec3, order: JetOrder) -> Result<ConformalJet> {
        let x = base + offset;
        for (i, h) in self.holes.iter().enumerate() {
            if ((base - h.position) + offset).norm() < hole_tolerance(&h.position) {
                return Err(Error::at_hole(&x, i));
            }
        }
        let mut chi = 1.0;
        let mut psi = 1.0;
        let mut grad_chi = Vec3::zeros();
        let mut grad_psi = Vec3::zeros();
        let mut hess_chi = Mat3::zeros();
        let mut hess_psi = Mat3::zeros();
        for h in &self.holes {
            let d = (base - h.position) + offset;
            let rho2 = d.norm_squared();
            let rho = rho2.sqrt();
            let inv = 1.0 / rho;
            chi += h.alpha * inv;
            psi += h.beta * inv;
            if order >= JetOrder::Gradient {
                let g = -d * (inv * inv * inv);
                grad_chi += g * h.alpha;
                grad_psi += g * h.beta;
            }
            if order >= JetOrder::Hessian {
                let inv5 = inv * inv * inv * inv * inv;
                let hm = (d * d.transpose() * 3.0 - Mat3::identity() * rho2) * inv5;
                hess_chi += hm * h.alpha;
                hess_psi += hm * h.beta;
            }
        }
        let big_psi = chi * psi;
        let grad_big_psi = grad_chi * psi + grad_psi * chi;
        let hess_big_psi = if order >= JetOrder::Hessian {
            hess_chi * psi
                + hess_psi * chi
                + grad_chi * grad_psi.transpose()
                + grad_psi * grad_chi.transpose()
        } else {
            Mat3::zeros()
        };
        Ok(ConformalJet {
            point: x,
            order,
            chi,
            psi,
            big_psi,
            grad_chi,
            grad_psi,
            grad_big_psi,
            hess_chi,
            hess_psi,
            hess_big_psi,
        })
    }

    /// Total mass m = sum of (alpha_i + beta_i).
    pub fn adm_mass(&self) -> f64 {
        compensated_sum(self.holes.iter().flat_map(|h| [h.alpha, h.beta]))
    }

    /// Mass of the end opened at hole `i`.
    pub fn end_mass(&self, i: usize) -> Result<f64> {
        let hi = *self.hole(i)?;
        let mut terms = vec![hi.alpha, hi.beta];
        for (j, hj) in self.holes.iter().enumerate() {
            if j != i {
                let r = (hi.position - hj.position).norm();
                terms.push((hi.beta * hj.alpha + hj.beta * hi.alpha) / r);
            }
        }
        Ok(compensated_sum(terms))
    }

    /// Charge of the end opened at hole `i`.
    pub fn end_charge(&self, i: usize) -> Result<f64> {
        let hi = *self.hole(i)?;
        let mut terms = vec![hi.beta, -hi.alpha];
        for (j, hj) in self.holes.iter().enumerate() {
            if j != i {
                let r = (hi.position - hj.position).norm();
                terms.push((hi.beta * hj.alpha - hj.beta * hi.alpha) / r);
            }
        }
        Ok(compensated_sum(terms))
    }

    pub fn separation(&self) -> Result<SeparationData> {
        let base: Vec<f64> = self.holes.iter().map(|h| h.position.norm()).collect();
        if let Some(i) = self.holes.iter().position(|h| h.position.norm() < hole_tolerance(&h.position)) {
            return Err(Error::HoleAtOrigin { index: i });
        }
        let n = self.holes.len();
        let mut sigma = base.iter().copied().fold(f64::INFINITY, f64::min);
        if n == 1 {
            return Ok(SeparationData {
                sigma,
                sigma_i: None,
                sigma_i_out: None,
                base_distances: base,
            });
        }
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![0.0f64; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let r = (self.holes[i].position - self.holes[j].position).norm();
                    lo[i] = lo[i].min(r);
                    hi[i] = hi[i].max(r);
                }
            }
            sigma = sigma.min(lo[i]);
        }
        Ok(SeparationData {
            sigma,
            sigma_i: Some(lo),
            sigma_i_out: Some(hi),
            base_distances: base,
        })
    }

    pub fn positive_mass_certificate(&self) -> MassCertificate {
        let decomposition: Vec<MassTerm> = self
            .holes
            .iter()
            .enumerate()
            .map(|(index, h)| MassTerm { index, alpha: h.alpha, beta: h.beta })
            .collect();
        let all_nonneg = self.holes.iter().all(|h| h.alpha >= 0.0 && h.beta >= 0.0);
        let mass = self.adm_mass();
        MassCertificate {
            mass,
            decomposition,
            zero_mass_forces_flat: all_nonneg,
            pass: all_nonneg && mass > 0.0,
        }
    }

    /// |E|^2 measured in g: Psi^-2 |grad ln(psi/chi)|^2.
    pub fn e_norm_sq(&self, x: &Vec3) -> Result<f64> {
        let j = self.conformal_eval(x, JetOrder::Gradient)?;
        let e = j.grad_psi / j.psi - j.grad_chi / j.chi;
        Ok(e.norm_squared() / (j.big_psi * j.big_psi))
    }

    /// Same holes with every alpha and beta exchanged.
    pub fn swap_potentials(&self) -> std::result::Result<HoleSet, ConfigError> {
        HoleSet::new(
            self.holes
                .iter()
                .map(|h| Hole { position: h.position, alpha: h.beta, beta: h.alpha })
                .collect(),
            self.strict_beta,
        )
    }
}

/// Configurations used as named examples throughout the toolkit.
pub mod presets {
    use super::*;

    /// Schwarzschild of mass m: one hole at the origin, alpha = beta = m/2.
    pub fn schwarzschild(m: f64) -> HoleSet {
        HoleSet::new(vec![Hole::new([0.0; 3], m / 2.0, m / 2.0)], true).expect("valid preset")
    }

    /// Extreme Reissner-Nordstrom: beta = 0, which opens a cylindrical end.
    pub fn extreme_reissner_nordstrom(alpha: f64) -> HoleSet {
        HoleSet::new(vec![Hole::new([0.0; 3], alpha, 0.0)], false).expect("valid preset")
    }

    /// Two equal holes at (+-separation/2, 0, 0).
    pub fn symmetric_pair(separation: f64, alpha: f64, beta: f64) -> HoleSet {
        let s = separation / 2.0;
        HoleSet::new(
            vec![Hole::new([s, 0.0, 0.0], alpha, beta), Hole::new([-s, 0.0, 0.0], alpha, beta)],
            beta > 0.0,
        )
        .expect("valid preset")
    }

    /// The small-mass pair used across the distance pipeline: holes at
    /// (+-2, 0, 0) with alpha = beta = 5e-6.
    pub fn small_pair() -> HoleSet {
        symmetric_pair(4.0, 5e-6, 5e-6)
    }

    /// Several small holes far apart, each with its own horizon.
    pub fn scattered_small(count: usize, mass_each: f64) -> HoleSet {
        let holes = (0..count)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
                Hole::new([3.0 * t.cos(), 3.0 * t.sin(), 0.5 * k as f64], mass_each / 2.0, mass_each / 2.0)
            })
            .collect();
        HoleSet::new(holes, true).expect("valid preset")
    }
}
