//! Inversion about a hole, which swaps that hole's end with the end at
//! infinity and maps the metric isometrically onto another hole set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::curvature::random_unit;
use crate::manifold::{Hole, HoleSet};
use crate::Vec3;

#[derive(Debug, Clone, PartialEq)]
pub struct InversionMap {
    pub source: HoleSet,
    pub pivot: usize,
    pub target: HoleSet,
    /// alpha_n beta_n of the pivot.
    pub scale: f64,
    pub pivot_position: Vec3,
    /// Source index of each target hole; entry 0 is the pivot.
    pub source_index: Vec<usize>,
}

/// Build the inverted hole set. The pivot becomes target hole 0 at the origin;
/// the remaining holes keep their source order.
pub fn invert(holes: &HoleSet, pivot: usize) -> Result<InversionMap> {
    let hn = *holes.hole(pivot)?;
    let scale = hn.alpha * hn.beta;
    if scale == 0.0 {
        return Err(Error::ZeroScale);
    }
    let mut target = vec![Hole { position: Vec3::zeros(), alpha: hn.alpha, beta: hn.beta }];
    let mut source_index = vec![pivot];
    for (j, h) in holes.holes().iter().enumerate() {
        if j == pivot {
            continue;
        }
        let d = h.position - hn.position;
        let r = d.norm();
        target.push(Hole {
            position: d * (scale / (r * r)),
            alpha: h.beta * hn.alpha / r,
            beta: h.alpha * hn.beta / r,
        });
        source_index.push(j);
    }
    Ok(InversionMap {
        source: holes.clone(),
        pivot,
        target: HoleSet::new(target, holes.strict_beta())?,
        scale,
        pivot_position: hn.position,
        source_index,
    })
}

impl InversionMap {
    /// F(y) = scale y / |y|^2 + x_n, mapping target space to source space.
    pub fn apply(&self, y: &Vec3) -> Vec3 {
        y * (self.scale / y.norm_squared()) + self.pivot_position
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsometryReport {
    pub samples: usize,
    pub resampled: usize,
    pub max_deviation: f64,
}

/// Compare Psi_X(F(y))^2 scale^2 / |y|^4 with Psi_Y(y)^2 at sampled y.
pub fn verify_isometry(map: &InversionMap, sample_count: usize, seed: u64) -> IsometryReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ys = map.target.holes();
    let spread = ys.iter().map(|h| h.position.norm()).fold(map.scale.sqrt(), f64::max);
    let local = |i: usize| -> f64 {
        ys.iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, h)| (h.position - ys[i].position).norm())
            .fold(spread, f64::min)
    };
    let mut max_deviation = 0.0f64;
    let mut resampled = 0;
    let mut taken = 0;
    while taken < sample_count {
        let y = if taken % 2 == 0 {
            let i = rng.gen_range(0..ys.len());
            let d = local(i);
            let r = (d * 1e-3f64).ln() + rng.gen::<f64>() * (1e3f64).ln();
            ys[i].position + random_unit(&mut rng) * r.exp()
        } else {
            random_unit(&mut rng) * (2.0 * spread * rng.gen::<f64>().cbrt())
        };
        let x = map.apply(&y);
        if map.target.hole_at(&y).is_some() || map.source.hole_at(&x).is_some() || !x.iter().all(|c| c.is_finite()) {
            resampled += 1;
            continue;
        }
        let lhs = map.source.factor(&x).powi(2) * map.scale * map.scale / y.norm_squared().powi(2);
        let rhs = map.target.factor(&y).powi(2);
        max_deviation = max_deviation.max((lhs - rhs).abs() / rhs);
        taken += 1;
    }
    IsometryReport { samples: taken, resampled, max_deviation }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassPair {
    pub target_index: usize,
    pub source_index: usize,
    pub target_mass: f64,
    pub source_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassCorrespondence {
    /// Total mass of the target against the pivot's end mass in the source.
    pub target_total: f64,
    pub source_pivot_end: f64,
    /// End mass of target hole 0 against the total mass of the source.
    pub target_pivot_end: f64,
    pub source_total: f64,
    pub others: Vec<MassPair>,
    pub max_relative_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn mass_correspondence(map: &InversionMap, tolerance: f64) -> Result<MassCorrespondence> {
    let target_total = map.target.adm_mass();
    let source_pivot_end = map.source.end_mass(map.pivot)?;
    let target_pivot_end = map.target.end_mass(0)?;
    let source_total = map.source.adm_mass();
    let mut worst = rel(target_total, source_pivot_end).max(rel(target_pivot_end, source_total));
    let mut others = Vec::new();
    for (t, &s) in map.source_index.iter().enumerate().skip(1) {
        let pair = MassPair {
            target_index: t,
            source_index: s,
            target_mass: map.target.end_mass(t)?,
            source_mass: map.source.end_mass(s)?,
        };
        worst = worst.max(rel(pair.target_mass, pair.source_mass));
        others.push(pair);
    }
    Ok(MassCorrespondence {
        target_total,
        source_pivot_end,
        target_pivot_end,
        source_total,
        others,
        max_relative_error: worst,
        tolerance,
        pass: worst <= tolerance,
    })
}
