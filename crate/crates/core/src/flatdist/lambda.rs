use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flatdist::params::PipelineParams;
use crate::geometry::curvature::random_unit;
use crate::geometry::{distance_upper, Ball, PathOptions};
use crate::manifold::HoleSet;
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairDefect {
    pub x: [f64; 3],
    pub y: [f64; 3],
    pub chord: f64,
    pub path_length: f64,
    /// path_length - chord; an upper bound on this pair's distance defect.
    pub defect: f64,
    pub through_hole: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaEstimate {
    pub lambda_numeric: f64,
    /// 24 R eps.
    pub lambda_analytic: f64,
    pub pairs: usize,
    pub through_hole_pairs: usize,
    pub worst: PairDefect,
    pub pass: bool,
}

fn in_w_prime(x: &Vec3, radius: f64, balls: &[Ball]) -> bool {
    x.norm() < radius && !balls.iter().any(|b| b.contains(x))
}

fn uniform_point(rng: &mut ChaCha8Rng, radius: f64, balls: &[Ball]) -> Vec3 {
    loop {
        let x = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * radius;
        if in_w_prime(&x, radius, balls) {
            return x;
        }
    }
}

/// A pair on opposite sides of ball `b` whose chord passes within half its radius of the center.
fn through_pair(rng: &mut ChaCha8Rng, radius: f64, balls: &[Ball], b: &Ball) -> (Vec3, Vec3) {
    for _ in 0..10_000 {
        let u = random_unit(rng);
        let w = random_unit(rng);
        let v = w - u * u.dot(&w);
        let Some(v) = v.try_normalize(1e-6) else { continue };
        let off = v * (0.5 * b.radius * rng.gen::<f64>());
        let lo = 2.0 * b.radius;
        let (s1, s2) = (rng.gen_range(lo..radius), rng.gen_range(lo..radius));
        let (x, y) = (b.c() + off + u * s1, b.c() + off - u * s2);
        if in_w_prime(&x, radius, balls) && in_w_prime(&y, radius, balls) {
            return (x, y);
        }
    }
    (uniform_point(rng, radius, balls), uniform_point(rng, radius, balls))
}

/// Largest sampled defect d_g(x, y) - |x - y| over pairs in
/// W' = B(0, R) minus the balls B(p_i, gamma_{i,eps}). Half of the pairs have
/// chords crossing an excluded ball. Each defect comes from an explicit path
/// that avoids the balls, so it bounds that pair's true defect from above.
pub fn lambda_estimate(
    holes: &HoleSet,
    params: &PipelineParams,
    pair_count: usize,
    seed: u64,
    options: &PathOptions,
) -> Result<LambdaEstimate> {
    params.gates.require()?;
    if pair_count == 0 {
        return Err(Error::NonPositiveInput { name: "pair_count", value: 0.0 });
    }
    let radius = params.radius;
    let balls: Vec<Ball> =
        holes.holes().iter().zip(&params.gamma_i_eps).map(|(h, g)| Ball::new(h.position, *g)).collect();
    let inside: Vec<&Ball> = balls.iter().filter(|b| b.c().norm() + b.radius < radius).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(pair_count);
    for n in 0..pair_count {
        if n % 2 == 1 && !inside.is_empty() {
            let b = inside[(n / 2) % inside.len()];
            let (x, y) = through_pair(&mut rng, radius, &balls, b);
            pairs.push((x, y, true));
        } else {
            pairs.push((uniform_point(&mut rng, radius, &balls), uniform_point(&mut rng, radius, &balls), false));
        }
    }
    let results = crate::par::map(&pairs, |(x, y, through)| {
        distance_upper(holes, x, y, &balls, options).map(|p| PairDefect {
            x: (*x).into(),
            y: (*y).into(),
            chord: p.chord,
            path_length: p.length,
            defect: (p.length - p.chord).max(0.0),
            through_hole: *through,
        })
    });
    let defects = results.into_iter().collect::<Result<Vec<_>>>()?;
    let worst = *defects
        .iter()
        .max_by(|a, b| a.defect.total_cmp(&b.defect))
        .expect("pair_count > 0");
    let lambda_numeric = worst.defect;
    Ok(LambdaEstimate {
        lambda_numeric,
        lambda_analytic: params.lambda,
        pairs: defects.len(),
        through_hole_pairs: defects.iter().filter(|d| d.through_hole).count(),
        worst,
        pass: lambda_numeric < params.lambda,
    })
}
