//! Upper bounds on g-distance from explicit piecewise-linear paths.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::volume::Ball;
use crate::manifold::HoleSet;
use crate::numeric::gauss_legendre;
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathOptions {
    pub nodes: usize,
    pub max_sweeps: usize,
    /// Nodes placed on each detour arc.
    pub arc_nodes: usize,
}

impl Default for PathOptions {
    fn default() -> Self {
        PathOptions { nodes: 200, max_sweeps: 60, arc_nodes: 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathResult {
    /// g-length of the final path; an upper bound on the distance.
    pub length: f64,
    pub initial_length: f64,
    pub chord: f64,
    pub nodes: Vec<[f64; 3]>,
}

struct Lengths<'a> {
    holes: &'a HoleSet,
    gl: (Vec<f64>, Vec<f64>),
}

impl Lengths<'_> {
    fn segment(&self, a: &Vec3, b: &Vec3) -> f64 {
        let d = b - a;
        let len = d.norm();
        if len == 0.0 {
            return 0.0;
        }
        let near = self
            .holes
            .holes()
            .iter()
            .map(|h| segment_distance(a, b, &h.position))
            .fold(f64::INFINITY, f64::min);
        let pieces = (len / (0.5 * near)).ceil().clamp(1.0, 64.0) as usize;
        let (x, w) = &self.gl;
        let mut total = 0.0;
        for p in 0..pieces {
            let (t0, t1) = (p as f64 / pieces as f64, (p + 1) as f64 / pieces as f64);
            let (mid, half) = (0.5 * (t0 + t1), 0.5 * (t1 - t0));
            for (xi, wi) in x.iter().zip(w) {
                total += wi * half * self.holes.factor(&(a + d * (mid + half * xi)));
            }
        }
        total * len
    }
}

/// Euclidean distance from `c` to the segment [a, b].
pub fn segment_distance(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let d = b - a;
    let l2 = d.norm_squared();
    let t = if l2 == 0.0 { 0.0 } else { ((c - a).dot(&d) / l2).clamp(0.0, 1.0) };
    (a + d * t - c).norm()
}

fn feasible(a: &Vec3, b: &Vec3, balls: &[Ball]) -> bool {
    balls.iter().all(|ball| segment_distance(a, b, &ball.c()) >= ball.radius)
}

fn any_perpendicular(u: &Vec3) -> Vec3 {
    let trial = if u.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    (trial - u * u.dot(&trial)).normalize()
}

/// Segment from x to y with every crossed ball replaced by an arc around it.
fn initial_path(x: &Vec3, y: &Vec3, balls: &[Ball], arc_nodes: usize) -> Vec<Vec3> {
    let d = y - x;
    let len = d.norm();
    let u = d / len;
    let mut hits: Vec<(f64, f64, &Ball)> = Vec::new();
    for b in balls {
        let c = b.c();
        let tc = (c - x).dot(&u);
        let off2 = (x + u * tc - c).norm_squared();
        let r2 = b.radius * b.radius;
        if off2 >= r2 {
            continue;
        }
        let half = (r2 - off2).sqrt();
        let (t0, t1) = (tc - half, tc + half);
        if t1 <= 0.0 || t0 >= len {
            continue;
        }
        hits.push((t0, t1, b));
    }
    hits.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut path = vec![*x];
    for (_, _, b) in hits {
        let c = b.c();
        let foot = x + u * (c - x).dot(&u);
        let off = foot - c;
        let n = if off.norm() > 1e-12 * b.radius { off.normalize() } else { any_perpendicular(&u) };
        let entry = x + u * ((c - x).dot(&u) - (b.radius.powi(2) - off.norm_squared()).sqrt());
        let a = entry - c;
        let te = a.dot(&n).atan2(-a.dot(&u));
        let to = std::f64::consts::PI - te;
        let step = (to - te) / arc_nodes as f64;
        let rr = b.radius * (1.0 + 1e-9) / (0.5 * step).cos();
        for k in 0..=arc_nodes {
            let t = te + step * k as f64;
            path.push(c + (u * (-t.cos()) + n * t.sin()) * rr);
        }
    }
    path.push(*y);
    path
}

/// Insert nodes along straight pieces until the path has about `target` nodes.
fn refine(path: &[Vec3], target: usize) -> Vec<Vec3> {
    let total: f64 = path.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    if total == 0.0 {
        return path.to_vec();
    }
    let spare = target.saturating_sub(path.len()) as f64;
    let mut out = vec![path[0]];
    for w in path.windows(2) {
        let l = (w[1] - w[0]).norm();
        let extra = (spare * l / total).floor() as usize;
        for k in 1..=extra {
            out.push(w[0] + (w[1] - w[0]) * (k as f64 / (extra + 1) as f64));
        }
        out.push(w[1]);
    }
    out
}

/// Holes not covered by any ball get a small implicit exclusion so the
/// initial path steers around them.
fn implicit_balls(holes: &HoleSet, x: &Vec3, y: &Vec3, balls: &[Ball]) -> Vec<Ball> {
    let mut all = balls.to_vec();
    for h in holes.holes() {
        if balls.iter().any(|b| b.contains(&h.position)) {
            continue;
        }
        let r = 0.5 * h.weight().min((h.position - x).norm()).min((h.position - y).norm());
        all.push(Ball::new(h.position, r));
    }
    all
}

/// Upper bound on the g-distance between x and y among paths avoiding `balls`.
pub fn distance_upper(holes: &HoleSet, x: &Vec3, y: &Vec3, balls: &[Ball], options: &PathOptions) -> Result<PathResult> {
    if balls.iter().any(|b| b.contains(x) || b.contains(y)) {
        return Err(Error::Unreachable);
    }
    if let Some(i) = holes.hole_at(x).or_else(|| holes.hole_at(y)) {
        return Err(Error::at_hole(x, i));
    }
    let chord = (y - x).norm();
    let lengths = Lengths { holes, gl: gauss_legendre(6) };
    if chord == 0.0 {
        return Ok(PathResult { length: 0.0, initial_length: 0.0, chord, nodes: vec![(*x).into()] });
    }
    let all = implicit_balls(holes, x, y, balls);
    let mut nodes = refine(&initial_path(x, y, &all, options.arc_nodes), options.nodes);
    if !nodes.windows(2).all(|w| feasible(&w[0], &w[1], balls)) {
        return Err(Error::Unreachable);
    }
    let mut seg: Vec<f64> = nodes.windows(2).map(|w| lengths.segment(&w[0], &w[1])).collect();
    let initial_length: f64 = seg.iter().sum();
    let spacing = nodes.windows(2).map(|w| (w[1] - w[0]).norm()).sum::<f64>() / (nodes.len() - 1) as f64;
    let mut step = 0.25 * spacing;
    let dirs = [Vec3::x(), -Vec3::x(), Vec3::y(), -Vec3::y(), Vec3::z(), -Vec3::z()];
    for _ in 0..options.max_sweeps {
        let mut improved = false;
        for i in 1..nodes.len() - 1 {
            let current = seg[i - 1] + seg[i];
            let mut best: Option<(Vec3, f64, f64)> = None;
            for d in &dirs {
                let trial = nodes[i] + d * step;
                if !feasible(&nodes[i - 1], &trial, balls) || !feasible(&trial, &nodes[i + 1], balls) {
                    continue;
                }
                let (l0, l1) = (lengths.segment(&nodes[i - 1], &trial), lengths.segment(&trial, &nodes[i + 1]));
                if l0 + l1 < best.map_or(current, |b| b.1 + b.2) {
                    best = Some((trial, l0, l1));
                }
            }
            if let Some((p, l0, l1)) = best {
                if l0 + l1 < current * (1.0 - 1e-15) {
                    nodes[i] = p;
                    seg[i - 1] = l0;
                    seg[i] = l1;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
            if step < 1e-6 * spacing {
                break;
            }
        }
    }
    Ok(PathResult {
        length: seg.iter().sum(),
        initial_length,
        chord,
        nodes: nodes.iter().map(|n| (*n).into()).collect(),
    })
}
