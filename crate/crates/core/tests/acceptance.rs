//! Acceptance criteria. Each test prints one `ACCEPTANCE <n> PASS|FAIL` line
//! and then asserts the same verdict. Run with `--nocapture` to see the lines.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use geostatic::flatdist::{
    convergence_run, evaluate_gates, extracted_constants, horizon_gammas, lambda_estimate, params, region_w,
    volume_report, PipelineOptions, SequenceSpec,
};
use geostatic::geometry::{verify_constraints, PathOptions, VolumeBudget};
use geostatic::horizon::checks::Verdict;
use geostatic::horizon::{
    area_lower_bound, find_horizon, find_outermost, locate_checks, monotonicity_check, penrose_check, Constants,
    HorizonLayout, HorizonOptions,
};
use geostatic::inversion::{invert, mass_correspondence, verify_isometry};
use geostatic::{presets, Hole, HoleSet, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(n: u32, title: &str, pass: bool, detail: String) {
    println!("ACCEPTANCE {n} {}: {title} | {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} failed: {detail}");
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn random_strict(rng: &mut ChaCha8Rng, n: usize, mass_scale: f64) -> HoleSet {
    loop {
        let holes: Vec<Hole> = (0..n)
            .map(|_| {
                let p = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
                Hole::new(p, mass_scale * rng.gen_range(0.05..1.0), mass_scale * rng.gen_range(0.05..1.0))
            })
            .collect();
        if let Ok(h) = HoleSet::new(holes, true) {
            if h.separation().is_ok_and(|s| s.sigma > 0.3) {
                return h;
            }
        }
    }
}

#[test]
fn criterion_01_schwarzschild_exactness() {
    let start = Instant::now();
    let holes = presets::schwarzschild(1.0);
    let h = find_horizon(&holes, &Vec3::zeros(), 2.0, &HorizonOptions::default()).unwrap();
    let elapsed = start.elapsed();
    let r_err = rel(h.mean_radius, 0.5);
    let a_err = rel(h.area_g, 16.0 * PI);
    let pass = r_err < 1e-6 && a_err < 1e-6 && elapsed < Duration::from_secs(30);
    verdict(
        1,
        "Schwarzschild horizon radius 0.5 and area 16 pi",
        pass,
        format!("radius rel err {r_err:.2e}, area rel err {a_err:.2e} (tol 1e-6), {elapsed:.2?} (limit 30 s)"),
    );
}

#[test]
fn criterion_02_constraint_identity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for i in 0..10 {
        let n = 1 + i % 4;
        let holes = random_strict(&mut rng, n, 0.5);
        let r = verify_constraints(&holes, 1000, 100 + i as u64, 1e-6);
        assert_eq!(r.samples + r.excluded, 1000);
        worst = worst.max(r.max_residual);
    }
    let mut worst_flat = 0.0f64;
    for i in 0..5 {
        let n = 1 + i % 3;
        let base = random_strict(&mut rng, n, 0.5);
        let holes = HoleSet::new(
            base.holes().iter().map(|h| Hole { beta: h.alpha, ..*h }).collect(),
            true,
        )
        .unwrap();
        let r = verify_constraints(&holes, 1000, 200 + i as u64, 1e-6);
        worst_flat = r.rows.iter().map(|row| row.scalar_curvature.abs()).fold(worst_flat, f64::max);
    }
    let elapsed = start.elapsed();
    let pass = worst < 1e-6 && worst_flat < 1e-8 && elapsed < Duration::from_secs(10);
    verdict(
        2,
        "R = 2|E|^2 on random configurations",
        pass,
        format!(
            "max relative residual {worst:.2e} (tol 1e-6), max |R| uncharged {worst_flat:.2e} (tol 1e-8), {elapsed:.2?} (limit 10 s)"
        ),
    );
}

#[test]
fn criterion_03_inversion() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut iso, mut mass, mut round) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..10 {
        let holes = random_strict(&mut rng, 1 + i % 4, 0.5);
        for pivot in 0..holes.len() {
            let map = invert(&holes, pivot).unwrap();
            iso = iso.max(verify_isometry(&map, 1000, i as u64 * 10 + pivot as u64).max_deviation);
            mass = mass.max(mass_correspondence(&map, 1e-12).unwrap().max_relative_error);
            let back = invert(&map.target, 0).unwrap();
            for (t, &s) in map.source_index.iter().enumerate() {
                let orig = holes.holes()[s];
                let twice = back.target.holes()[map_index(&back.source_index, t)];
                let pos = twice.position + map.pivot_position;
                let scale = orig.position.norm().max(orig.weight());
                round = round
                    .max((pos - orig.position).norm() / scale)
                    .max(rel(twice.alpha, orig.alpha))
                    .max(rel(twice.beta, orig.beta));
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = iso < 1e-10 && mass < 1e-12 && round < 1e-12 && elapsed < Duration::from_secs(10);
    verdict(
        3,
        "inversion isometry, mass identities, round trip",
        pass,
        format!(
            "isometry {iso:.2e} (tol 1e-10), mass {mass:.2e} (tol 1e-12), round trip {round:.2e} (tol 1e-12), {elapsed:.2?} (limit 10 s)"
        ),
    );
}

/// Position in the twice-inverted set of the hole that was `t` in the once-inverted set.
fn map_index(source_index: &[usize], t: usize) -> usize {
    source_index.iter().position(|&s| s == t).unwrap()
}

#[test]
fn criterion_04_horizon_location() {
    let start = Instant::now();
    let options = HorizonOptions::default();
    let c1 = options.constants.c1;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures = Vec::new();
    let mut horizons = 0;
    for i in 0..20 {
        let base = random_strict(&mut rng, 1 + i % 3, 1.0);
        let sigma = base.separation().unwrap().sigma;
        let target = sigma / (20.0 * c1) * rng.gen_range(0.2..0.9);
        let k = target / base.adm_mass();
        let holes = HoleSet::new(
            base.holes().iter().map(|h| Hole { alpha: h.alpha * k, beta: h.beta * k, ..*h }).collect(),
            true,
        )
        .unwrap();
        let out = find_outermost(&holes, &options).unwrap();
        horizons += out.horizons.len();
        let loc = locate_checks(&holes, &out.horizons, &options.constants).unwrap();
        let pen = penrose_check(&holes, &out.horizons, 1e-9).unwrap();
        let a = loc.rows.iter().all(|r| r.meets_touch_ball);
        let b = loc.rows.iter().all(|r| r.inside_outer && r.avoids_inner);
        let ok = a && b && pen.pass && out.pairwise_disjoint && loc.verdict == Verdict::Pass;
        if !ok {
            failures.push(format!("config {i}: touch {a} annulus {b} penrose {} disjoint {}", pen.pass, out.pairwise_disjoint));
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(300);
    verdict(
        4,
        "horizon location, Penrose and disjointness on 20 configurations",
        pass,
        format!("{horizons} horizons, failures {failures:?}, {elapsed:.2?} (limit 300 s)"),
    );
}

#[test]
fn criterion_05_area_lower_bound() {
    let options = HorizonOptions::default();
    let s = presets::schwarzschild(1.0);
    let h = find_horizon(&s, &Vec3::zeros(), 2.0, &options).unwrap();
    let eq = rel(area_lower_bound(&s, &h.surface).unwrap(), h.area_g);
    let mut strict = Vec::new();
    for (sep, a2, b2) in [(3.0, 0.2, 0.05), (4.0, 0.4, 0.1), (2.5, 0.1, 0.3)] {
        let holes = HoleSet::new(
            vec![Hole::new([-sep / 2.0, 0.0, 0.0], 0.3, 0.2), Hole::new([sep / 2.0, 0.0, 0.0], a2, b2)],
            true,
        )
        .unwrap();
        let out = find_outermost(&holes, &options).unwrap();
        for hz in &out.horizons {
            let lb = area_lower_bound(&holes, &hz.surface).unwrap();
            strict.push(hz.area_g - lb);
        }
    }
    let pass = eq < 1e-4 && !strict.is_empty() && strict.iter().all(|g| *g > 0.0);
    verdict(
        5,
        "area lower bound: equality on Schwarzschild, strict otherwise",
        pass,
        format!("Schwarzschild rel gap {eq:.2e} (tol 1e-4), asymmetric gaps {strict:?}"),
    );
}

#[test]
fn criterion_06_monotonicity() {
    let holes = presets::schwarzschild(1.0);
    let h = find_horizon(&holes, &Vec3::zeros(), 2.0, &HorizonOptions::default()).unwrap();
    let c = Constants::default();
    let mut worst = 0.0f64;
    let mut floor = true;
    for dir in [Vec3::z(), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.3, -0.4, 0.8)] {
        let r = monotonicity_check(&holes, &h.model, &dir, &c, 1e-3).unwrap();
        worst = worst.max(r.worst_drop);
        floor &= r.floor_holds;
    }
    verdict(
        6,
        "monotone growth function and floor on the Schwarzschild horizon",
        worst <= 1e-3 && floor,
        format!("worst relative drop {worst:.2e} (tol 1e-3), floor holds {floor}"),
    );
}

fn reference_config() -> (HoleSet, f64, f64) {
    (presets::small_pair(), 10.0, 0.02)
}

#[test]
fn criterion_07_lambda_bound() {
    let start = Instant::now();
    let (holes, r, eps) = reference_config();
    let opts = HorizonOptions::default();
    let gammas = horizon_gammas(&holes, &opts).unwrap();
    let p = params(&holes, r, eps, &gammas, &opts.constants).unwrap();
    let est = lambda_estimate(&holes, &p, 200, 7, &PathOptions::default()).unwrap();
    let elapsed = start.elapsed();
    let pass = est.pairs >= 200
        && (est.lambda_analytic - 4.8).abs() < 1e-12
        && est.lambda_numeric * 10.0 <= est.lambda_analytic
        && elapsed < Duration::from_secs(120);
    verdict(
        7,
        "sampled lambda below 24 R eps with 10x margin",
        pass,
        format!(
            "lambda numeric {:.3e} over {} pairs ({} through a ball), analytic {}, {elapsed:.2?} (limit 120 s)",
            est.lambda_numeric, est.pairs, est.through_hole_pairs, est.lambda_analytic
        ),
    );
}

#[test]
fn criterion_08_volume_bounds() {
    let (holes, r, eps) = reference_config();
    let opts = HorizonOptions::default();
    let gammas = horizon_gammas(&holes, &opts).unwrap();
    let p = params(&holes, r, eps, &gammas, &opts.constants).unwrap();
    let w = region_w(&holes, &p, p.lambda, 4000, 1).unwrap();
    let k = extracted_constants(&opts.constants);
    let v = volume_report(&holes, &p, &w, &k, &VolumeBudget::default()).unwrap();
    let closed = v.excess_delta.value;
    let diff = (v.excess_delta_sampled - closed).abs();
    let pass = v.sampled_matches_closed_form && v.excess_g.value <= k.c_double_prime * r.powi(3) * eps;
    verdict(
        8,
        "complement volumes: closed form and extracted C''",
        pass,
        format!(
            "Vol_delta(M2\\W) closed {closed:.4} sampled {:.4} (diff {diff:.2e}, 5 sigma {:.2e}); Vol_g(M1\\W) {:.4} <= C''R^3 eps = {:.4}",
            v.excess_delta_sampled,
            5.0 * v.excess_delta_sampled_error,
            v.excess_g.value,
            k.c_double_prime * r.powi(3) * eps
        ),
    );
}

#[test]
fn criterion_09_convergence() {
    let start = Instant::now();
    let spec = SequenceSpec { positions: vec![[2.0, 0.0, 0.0], [-2.0, 0.0, 0.0]], alpha: 0.25, beta: 0.25, k_min: 3, k_max: 7 };
    let table = convergence_run(&spec, 10.0, &PipelineOptions::default()).unwrap();
    let elapsed = start.elapsed();
    for row in &table.rows {
        println!(
            "  k={} m={:.1e} eps={:?} dF={:?} envelope={:?} skipped={:?}",
            row.k, row.m, row.eps, row.d_f_numeric, row.d_f_envelope, row.skipped
        );
    }
    let ratio = table.final_ratio.unwrap_or(f64::INFINITY);
    let slope = table.slope.unwrap_or(f64::NAN);
    let pass = table.strictly_decreasing
        && ratio < 0.1
        && (0.35..=0.65).contains(&slope)
        && elapsed < Duration::from_secs(600);
    verdict(
        9,
        "dF decreasing along the sequence with sqrt(eps) scaling",
        pass,
        format!(
            "strictly decreasing {}, final/first {ratio:.3} (need < 0.1), slope {slope:.3} (need [0.35, 0.65]), {elapsed:.2?} (limit 600 s)",
            table.strictly_decreasing
        ),
    );
}

#[test]
fn criterion_10_merged_horizon() {
    let options = HorizonOptions::default();
    let near = presets::symmetric_pair(0.5, 1.0, 1.0);
    let out = find_outermost(&near, &options).unwrap();
    let merged = out.layout == HorizonLayout::Shared
        && out.horizons.len() == 1
        && out.horizons[0].enclosed_holes.len() == 2;
    let far = presets::symmetric_pair(20.0, 1.0, 1.0);
    let out_far = find_outermost(&far, &options).unwrap();
    let split = out_far.layout == HorizonLayout::Disjoint && out_far.horizons.len() == 2 && out_far.pairwise_disjoint;
    verdict(
        10,
        "merged horizon at separation 0.5, two horizons at 20",
        merged && split,
        format!(
            "near: {:?} with {} surface(s); far: {:?} with {} surface(s), disjoint {}",
            out.layout,
            out.horizons.len(),
            out_far.layout,
            out_far.horizons.len(),
            out_far.pairwise_disjoint
        ),
    );
}

#[test]
fn gate_names_are_reported() {
    let c = Constants::default();
    let g = evaluate_gates(&presets::symmetric_pair(4.0, 0.5, 0.5), 10.0, 0.02, &c);
    assert!(!g.pass() && !g.failing().is_empty());
}
