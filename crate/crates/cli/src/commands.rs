use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use geostatic::flatdist::{
    evaluate_gates, horizon_gammas, lambda_estimate, main_bound, params, region_w, smallest_feasible_eps, volume_report,
    convergence_run, extracted_constants, PipelineOptions, PipelineParams, SequenceSpec,
};
use geostatic::geometry::{annulus_pullback, estimate_kappa, verify_constraints, PathOptions, VolumeBudget};
use geostatic::horizon::checks::Verdict as LocateVerdict;
use geostatic::horizon::{
    constants, find_horizon, find_outermost, locate_checks, penrose_check, Constants, HorizonOptions, HorizonResult,
};
use geostatic::inversion::{invert, mass_correspondence, verify_isometry};
use geostatic::{HoleSet, Vec3};
use serde_json::{json, Value};

use crate::args::{AnnulusArgs, Command, Common, ConstantArg, ConvergeArgs, FlatArgs, HorizonArgs, InvertArgs, SampleArgs};
use crate::output::{num, opt, ConstantsSource, Report, Table, Verdict};
use crate::svg::{Plot, Series, Style};

const DEFAULT_KAPPA: f64 = 9.0;
const DEFAULT_I0: f64 = 1.0 / 3.0;
const KAPPA_SAMPLES: usize = 2000;

pub fn read_config(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn load_holes(common: &Common) -> Result<HoleSet> {
    let Some(path) = common.config_path() else { bail!(crate::UsageError("a configuration file is required".into())) };
    let text = read_config(path)?;
    HoleSet::from_json(&text).with_context(|| format!("in {}", path.display()))
}

pub fn resolve_constants(common: &Common, holes: Option<&HoleSet>) -> Result<(Constants, ConstantsSource)> {
    let c = match (common.kappa, common.i0) {
        (None, None) => {
            let c = constants(DEFAULT_KAPPA, DEFAULT_I0)?;
            return Ok((c, ConstantsSource { mode: "default", kappa: c.kappa, i0: c.i0 }));
        }
        (Some(ConstantArg::Auto), _) | (_, Some(ConstantArg::Auto)) => {
            let Some(holes) = holes else { bail!(crate::UsageError("`auto` constants need a hole configuration".into())) };
            Constants::auto(estimate_kappa(holes, KAPPA_SAMPLES, common.seed)?)?
        }
        (k, i) => {
            let value = |a: Option<ConstantArg>, d: f64| match a {
                Some(ConstantArg::Value(v)) => v,
                _ => d,
            };
            constants(value(k, DEFAULT_KAPPA), value(i, DEFAULT_I0))?
        }
    };
    Ok((c, ConstantsSource { mode: c.source, kappa: c.kappa, i0: c.i0 }))
}

fn p3(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

fn holes_json(holes: &HoleSet) -> Value {
    serde_json::to_value(holes.to_config()).unwrap_or(Value::Null)
}

fn horizon_json(h: &HorizonResult) -> Value {
    json!({
        "center": p3(&h.model.center),
        "mean_radius": h.mean_radius,
        "area_g": h.area_g,
        "area_error": h.area_error,
        "residual_max": h.residual_max,
        "scaled_residual": h.scaled_residual,
        "iterations": h.iterations,
        "lmax": h.lmax,
        "enclosed_holes": h.enclosed_holes,
        "annulus": h.annulus,
    })
}

fn horizon_options(common: &Common, constants: Constants, solver_tol: bool) -> HorizonOptions {
    let mut o = HorizonOptions { constants, ..Default::default() };
    if solver_tol {
        if let Some(t) = common.tol {
            o.tol = t;
        }
    }
    o
}

/// Slice of each surface through its center in the plane z = center.z,
/// with the holes projected onto the xy-plane.
fn cross_section(title: &str, holes: &HoleSet, horizons: &[&HorizonResult]) -> String {
    let mut series = Vec::new();
    for (i, h) in horizons.iter().enumerate() {
        let points = (0..=360)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / 360.0;
                let x = h.model.point(&Vec3::new(t.cos(), t.sin(), 0.0));
                (x.x, x.y)
            })
            .collect();
        series.push(Series { label: format!("surface {i}"), points, style: Style::Line });
    }
    series.push(Series {
        label: "holes".into(),
        points: holes.holes().iter().map(|h| (h.position.x, h.position.y)).collect(),
        style: Style::Markers,
    });
    Plot { title: title.into(), x_label: "x".into(), y_label: "y".into(), log: false, equal_aspect: true, series }.render()
}

fn surface_table(horizons: &[&HorizonResult]) -> Table {
    let mut t = Table::new(&["surface", "j", "k", "theta", "phi", "r", "x", "y", "z"]);
    for (i, h) in horizons.iter().enumerate() {
        let g = h.surface.grid();
        for j in 0..g.n_theta {
            for k in 0..g.n_phi {
                let (theta, phi) = (g.theta[j], g.phi[k]);
                let x = h.surface.point(j, k);
                t.push(vec![
                    i.to_string(),
                    j.to_string(),
                    k.to_string(),
                    num(theta),
                    num(phi),
                    num(h.surface.r[j * g.n_phi + k]),
                    num(x.x),
                    num(x.y),
                    num(x.z),
                ]);
            }
        }
    }
    t
}

fn masses(common: &Common) -> Result<Report> {
    let holes = load_holes(common)?;
    let cert = holes.positive_mass_certificate();
    let sep = holes.separation().ok();
    let mut t = Table::new(&["hole", "x", "y", "z", "alpha", "beta", "end_mass", "end_charge"]);
    let mut ends = Vec::new();
    for (i, h) in holes.holes().iter().enumerate() {
        let (m, q) = (holes.end_mass(i)?, holes.end_charge(i)?);
        t.push(vec![
            i.to_string(),
            num(h.position.x),
            num(h.position.y),
            num(h.position.z),
            num(h.alpha),
            num(h.beta),
            num(m),
            num(q),
        ]);
        ends.push(json!({ "hole": i, "m": m, "q": q }));
    }
    let summary = json!({
        "m": holes.adm_mass(),
        "ends": ends,
        "positive_mass": cert,
        "separation": sep,
    });
    Ok(Report::new(summary, Verdict::from_pass(cert.pass)).table(t))
}

fn parse_center(s: &str, holes: &HoleSet) -> Result<(Vec3, f64)> {
    if let Ok(i) = s.parse::<usize>() {
        let h = holes.hole(i)?;
        return Ok((h.position, 2.0 * h.weight()));
    }
    let parts: Vec<f64> = s.split(',').map(|p| p.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| {
        crate::UsageError(format!("--center expects a hole index or `x,y,z`, got `{s}`"))
    })?;
    let [x, y, z] = parts[..] else { bail!(crate::UsageError(format!("--center expects three coordinates, got `{s}`"))) };
    let c = Vec3::new(x, y, z);
    let reach = holes.holes().iter().map(|h| (h.position - c).norm()).fold(0.0, f64::max);
    Ok((c, reach + 2.0 * holes.adm_mass()))
}

fn horizon(a: &HorizonArgs) -> Result<Report> {
    let holes = load_holes(&a.common)?;
    let (c, _) = resolve_constants(&a.common, Some(&holes))?;
    let opts = horizon_options(&a.common, c, true);
    let (center, default_init) = parse_center(&a.center, &holes)?;
    let init = a.init.unwrap_or(default_init);
    let h = find_horizon(&holes, &center, init, &opts)?;
    let pass = h.scaled_residual < opts.tol;
    let mut r = Report::new(json!({ "horizon": horizon_json(&h), "tolerance": opts.tol }), Verdict::from_pass(pass))
        .table(surface_table(&[&h]))
        .tolerance("solver", opts.tol)
        .parameter("center", p3(&center))
        .parameter("init_radius", init)
        .parameter("grid", [opts.n_theta, opts.n_phi]);
    if a.common.svg {
        r.svg = Some(cross_section("horizon cross-section", &holes, &[&h]));
    }
    Ok(r)
}

fn outermost(common: &Common) -> Result<Report> {
    let holes = load_holes(common)?;
    let (c, _) = resolve_constants(common, Some(&holes))?;
    let opts = horizon_options(common, c, true);
    let out = find_outermost(&holes, &opts)?;
    let pass = !out.disjointness_applicable || out.pairwise_disjoint;
    let summary = json!({
        "layout": out.layout,
        "disjointness_applicable": out.disjointness_applicable,
        "pairwise_disjoint": out.pairwise_disjoint,
        "horizons": out.horizons.iter().map(horizon_json).collect::<Vec<_>>(),
        "hole_free_candidates": out.hole_free_candidates.iter().map(horizon_json).collect::<Vec<_>>(),
        "tolerance": opts.tol,
    });
    let surfaces: Vec<&HorizonResult> = out.horizons.iter().collect();
    let mut r = Report::new(summary, Verdict::from_pass(pass)).table(surface_table(&surfaces)).tolerance("solver", opts.tol);
    if common.svg {
        r.svg = Some(cross_section("outermost horizons", &holes, &surfaces));
    }
    Ok(r)
}

fn locate(common: &Common) -> Result<Report> {
    let holes = load_holes(common)?;
    let (c, _) = resolve_constants(common, Some(&holes))?;
    let opts = horizon_options(common, c, true);
    let out = find_outermost(&holes, &opts)?;
    let rep = locate_checks(&holes, &out.horizons, &c)?;
    let verdict = match rep.verdict {
        LocateVerdict::Pass => Verdict::Pass,
        LocateVerdict::Fail => Verdict::CheckFailed,
        LocateVerdict::NotApplicable => Verdict::GateFailed,
    };
    let mut t = Table::new(&[
        "hole",
        "area",
        "min_distance",
        "max_distance",
        "touch_radius",
        "annulus_inner",
        "annulus_outer",
        "meets_touch_ball",
        "inside_outer",
        "avoids_inner",
        "disjointness_chain",
    ]);
    for row in &rep.rows {
        t.push(vec![
            row.hole.to_string(),
            num(row.area),
            num(row.min_distance),
            num(row.max_distance),
            num(row.touch_radius),
            num(row.annulus_inner),
            num(row.annulus_outer),
            row.meets_touch_ball.to_string(),
            row.inside_outer.to_string(),
            row.avoids_inner.to_string(),
            row.disjointness_chain.to_string(),
        ]);
    }
    let summary = json!({ "locate": rep, "solver_tolerance": opts.tol });
    Ok(Report::new(summary, verdict).table(t).tolerance("solver", opts.tol))
}

fn penrose(common: &Common) -> Result<Report> {
    let holes = load_holes(common)?;
    let (c, _) = resolve_constants(common, Some(&holes))?;
    let opts = horizon_options(common, c, false);
    let tol = common.tol.unwrap_or(1e-6);
    let out = find_outermost(&holes, &opts)?;
    let rep = penrose_check(&holes, &out.horizons, tol)?;
    let mut t = Table::new(&["surface", "area", "area_lower_bound", "holds", "area_at_least_bound"]);
    for (i, s) in rep.surfaces.iter().enumerate() {
        t.push(vec![i.to_string(), num(s.area), num(s.area_lower_bound), s.holds.to_string(), s.area_at_least_bound.to_string()]);
    }
    let pass = rep.pass;
    Ok(Report::new(json!({ "penrose": rep, "solver_tolerance": opts.tol }), Verdict::from_pass(pass))
        .table(t)
        .tolerance("penrose", tol)
        .tolerance("solver", opts.tol))
}

fn constraints(a: &SampleArgs) -> Result<Report> {
    let holes = load_holes(&a.common)?;
    let tol = a.common.tol.unwrap_or(1e-6);
    let rep = verify_constraints(&holes, a.samples, a.common.seed, tol);
    let mut t = Table::new(&["x", "y", "z", "scalar_curvature", "two_e_norm_sq", "residual", "divergence_residual"]);
    for row in &rep.rows {
        t.push(vec![
            num(row.point[0]),
            num(row.point[1]),
            num(row.point[2]),
            num(row.scalar_curvature),
            num(row.two_e_norm_sq),
            num(row.residual),
            num(row.divergence_residual),
        ]);
    }
    let summary = json!({
        "samples": rep.samples,
        "excluded": rep.excluded,
        "max_residual": rep.max_residual,
        "max_divergence_residual": rep.max_divergence_residual,
        "tolerance": rep.tolerance,
        "pass": rep.pass,
    });
    Ok(Report::new(summary, Verdict::from_pass(rep.pass)).table(t).tolerance("constraint", tol).parameter("samples", a.samples))
}

fn inversion(a: &InvertArgs) -> Result<Report> {
    let holes = load_holes(&a.common)?;
    let iso_tol = a.common.tol.unwrap_or(1e-10);
    let mass_tol = 1e-12;
    let pivots: Vec<usize> = match a.pivot {
        Some(p) => vec![p],
        None => (0..holes.len()).collect(),
    };
    let mut t = Table::new(&["pivot", "target_index", "source_index", "x", "y", "z", "alpha", "beta", "target_mass", "source_mass"]);
    let mut runs = Vec::new();
    let mut extra = Vec::new();
    let mut pass = true;
    for &pivot in &pivots {
        let map = invert(&holes, pivot)?;
        let iso = verify_isometry(&map, a.samples, a.common.seed);
        let mc = mass_correspondence(&map, mass_tol)?;
        let ok = iso.max_deviation < iso_tol && mc.pass;
        pass &= ok;
        for (ti, h) in map.target.holes().iter().enumerate() {
            let source = map.source_index[ti];
            let sm = if ti == 0 { map.source.adm_mass() } else { map.source.end_mass(source)? };
            t.push(vec![
                pivot.to_string(),
                ti.to_string(),
                source.to_string(),
                num(h.position.x),
                num(h.position.y),
                num(h.position.z),
                num(h.alpha),
                num(h.beta),
                num(map.target.end_mass(ti)?),
                num(sm),
            ]);
        }
        extra.push((format!("inverted_{pivot}.json"), crate::output::to_json(&map.target.to_config())?));
        runs.push(json!({
            "pivot": pivot,
            "target": holes_json(&map.target),
            "isometry": iso,
            "isometry_tolerance": iso_tol,
            "masses": mc,
            "pass": ok,
        }));
    }
    let mut r = Report::new(json!({ "inversions": runs }), Verdict::from_pass(pass))
        .table(t)
        .tolerance("isometry", iso_tol)
        .tolerance("mass", mass_tol)
        .parameter("samples", a.samples)
        .parameter("pivots", &pivots);
    r.extra = extra;
    Ok(r)
}

fn annulus(a: &AnnulusArgs) -> Result<Report> {
    let holes = load_holes(&a.common)?;
    let m = annulus_pullback(&holes, a.hole, a.scale)?;
    let mut t = Table::new(&["u_x", "u_y", "u_z", "factor"]);
    for s in &m.samples {
        t.push(vec![num(s.u[0]), num(s.u[1]), num(s.u[2]), num(s.factor)]);
    }
    let pass = m.dominates_flat();
    let summary = json!({
        "hole": m.hole,
        "scale": m.scale,
        "branch": m.branch,
        "k1": m.k1,
        "k2": m.k2,
        "min_factor": m.min_factor,
        "kappa_est": m.kappa_est,
        "dominates_flat": pass,
        "samples": m.samples.len(),
    });
    Ok(Report::new(summary, Verdict::from_pass(pass)).table(t).parameter("hole", a.hole).parameter("scale", a.scale))
}

fn pipeline_options(common: &Common, c: Constants, pairs: usize, points: usize) -> PipelineOptions {
    let mut o = PipelineOptions {
        horizon: horizon_options(common, c, false),
        pair_count: pairs,
        seed: common.seed,
        ..Default::default()
    };
    o.volume = VolumeBudget { points, seed: common.seed, ..o.volume };
    o
}

fn choose_eps(holes: &HoleSet, a: &FlatArgs, c: &Constants) -> f64 {
    a.eps.or_else(|| smallest_feasible_eps(holes, a.radius, c)).unwrap_or(0.5 * c.eps0)
}

/// Gates first, so an unmet hypothesis is reported before any solver runs.
fn pipeline_params(holes: &HoleSet, a: &FlatArgs, c: &Constants, o: &PipelineOptions) -> Result<PipelineParams> {
    let eps = choose_eps(holes, a, c);
    evaluate_gates(holes, a.radius, eps, c).require()?;
    let gamma_i = horizon_gammas(holes, &o.horizon)?;
    Ok(params(holes, a.radius, eps, &gamma_i, c)?)
}

fn flat_report(summary: Value, pass: bool, a: &FlatArgs, p: &PipelineParams, o: &PipelineOptions) -> Report {
    Report::new(summary, Verdict::from_pass(pass))
        .tolerance("solver", o.horizon.tol)
        .parameter("R", a.radius)
        .parameter("eps", p.eps)
        .parameter("eps_source", if a.eps.is_some() { "flag" } else { "smallest feasible" })
        .parameter("pairs", a.pairs)
        .parameter("points", a.points)
}

fn lambda(a: &FlatArgs) -> Result<Report> {
    let holes = load_holes(&a.common)?;
    let (c, _) = resolve_constants(&a.common, Some(&holes))?;
    let o = pipeline_options(&a.common, c, a.pairs, a.points);
    let p = pipeline_params(&holes, a, &c, &o)?;
    let l = lambda_estimate(&holes, &p, a.pairs, a.common.seed, &PathOptions::default())?;
    let w = &l.worst;
    let mut t = Table::new(&["quantity", "value"]);
    for (k, v) in [
        ("lambda_numeric", l.lambda_numeric),
        ("lambda_analytic", l.lambda_analytic),
        ("worst_chord", w.chord),
        ("worst_path_length", w.path_length),
    ] {
        t.push(vec![k.into(), num(v)]);
    }
    let pass = l.pass;
    Ok(flat_report(json!({ "params": p, "lambda": l }), pass, a, &p, &o).table(t))
}

fn volumes(a: &FlatArgs) -> Result<Report> {
    let holes = load_holes(&a.common)?;
    let (c, _) = resolve_constants(&a.common, Some(&holes))?;
    let o = pipeline_options(&a.common, c, a.pairs, a.points);
    let p = pipeline_params(&holes, a, &c, &o)?;
    let w = region_w(&holes, &p, p.lambda, o.pinch_samples, a.common.seed)?;
    let v = volume_report(&holes, &p, &w, &extracted_constants(&c), &o.volume)?;
    let mut t = Table::new(&["quantity", "value", "error", "bound", "pass"]);
    for (k, b) in [
        ("vol_g_w", &v.vol_g_w),
        ("area_g_boundary", &v.area_g_boundary),
        ("excess_g", &v.excess_g),
        ("excess_delta", &v.excess_delta),
    ] {
        t.push(vec![k.into(), num(b.value), num(b.error), num(b.bound), b.pass.to_string()]);
    }
    t.push(vec!["vol_delta_w".into(), num(v.vol_delta_w), String::new(), String::new(), String::new()]);
    t.push(vec!["area_delta_boundary".into(), num(v.area_delta_boundary), String::new(), String::new(), String::new()]);
    t.push(vec![
        "excess_delta_sampled".into(),
        num(v.excess_delta_sampled),
        num(v.excess_delta_sampled_error),
        String::new(),
        v.sampled_matches_closed_form.to_string(),
    ]);
    let pass = v.pass && w.pinch.pass && w.pieces_disjoint;
    Ok(flat_report(json!({ "params": p, "region": w, "volumes": v }), pass, a, &p, &o).table(t))
}

fn flat_distance(a: &FlatArgs) -> Result<Report> {
    let holes = load_holes(&a.common)?;
    let (c, _) = resolve_constants(&a.common, Some(&holes))?;
    let o = pipeline_options(&a.common, c, a.pairs, a.points);
    let eps = choose_eps(&holes, a, &c);
    let est = main_bound(&holes, a.radius, eps, &o)?;
    let mut t = Table::new(&["quantity", "numeric", "envelope"]);
    t.push(vec!["dF".into(), num(est.numeric.d_f), num(est.envelope.d_f)]);
    t.push(vec!["dDF".into(), num(est.numeric.d_df), num(est.envelope.d_df)]);
    t.push(vec!["a".into(), num(est.numeric.a), num(est.envelope.a_bound)]);
    t.push(vec!["2hbar+a".into(), num(2.0 * est.numeric.hbar + est.numeric.a), num(est.envelope.width_bound)]);
    let pass = est.pass;
    let p = est.params.clone();
    Ok(flat_report(serde_json::to_value(&est)?, pass, a, &p, &o).table(t))
}

fn converge(a: &ConvergeArgs) -> Result<Report> {
    let Some(path) = a.common.config_path() else { bail!(crate::UsageError("a sequence file is required".into())) };
    let spec: SequenceSpec = serde_json::from_str(&read_config(path)?)
        .map_err(|e| geostatic::Error::Parse(e.to_string()))
        .with_context(|| format!("in {}", path.display()))?;
    if a.common.kappa == Some(ConstantArg::Auto) || a.common.i0 == Some(ConstantArg::Auto) {
        bail!(crate::UsageError("`auto` constants are not supported for sequences".into()));
    }
    let (c, _) = resolve_constants(&a.common, None)?;
    let o = pipeline_options(&a.common, c, a.pairs, a.points);
    let table = convergence_run(&spec, a.radius, &o)?;
    let mut t = Table::new(&[
        "k",
        "m",
        "sigma",
        "eps",
        "lambda_numeric",
        "lambda_analytic",
        "dF_numeric",
        "dF_envelope",
        "dDF_numeric",
    ]);
    for r in &table.rows {
        t.push(vec![
            r.k.to_string(),
            num(r.m),
            num(r.sigma),
            opt(r.eps),
            opt(r.lambda_numeric),
            opt(r.lambda_analytic),
            opt(r.d_f_numeric),
            opt(r.d_f_envelope),
            opt(r.d_df_numeric),
        ]);
    }
    let pass = table.strictly_decreasing && table.rows.iter().all(|r| r.pipeline_pass != Some(false));
    let mut r = Report::new(serde_json::to_value(&table)?, Verdict::from_pass(pass))
        .table(t)
        .tolerance("solver", o.horizon.tol)
        .parameter("R", a.radius)
        .parameter("sequence", &spec)
        .parameter("pairs", a.pairs)
        .parameter("points", a.points);
    if a.common.svg {
        let pts = |f: fn(&geostatic::flatdist::ConvergenceRow) -> Option<f64>| {
            table.rows.iter().filter_map(|r| Some((r.m, f(r)?))).collect::<Vec<_>>()
        };
        r.svg = Some(
            Plot {
                title: format!("flat-distance bound along the sequence, R = {}", a.radius),
                x_label: "m".into(),
                y_label: "dF".into(),
                log: true,
                equal_aspect: false,
                series: vec![
                    Series { label: "dF numeric".into(), points: pts(|r| r.d_f_numeric), style: Style::Line },
                    Series { label: "dF envelope".into(), points: pts(|r| r.d_f_envelope), style: Style::Line },
                ],
            }
            .render(),
        );
    }
    Ok(r)
}

pub fn run(command: &Command) -> Result<Report> {
    match command {
        Command::Masses(c) => masses(c),
        Command::Horizon(a) => horizon(a),
        Command::Outermost(c) => outermost(c),
        Command::Locate(c) => locate(c),
        Command::Penrose(c) => penrose(c),
        Command::Constraints(a) => constraints(a),
        Command::Invert(a) => inversion(a),
        Command::Annulus(a) => annulus(a),
        Command::Lambda(a) => lambda(a),
        Command::Volumes(a) => volumes(a),
        Command::FlatDistance(a) => flat_distance(a),
        Command::Converge(a) => converge(a),
    }
}
