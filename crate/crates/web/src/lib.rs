//! Browser bindings: a conformal-factor slice, a horizon cross-section and the
//! flat-distance envelope. Each export takes and returns JSON strings; the plain
//! functions below carry the logic and are what the native tests exercise.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use geostatic::flatdist::extracted_constants;
use geostatic::horizon::{constants, find_horizon, HorizonOptions};
use geostatic::{HoleSet, Vec3};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct Slice {
    pub n: usize,
    pub extent: f64,
    pub z: f64,
    /// ln Psi row-major from (-extent, -extent); null at holes.
    pub log_factor: Vec<Option<f64>>,
    pub max: f64,
}

/// ln Psi on an n x n grid over [-extent, extent]^2 at height z.
pub fn conformal_slice(config: &str, z: f64, extent: f64, n: usize) -> Result<Slice, String> {
    let holes = HoleSet::from_json(config).map_err(|e| e.to_string())?;
    if !(extent > 0.0) || !(2..=512).contains(&n) {
        return Err("extent must be positive and n in 2..=512".into());
    }
    let step = 2.0 * extent / (n - 1) as f64;
    let mut log_factor = Vec::with_capacity(n * n);
    let mut max = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            let x = Vec3::new(-extent + i as f64 * step, -extent + j as f64 * step, z);
            let v = (holes.hole_at(&x).is_none()).then(|| holes.factor(&x).ln()).filter(|v| v.is_finite());
            if let Some(v) = v {
                max = max.max(v);
            }
            log_factor.push(v);
        }
    }
    Ok(Slice { n, extent, z, log_factor, max })
}

#[derive(Debug, Serialize)]
pub struct Section {
    pub center: [f64; 3],
    pub mean_radius: f64,
    pub area: f64,
    pub scaled_residual: f64,
    /// Curve in the plane z = center.z.
    pub curve: Vec<[f64; 2]>,
    pub holes: Vec<[f64; 2]>,
}

/// Minimal surface around one hole on a 32 x 64 grid, sliced at its center height.
pub fn horizon_section(config: &str, hole: usize) -> Result<Section, String> {
    let holes = HoleSet::from_json(config).map_err(|e| e.to_string())?;
    let h = holes.hole(hole).map_err(|e| e.to_string())?;
    let opts = HorizonOptions { n_theta: 32, n_phi: 64, tol: 1e-8, ..Default::default() };
    let r = find_horizon(&holes, &h.position, 2.0 * h.weight(), &opts).map_err(|e| e.to_string())?;
    let curve = (0..=180)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / 180.0;
            let p = r.model.point(&Vec3::new(t.cos(), t.sin(), 0.0));
            [p.x, p.y]
        })
        .collect();
    Ok(Section {
        center: [h.position.x, h.position.y, h.position.z],
        mean_radius: r.mean_radius,
        area: r.area_g,
        scaled_residual: r.scaled_residual,
        curve,
        holes: holes.holes().iter().map(|h| [h.position.x, h.position.y]).collect(),
    })
}

#[derive(Debug, Serialize)]
pub struct EnvelopePoint {
    pub eps: f64,
    #[serde(rename = "dF")]
    pub d_f: f64,
    #[serde(rename = "dDF")]
    pub d_df: f64,
}

/// Closed-form dF and dDF envelopes at radius R for n values of eps spaced
/// geometrically from eps0 * 1e-4 up to just below eps0.
pub fn envelope_curve(radius: f64, kappa: f64, i0: f64, n: usize) -> Result<Vec<EnvelopePoint>, String> {
    if !(radius > 0.0) || n < 2 {
        return Err("R must be positive and n at least 2".into());
    }
    let c = constants(kappa, i0).map_err(|e| e.to_string())?;
    let k = extracted_constants(&c);
    let (lo, hi) = (c.eps0 * 1e-4, c.eps0 * (1.0 - 1e-9));
    Ok((0..n)
        .map(|i| {
            let eps = lo * (hi / lo).powf(i as f64 / (n - 1) as f64);
            let rs = radius.powi(2) * radius * eps.sqrt();
            EnvelopePoint { eps, d_f: (k.c_f_prime * radius + k.c_f_double_prime) * rs, d_df: k.c_df * rs }
        })
        .collect())
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string())).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = conformalSlice)]
pub fn conformal_slice_js(config: &str, z: f64, extent: f64, n: usize) -> Result<String, JsValue> {
    to_js(conformal_slice(config, z, extent, n))
}

#[wasm_bindgen(js_name = horizonSection)]
pub fn horizon_section_js(config: &str, hole: usize) -> Result<String, JsValue> {
    to_js(horizon_section(config, hole))
}

#[wasm_bindgen(js_name = envelopeCurve)]
pub fn envelope_curve_js(radius: f64, kappa: f64, i0: f64, n: usize) -> Result<String, JsValue> {
    to_js(envelope_curve(radius, kappa, i0, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    const S: &str = r#"{"holes":[{"p":[0,0,0],"alpha":0.5,"beta":0.5}]}"#;

    #[test]
    fn slice_matches_closed_form() {
        let s = conformal_slice(S, 0.0, 2.0, 5).unwrap();
        // Grid node (i, j) = (4, 2) is x = (2, 0, 0): Psi = (1 + 0.25)^2.
        let v = s.log_factor[2 * 5 + 4].unwrap();
        assert!((v - 2.0 * 1.25f64.ln()).abs() < 1e-14);
        assert!(s.log_factor[2 * 5 + 2].is_none());
        assert!(conformal_slice("{", 0.0, 1.0, 4).is_err());
    }

    #[test]
    fn section_of_schwarzschild() {
        let s = horizon_section(S, 0).unwrap();
        assert!((s.mean_radius - 0.5).abs() < 1e-6);
        assert!(s.curve.iter().all(|p| (p[0].hypot(p[1]) - 0.5).abs() < 1e-6));
    }

    #[test]
    fn envelope_scales_like_sqrt_eps() {
        let e = envelope_curve(10.0, 9.0, 1.0 / 3.0, 5).unwrap();
        let r = e[4].d_f / e[0].d_f;
        assert!((r - (e[4].eps / e[0].eps).sqrt()).abs() < 1e-9 * r);
        assert!(envelope_curve(-1.0, 9.0, 0.3, 5).is_err());
    }
}
