//! Browser bindings for the three demo views. Each operation is a plain
//! function returning a JSON value or a flat array, so it can be tested
//! natively; the `#[wasm_bindgen]` wrappers only convert types.

use nalgebra::DVector;
use serde_json::{json, Value};
use sublab::classify::analyze_point;
use sublab::corpus::{fixture, radial_oracle};
use sublab::oneill::{curvature_check, default_planes, BracketExtension, PointJet};
use sublab::{ComplexStructure, MapDefinition, Params, ProjectorField, StructureField, Tolerances};
use wasm_bindgen::prelude::*;

/// Spectrum, dimensions and θ of `source` at `point` under the standard J.
pub fn analyze(source: &str, point: &[f64], params: &Params) -> Result<Value, String> {
    let map = MapDefinition::parse(source).map_err(|e| e.to_string())?;
    let j = ComplexStructure::standard(map.domain_dim).map_err(|e| e.to_string())?;
    let a = analyze_point(&map, &j, params, point, Tolerances::default()).map_err(|e| e.to_string())?;
    if let Some(e) = &a.error {
        return Err(e.to_string());
    }
    let ops = a.ops.as_ref().ok_or("no decomposition at this point")?;
    Ok(json!({
        "m": map.domain_dim,
        "n": map.codomain_dim,
        "sigma_sq": a.sigma_sq(),
        "theta": a.theta(),
        "multiple_angles": a.multiple_angles,
        "submersion_residual": a.submersion_residual,
        "dims": {
            "vertical": ops.vertical.dim(),
            "horizontal": ops.horizontal.dim(),
            "d1": ops.d1.dim(),
            "d2": ops.d2.dim(),
            "mu": ops.mu.dim(),
        },
    }))
}

/// θ of the two-parameter example on a `steps × steps` grid, row-major with
/// β along rows and α along columns. NaN where θ is undefined.
pub fn theta_grid(a: (f64, f64), b: (f64, f64), steps: usize) -> Result<Vec<f64>, String> {
    let f = fixture("ex4_7").ok_or("missing fixture")?;
    let map = f.map();
    let j = f.structure();
    let point = [0.3, -0.7, 1.1, 0.2, -0.4, 0.9, 0.5, -1.3];
    let at = |lo: f64, hi: f64, i: usize| if steps < 2 { lo } else { lo + (hi - lo) * i as f64 / (steps - 1) as f64 };
    let mut out = Vec::with_capacity(steps * steps);
    for k in 0..steps {
        for i in 0..steps {
            let params = Params::from([("alpha".to_string(), at(a.0, a.1, i)), ("beta".to_string(), at(b.0, b.1, k))]);
            let theta = analyze_point(&map, &j, &params, &point, Tolerances::default())
                .ok()
                .and_then(|r| if r.multiple_angles { None } else { r.theta() });
            out.push(theta.unwrap_or(f64::NAN));
        }
    }
    Ok(out)
}

/// Rows `[r, |T_X X|, K̂, 1/r², imbalance]` for the radial map, sampled on
/// the diagonal ray at radii `r_min..=r_max`. Rows that fail are NaN.
pub fn radial_rows(r_min: f64, r_max: f64, steps: usize) -> Result<Vec<[f64; 5]>, String> {
    if !(r_min > 0.0 && r_max >= r_min) {
        return Err("need 0 < r_min ≤ r_max".into());
    }
    let f = fixture("radial").ok_or("missing fixture")?;
    let map = f.map();
    let field = ProjectorField::new(&map, &Params::new(), StructureField::Constant(f.structure()), Tolerances::default())
        .map_err(|e| e.to_string())?;
    let mut rows = Vec::with_capacity(steps);
    for i in 0..steps {
        let r = if steps < 2 { r_min } else { r_min + (r_max - r_min) * i as f64 / (steps - 1) as f64 };
        let q = DVector::from_element(4, r / 2.0);
        let row = (|| {
            let jet = PointJet::new(&field, &q).ok()?;
            let [(_, plane), ..] = default_planes(&jet);
            let plane = plane?;
            let x = plane.u.normalize();
            let rec = curvature_check(&jet, &plane, BracketExtension::Mu).ok()?;
            let k_hat = rec.terms.iter().find(|(n, _)| *n == "fiber-curvature")?.1;
            Some([r, jet.tensor_t(&x, &x).norm(), k_hat, radial_oracle::fiber_curvature(r), rec.imbalance])
        })();
        rows.push(row.unwrap_or([r, f64::NAN, f64::NAN, f64::NAN, f64::NAN]));
    }
    Ok(rows)
}

#[wasm_bindgen(js_name = analyzeMap)]
pub fn analyze_map(source: &str, point: &[f64], params_json: &str) -> Result<String, JsError> {
    let params: Params = if params_json.trim().is_empty() {
        Params::new()
    } else {
        serde_json::from_str(params_json)?
    };
    let v = analyze(source, point, &params).map_err(|e| JsError::new(&e))?;
    Ok(v.to_string())
}

#[wasm_bindgen(js_name = thetaHeatmap)]
pub fn theta_heatmap(a_min: f64, a_max: f64, b_min: f64, b_max: f64, steps: usize) -> Result<Vec<f64>, JsError> {
    theta_grid((a_min, a_max), (b_min, b_max), steps).map_err(|e| JsError::new(&e))
}

/// Flattened rows of five, see [`radial_rows`].
#[wasm_bindgen(js_name = radialCurvature)]
pub fn radial_curvature(r_min: f64, r_max: f64, steps: usize) -> Result<Vec<f64>, JsError> {
    let rows = radial_rows(r_min, r_max, steps).map_err(|e| JsError::new(&e))?;
    Ok(rows.into_iter().flatten().collect())
}
