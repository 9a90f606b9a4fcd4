//! Browser bindings. Each operation is a plain function returning JSON so it
//! can be tested natively; the `wasm_bindgen` wrappers only convert errors.

use osproj_core::averaging::{cesaro_check, circle_projection, ergodic_projection, required_nodes};
use osproj_core::cbnorm::{cb_norm_lower, cb_norm_upper};
use osproj_core::linalg::op_norm;
use osproj_core::{CMatrix, SuperOp, C64};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest circle dimension the page offers.
pub const MAX_CIRCLE_DIM: usize = 6;
/// Largest Cesàro horizon the page plots.
pub const MAX_HORIZON: usize = 4096;
const CB_TOL: f64 = 1e-8;
const CB_RESTARTS: usize = 6;

fn rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// Circle projection for the given weights, applied to the all-ones matrix.
/// `nodes = 0` picks the smallest exact node count.
pub fn circle_demo(weights: &[i64], nodes: usize) -> Result<Value, String> {
    let d = weights.len();
    if d == 0 || d > MAX_CIRCLE_DIM {
        return Err(format!("between 1 and {MAX_CIRCLE_DIM} weights required"));
    }
    let required = required_nodes(weights);
    let nodes = if nodes == 0 { required } else { nodes };
    let p = circle_projection(weights, nodes).map_err(|e| e.to_string())?;
    let ones = CMatrix::from_fn(d, d, |_, _| C64::new(1.0, 0.0));
    let image = p.apply(&ones).map_err(|e| e.to_string())?;
    let pp = p.compose(&p).map_err(|e| e.to_string())?;
    let idempotency = (pp.natural() - p.natural()).max_abs();
    Ok(json!({
        "dim": d,
        "nodes": nodes,
        "required_nodes": required,
        "image_of_ones": rows(&image),
        "idempotency_defect": idempotency,
    }))
}

/// `λ·T + (1−λ)·id` on `M₂`, with `T` the transpose.
pub fn transpose_mixture(lambda: f64) -> Result<SuperOp, String> {
    if !lambda.is_finite() {
        return Err("λ must be finite".into());
    }
    SuperOp::transpose_map(2)
        .scale(C64::new(lambda, 0.0))
        .add(&SuperOp::identity(2).scale(C64::new(1.0 - lambda, 0.0)))
        .map_err(|e| e.to_string())
}

/// Plain norm estimate and cb-norm bounds of the transpose mixture.
pub fn cb_demo(lambda: f64, seed: u64) -> Result<Value, String> {
    let phi = transpose_mixture(lambda)?;
    let plain = cb_norm_lower(&phi, 1, CB_RESTARTS, seed).map_err(|e| e.to_string())?;
    let lower = cb_norm_lower(&phi, 2, CB_RESTARTS, seed).map_err(|e| e.to_string())?;
    let upper = cb_norm_upper(&phi, CB_TOL).map_err(|e| e.to_string())?;
    Ok(json!({
        "lambda": lambda,
        "plain_norm": plain.value,
        "cb_lower": lower.value,
        "cb_upper": upper.value,
        "sdp_iterations": upper.iterations,
    }))
}

/// `(1−γ)·Ad diag(1, e^{iθ}) + γ·id` on `M₂`.
pub fn rotation_channel(theta: f64, gamma: f64) -> Result<SuperOp, String> {
    if !(theta.is_finite() && (0.0..=1.0).contains(&gamma)) {
        return Err("θ must be finite and γ in [0, 1]".into());
    }
    let u = CMatrix::diag(&[C64::new(1.0, 0.0), C64::from_polar(1.0, theta)]);
    let rot = SuperOp::unitary_conjugation(&u).map_err(|e| e.to_string())?;
    rot.scale(C64::new(1.0 - gamma, 0.0))
        .add(&SuperOp::identity(2).scale(C64::new(gamma, 0.0)))
        .map_err(|e| e.to_string())
}

/// `‖A_N − P‖` for `N = 1..=horizon` next to the bound `C/N`.
pub fn cesaro_demo(theta: f64, gamma: f64, horizon: usize) -> Result<Value, String> {
    if horizon == 0 || horizon > MAX_HORIZON {
        return Err(format!("horizon must be in 1..={MAX_HORIZON}"));
    }
    let phi = rotation_channel(theta, gamma)?;
    let (p, _) = ergodic_projection(&phi, 0).map_err(|e| e.to_string())?;
    let c = cesaro_check(&phi, &p, horizon.max(4)).bound_constant;
    let mut power = SuperOp::identity(2);
    let mut sum = SuperOp::zero(2, 2);
    let mut errors = Vec::with_capacity(horizon);
    for n in 1..=horizon {
        sum = sum.add(&power).map_err(|e| e.to_string())?;
        power = power.compose(&phi).map_err(|e| e.to_string())?;
        let mean = sum.scale(C64::new(1.0 / n as f64, 0.0));
        errors.push(op_norm(&(mean.natural() - p.natural())).map_err(|e| e.to_string())?);
    }
    let fixed_dim = (0..4).filter(|&i| p.natural()[(i, i)].re > 0.5).count();
    Ok(json!({
        "theta": theta,
        "gamma": gamma,
        "bound_constant": c,
        "fixed_dim": fixed_dim,
        "errors": errors,
    }))
}

fn to_js(r: Result<Value, String>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = circleProjection)]
pub fn circle_projection_js(weights: Vec<i32>, nodes: usize) -> Result<String, JsError> {
    let w: Vec<i64> = weights.into_iter().map(i64::from).collect();
    to_js(circle_demo(&w, nodes))
}

#[wasm_bindgen(js_name = cbBounds)]
pub fn cb_bounds_js(lambda: f64, seed: u32) -> Result<String, JsError> {
    to_js(cb_demo(lambda, u64::from(seed)))
}

#[wasm_bindgen(js_name = cesaroCurve)]
pub fn cesaro_curve_js(theta: f64, gamma: f64, horizon: usize) -> Result<String, JsError> {
    to_js(cesaro_demo(theta, gamma, horizon))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_keeps_equal_weight_entries() {
        let v = circle_demo(&[0, 1, 0], 0).unwrap();
        assert_eq!(v["nodes"], 3);
        let img = &v["image_of_ones"];
        for i in 0..3 {
            for j in 0..3 {
                let keep = (i == 1) == (j == 1);
                let re = img[i][j][0].as_f64().unwrap();
                assert!((re - if keep { 1.0 } else { 0.0 }).abs() < 1e-13, "({i},{j}) = {re}");
            }
        }
        assert!(v["idempotency_defect"].as_f64().unwrap() < 1e-13);
    }

    #[test]
    fn circle_rejects_bad_input() {
        assert!(circle_demo(&[], 0).is_err());
        assert!(circle_demo(&[0, 2], 3).is_err());
    }

    #[test]
    fn transpose_mixture_bounds() {
        // Full transpose: plain norm 1, cb norm 2.
        let v = cb_demo(1.0, 1).unwrap();
        assert!((v["plain_norm"].as_f64().unwrap() - 1.0).abs() < 1e-6);
        assert!((v["cb_lower"].as_f64().unwrap() - 2.0).abs() < 1e-4);
        assert!((v["cb_upper"].as_f64().unwrap() - 2.0).abs() < 1e-4);
        let v = cb_demo(0.0, 1).unwrap();
        assert!((v["cb_upper"].as_f64().unwrap() - 1.0).abs() < 1e-6);
        let v = cb_demo(0.5, 3).unwrap();
        assert!(v["cb_lower"].as_f64().unwrap() <= v["cb_upper"].as_f64().unwrap() + 1e-6);
    }

    #[test]
    fn cesaro_errors_stay_below_bound() {
        let v = cesaro_demo(1.0, 0.2, 200).unwrap();
        assert_eq!(v["fixed_dim"], 2);
        let c = v["bound_constant"].as_f64().unwrap();
        for (i, e) in v["errors"].as_array().unwrap().iter().enumerate() {
            let n = (i + 1) as f64;
            assert!(e.as_f64().unwrap() <= c / n * (1.0 + 1e-9) + 1e-15, "N={n}");
        }
        assert!(cesaro_demo(1.0, 2.0, 10).is_err());
        assert!(cesaro_demo(1.0, 0.5, 0).is_err());
    }
}
