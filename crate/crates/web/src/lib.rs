//! WebAssembly bindings for the browser demo.
//!
//! Each exported function takes plain strings and numbers and returns a
//! JSON document, or throws a string on invalid input. The JSON-producing
//! cores are ordinary Rust functions so they can be tested natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use mvt2d::expr::Expression;
use mvt2d::hyperdual::{eval_hyperdual, finite_difference_oracle, max_relative_error, HyperDual};
use mvt2d::locator::{locate, LocateConfig, Method, Outcome};
use mvt2d::theorems::{Instance, Rectangle, ResidualField, TheoremCase, TheoremTag};

/// Largest heatmap resolution accepted.
pub const MAX_GRID: usize = 400;

fn field(theorem: &str, f: &str, g: &str, rect: [f64; 4]) -> Result<ResidualField, String> {
    let tag: TheoremTag = theorem
        .parse()
        .map_err(|e: mvt2d::theorems::UnknownTheorem| e.to_string())?;
    if tag.is_interval() {
        return Err(format!("{tag} is one-dimensional; the demo plots planar theorems only"));
    }
    let f = Expression::parse(f).map_err(|e| format!("f: {e}"))?;
    let g = if tag.needs_g() {
        Some(Expression::parse(g).map_err(|e| format!("g: {e}"))?)
    } else {
        None
    };
    let [x1, x2, y1, y2] = rect;
    let r = Rectangle::new(x1, x2, y1, y2).map_err(|e| e.to_string())?;
    match TheoremCase::new(tag, f, g)
        .and_then(|c| c.build(&r))
        .map_err(|e| e.to_string())?
    {
        Instance::Planar(field) => Ok(field),
        Instance::Interval(_) => unreachable!("interval tags rejected above"),
    }
}

#[derive(Debug, Serialize)]
struct GridOut {
    n: usize,
    scale: f64,
    min: f64,
    max: f64,
    /// Row-major, `y` increasing by row; `null` where evaluation failed.
    values: Vec<Option<f64>>,
}

/// Residual values at the cell centres of an `n × n` grid.
pub fn residual_grid_json(theorem: &str, f: &str, g: &str, rect: [f64; 4], n: usize) -> Result<String, String> {
    if !(2..=MAX_GRID).contains(&n) {
        return Err(format!("grid size must be between 2 and {MAX_GRID}"));
    }
    let field = field(theorem, f, g, rect)?;
    let r = field.rect;
    let (dx, dy) = (r.width() / n as f64, r.height() / n as f64);
    let mut values = Vec::with_capacity(n * n);
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for j in 0..n {
        let y = r.y1 + (j as f64 + 0.5) * dy;
        for i in 0..n {
            let x = r.x1 + (i as f64 + 0.5) * dx;
            let v = field.eval(x, y).ok().filter(|v| v.is_finite());
            if let Some(v) = v {
                min = min.min(v);
                max = max.max(v);
            }
            values.push(v);
        }
    }
    let doc = GridOut {
        n,
        scale: field.scale,
        min,
        max,
        values,
    };
    serde_json::to_string(&doc).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
struct LocateOut {
    outcome: Outcome,
    xi1: Option<f64>,
    xi2: Option<f64>,
    residual: Option<f64>,
    method: Option<Method>,
    scale: f64,
    evaluations: usize,
    message: Option<String>,
}

/// Locate a mean-value point with the default configuration.
pub fn locate_json(theorem: &str, f: &str, g: &str, rect: [f64; 4]) -> Result<String, String> {
    let field = field(theorem, f, g, rect)?;
    let report = locate(&field, &LocateConfig::default()).map_err(|e| e.to_string())?;
    let p = report.point;
    let doc = LocateOut {
        outcome: report.outcome,
        xi1: p.map(|p| p.xi1),
        xi2: p.map(|p| p.xi2),
        residual: p.map(|p| p.residual),
        method: p.map(|p| p.method),
        scale: field.scale,
        evaluations: report.diagnostics.evaluations,
        message: report.diagnostics.message,
    };
    serde_json::to_string(&doc).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
struct GradOut {
    hyperdual: HyperDual,
    finite_difference: HyperDual,
    max_rel_error: f64,
}

/// Hyper-dual derivatives of `f` at `(x, y)` next to finite differences.
pub fn grad_check_json(f: &str, x: f64, y: f64) -> Result<String, String> {
    let f = Expression::parse(f).map_err(|e| e.to_string())?;
    let hd = eval_hyperdual(&f, x, y).map_err(|e| e.to_string())?;
    let fd = finite_difference_oracle(&f, x, y).map_err(|e| e.to_string())?;
    let doc = GradOut {
        max_rel_error: max_relative_error(&hd, &fd),
        hyperdual: hd,
        finite_difference: fd,
    };
    serde_json::to_string(&doc).map_err(|e| e.to_string())
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen(js_name = residualGrid)]
pub fn residual_grid(
    theorem: &str,
    f: &str,
    g: &str,
    x1: f64,
    x2: f64,
    y1: f64,
    y2: f64,
    n: usize,
) -> Result<String, JsValue> {
    residual_grid_json(theorem, f, g, [x1, x2, y1, y2], n).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = locatePoint)]
pub fn locate_point(theorem: &str, f: &str, g: &str, x1: f64, x2: f64, y1: f64, y2: f64) -> Result<String, JsValue> {
    locate_json(theorem, f, g, [x1, x2, y1, y2]).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = gradCheck)]
pub fn grad_check(f: &str, x: f64, y: f64) -> Result<String, JsValue> {
    grad_check_json(f, x, y).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn grid_of_rmvt() {
        let doc: Value =
            serde_json::from_str(&residual_grid_json("rmvt", "x^2*y", "", [0.0, 1.0, 0.0, 1.0], 4).unwrap()).unwrap();
        assert_eq!(doc["n"], 4);
        let values = doc["values"].as_array().unwrap();
        assert_eq!(values.len(), 16);
        // R = 1 - 2x at cell centres 0.125, 0.375, 0.625, 0.875
        assert_eq!(values[0].as_f64().unwrap(), 0.75);
        assert_eq!(values[3].as_f64().unwrap(), -0.75);
    }

    #[test]
    fn locate_pompeiu() {
        let doc: Value =
            serde_json::from_str(&locate_json("pompeiu2d", "x^2*y^2", "", [1.0, 2.0, 1.0, 3.0]).unwrap()).unwrap();
        assert_eq!(doc["outcome"], "found");
        let p = doc["xi1"].as_f64().unwrap() * doc["xi2"].as_f64().unwrap();
        assert!((p - 6f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn grad_check_xy() {
        let doc: Value = serde_json::from_str(&grad_check_json("x*y", 0.3, -2.0).unwrap()).unwrap();
        assert_eq!(doc["hyperdual"]["dxy"], 1.0);
    }

    #[test]
    fn errors_are_messages() {
        assert!(locate_json("pompeiu2d", "x*y", "", [-1.0, 2.0, 1.0, 3.0])
            .unwrap_err()
            .contains("coordinate axes"));
        assert!(locate_json("pompeiu1d", "x", "", [1.0, 2.0, 1.0, 3.0]).is_err());
        assert!(locate_json("rcmvt", "x", "", [0.0, 1.0, 0.0, 1.0])
            .unwrap_err()
            .starts_with("g:"));
        assert!(residual_grid_json("rmvt", "x", "", [0.0, 1.0, 0.0, 1.0], 1).is_err());
        assert!(grad_check_json("1/x", 0.0, 1.0).is_err());
        assert!(grad_check_json("2*+x", 0.0, 1.0).is_err());
    }
}
