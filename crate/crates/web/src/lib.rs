//! Browser bindings for the solver. Every export takes and returns strings
//! (JSON where structured) so the page needs no generated types.

use quatode::cli::{execute, parse_problem, tidy, Format, ModeName, Options};
use quatode::expr::{Expr, ExprMatrix};
use quatode::linalg::{ddet, det_p, inverse_via_adjoint, right_eigenpairs, DETP_MAX_N};
use quatode::QMatrix;
use serde_json::{json, Value};

#[cfg(target_arch = "wasm32")]
use wasm_bindgen::prelude::*;

/// Solves an `ivp` or `periodic` problem file and returns the solution table
/// as JSON, residuals included.
#[cfg_attr(target_arch = "wasm32", wasm_bindgen)]
pub fn solve(problem: &str) -> Result<String, String> {
    let p = parse_problem(problem).map_err(|e| e.to_string())?;
    if !matches!(p.mode, ModeName::Ivp | ModeName::Periodic) {
        return Err("the demo solves modes \"ivp\" and \"periodic\" only".into());
    }
    let opts = Options {
        format: Format::Json,
        verify: true,
        ..Options::default()
    };
    execute(&p, &opts)
        .map(|r| r.body)
        .map_err(|e| e.to_string())
}

fn text_matrix(m: &QMatrix) -> Value {
    let scale = m.max_abs();
    m.to_rows()
        .iter()
        .map(|row| {
            row.iter()
                .map(|&q| tidy(q, scale).to_string())
                .collect::<Vec<_>>()
        })
        .collect()
}

fn part<T>(r: quatode::Result<T>, show: impl FnOnce(T) -> Value) -> Value {
    match r {
        Ok(v) => json!({ "ok": show(v) }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

/// Determinants, inverse and right eigenvalues of a constant matrix given as
/// a JSON array of rows of expression strings, evaluated at `t = 0`.
#[cfg_attr(target_arch = "wasm32", wasm_bindgen)]
pub fn analyze(rows: &str) -> Result<String, String> {
    let rows: Vec<Vec<String>> = serde_json::from_str(rows).map_err(|e| e.to_string())?;
    let a = ExprMatrix::parse(&rows)
        .and_then(|m| m.eval(0.0))
        .map_err(|e| e.to_string())?;
    if !a.is_square() {
        return Err(format!("matrix is {}x{}, not square", a.rows(), a.cols()));
    }
    let n = a.rows();
    let scale = a.max_abs();
    let detp = if n <= DETP_MAX_N {
        part(det_p(&a), |d| {
            json!(tidy(d, scale.powi(n as i32)).to_string())
        })
    } else {
        json!({ "error": format!("det_p is limited to n <= {DETP_MAX_N}") })
    };
    let out = json!({
        "n": n,
        "detp": detp,
        "ddet": part(ddet(&a), |d| json!(d)),
        "inverse": part(inverse_via_adjoint(&a), |m| text_matrix(&m)),
        "eigenvalues": part(right_eigenpairs(&a), |pairs| {
            pairs.iter().map(|p| tidy(p.lambda, scale).to_string()).collect::<Vec<_>>().into()
        }),
    });
    Ok(out.to_string())
}

/// Parses an expression and evaluates it at `t`.
#[cfg_attr(target_arch = "wasm32", wasm_bindgen)]
pub fn evaluate(src: &str, t: f64) -> Result<String, String> {
    let e: Expr = src.parse().map_err(|e: quatode::Error| e.to_string())?;
    let v = e.eval(t).map_err(|e| e.to_string())?;
    Ok(json!({
        "parsed": e.to_string(),
        "value": tidy(v, 1.0).to_string(),
        "components": v.to_array(),
    })
    .to_string())
}
