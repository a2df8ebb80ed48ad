//! Checks that sampled trajectories solve `x' = A(t) x + f(t)`.
//!
//! All distances are max-norms over the `4n` real components.

use crate::error::{Error, Result};
use crate::expr::{ExprMatrix, ExprVector};
use crate::linalg::QVector;
use crate::ode::SolutionTable;

pub const MIN_SAMPLES: usize = 5;

/// Finite-difference derivative of the samples. Interior points use the
/// three-point central formula on a possibly uneven grid, endpoints the
/// second-order one-sided formula.
pub fn derivative(times: &[f64], values: &[QVector]) -> Result<Vec<QVector>> {
    let m = times.len();
    if m < 3 || values.len() != m {
        return Err(Error::TooFewSamples {
            need: 3,
            got: m.min(values.len()),
        });
    }
    let combine = |w: [f64; 3], idx: [usize; 3]| -> QVector {
        let n = values[idx[0]].len();
        QVector(
            (0..n)
                .map(|r| {
                    values[idx[0]][r] * w[0] + values[idx[1]][r] * w[1] + values[idx[2]][r] * w[2]
                })
                .collect(),
        )
    };
    let mut out = Vec::with_capacity(m);
    {
        let (h1, h2) = (times[1] - times[0], times[2] - times[1]);
        out.push(combine(
            [
                -(2.0 * h1 + h2) / (h1 * (h1 + h2)),
                (h1 + h2) / (h1 * h2),
                -h1 / (h2 * (h1 + h2)),
            ],
            [0, 1, 2],
        ));
    }
    for s in 1..m - 1 {
        let (h1, h2) = (times[s] - times[s - 1], times[s + 1] - times[s]);
        out.push(combine(
            [
                -h2 / (h1 * (h1 + h2)),
                (h2 - h1) / (h1 * h2),
                h1 / (h2 * (h1 + h2)),
            ],
            [s - 1, s, s + 1],
        ));
    }
    {
        let (h1, h2) = (times[m - 2] - times[m - 3], times[m - 1] - times[m - 2]);
        out.push(combine(
            [
                h2 / (h1 * (h1 + h2)),
                -(h1 + h2) / (h1 * h2),
                (2.0 * h2 + h1) / (h2 * (h1 + h2)),
            ],
            [m - 3, m - 2, m - 1],
        ));
    }
    Ok(out)
}

/// `‖D_h φ(t) − A(t) φ(t) − f(t)‖_max` at every sample.
pub fn residuals(
    times: &[f64],
    values: &[QVector],
    a: &ExprMatrix,
    f: &ExprVector,
) -> Result<Vec<f64>> {
    if times.len() < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            need: MIN_SAMPLES,
            got: times.len(),
        });
    }
    let d = derivative(times, values)?;
    times
        .iter()
        .zip(values)
        .zip(&d)
        .map(|((&t, x), dx)| {
            let ax = a.eval(t)?.checked_mul_vec(x)?;
            Ok((&(dx - &ax) - &f.eval(t)?).max_abs())
        })
        .collect()
}

/// Largest residual over the interior samples. Per-sample residuals,
/// endpoints included, are stored in `sol.residuals`.
pub fn residual_max(sol: &mut SolutionTable, a: &ExprMatrix, f: &ExprVector) -> Result<f64> {
    let r = residuals(&sol.times, &sol.values, a, f)?;
    let worst = r[1..r.len() - 1].iter().copied().fold(0.0, f64::max);
    sol.residuals = r;
    Ok(worst)
}

/// Residual at `t` from a fourth-order five-point stencil of width `h`
/// applied to an evaluable solution.
pub fn pointwise_residual<F>(x: F, a: &ExprMatrix, f: &ExprVector, t: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<QVector>,
{
    let (p2, p1, m1, m2) = (x(t + 2.0 * h)?, x(t + h)?, x(t - h)?, x(t - 2.0 * h)?);
    let dx = QVector(
        (0..p1.len())
            .map(|r| (m2[r] - p2[r] + (p1[r] - m1[r]) * 8.0) / (12.0 * h))
            .collect(),
    );
    let rhs = &a.eval(t)?.checked_mul_vec(&x(t)?)? + &f.eval(t)?;
    Ok((&dx - &rhs).max_abs())
}

fn distance(x: &QVector, y: &QVector) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!(
            "vectors of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok(x.max_abs_diff(y))
}

/// Sup-norm distance between the table and a reference evaluated at its
/// sample times.
pub fn compare(sol: &SolutionTable, reference: &ExprVector) -> Result<f64> {
    let mut worst = 0.0f64;
    for (&t, v) in sol.times.iter().zip(&sol.values) {
        worst = worst.max(distance(v, &reference.eval(t)?)?);
    }
    Ok(worst)
}

/// Sup-norm distance between two tables sampled at the same times.
pub fn compare_tables(x: &SolutionTable, y: &SolutionTable) -> Result<f64> {
    if x.times != y.times {
        return Err(Error::Shape("tables are sampled at different times".into()));
    }
    let mut worst = 0.0f64;
    for (u, v) in x.values.iter().zip(&y.values) {
        worst = worst.max(distance(u, v)?);
    }
    Ok(worst)
}

/// The reference evaluated at each time.
pub fn sample(reference: &ExprVector, times: &[f64]) -> Result<Vec<QVector>> {
    times.iter().map(|&t| reference.eval(t)).collect()
}
