//! Complex adjoint representation and the matrix exponential realized
//! through it.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::QMatrix;
use crate::error::{Error, Result};
use crate::quat::Quaternion;

pub type CMatrix = DMatrix<Complex64>;

/// Writes each entry `q = z₁ + z₂ j` (`z₁ = w + x i`, `z₂ = y + z i`) as the
/// block `[[z₁, z₂], [−z̄₂, z̄₁]]`. Entry `(r, c)` occupies rows `2r..2r+2`
/// and columns `2c..2c+2`. The map is a ring homomorphism.
pub fn complex_adjoint(a: &QMatrix) -> CMatrix {
    let mut m = CMatrix::zeros(2 * a.rows(), 2 * a.cols());
    for r in 0..a.rows() {
        for c in 0..a.cols() {
            let q = a[(r, c)];
            let z1 = Complex64::new(q.w, q.x);
            let z2 = Complex64::new(q.y, q.z);
            m[(2 * r, 2 * c)] = z1;
            m[(2 * r, 2 * c + 1)] = z2;
            m[(2 * r + 1, 2 * c)] = -z2.conj();
            m[(2 * r + 1, 2 * c + 1)] = z1.conj();
        }
    }
    m
}

/// Left inverse of [`complex_adjoint`]. Each 2×2 block is projected onto
/// the quaternionic form; a block that deviates by more than
/// `1e−9 · max(1, max|m_ij|)` is rejected.
pub fn from_complex_adjoint(m: &CMatrix) -> Result<QMatrix> {
    let (rows, cols) = m.shape();
    if rows % 2 != 0 || cols % 2 != 0 || rows == 0 || cols == 0 {
        return Err(Error::Shape(format!(
            "complex adjoint must have even positive dimensions, got {rows}x{cols}"
        )));
    }
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut deviation = 0.0f64;
    let q = QMatrix::from_fn(rows / 2, cols / 2, |r, c| {
        let a = m[(2 * r, 2 * c)];
        let b = m[(2 * r, 2 * c + 1)];
        let cc = m[(2 * r + 1, 2 * c)];
        let d = m[(2 * r + 1, 2 * c + 1)];
        deviation = deviation
            .max((a - d.conj()).norm())
            .max((b + cc.conj()).norm());
        let z1 = (a + d.conj()) * 0.5;
        let z2 = (b - cc.conj()) * 0.5;
        Quaternion::new(z1.re, z1.im, z2.re, z2.im)
    });
    if deviation > 1e-9 * scale {
        return Err(Error::NotQuaternionic { deviation });
    }
    Ok(q)
}

/// `exp(A t)`, computed on the complex adjoint.
pub fn expm(a: &QMatrix, t: f64) -> Result<QMatrix> {
    a.require_square()?;
    let m = complex_adjoint(a) * Complex64::new(t, 0.0);
    from_complex_adjoint(&complex_expm(&m))
}

/// Inverse through LU on the complex adjoint; used where the entrywise
/// formula is too expensive (large `n`).
pub fn inverse_via_adjoint(a: &QMatrix) -> Result<QMatrix> {
    a.require_square()?;
    let inv = complex_adjoint(a)
        .try_inverse()
        .ok_or(Error::Singular { ddet: 0.0 })?;
    from_complex_adjoint(&inv)
}

const PADE_3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE_5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE_7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE_9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Backward-error bounds on ‖A‖₁ for degrees 3, 5, 7, 9, 13.
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152;

fn norm1(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn scaled(m: &CMatrix, s: f64) -> CMatrix {
    m * Complex64::new(s, 0.0)
}

/// Scaling-and-squaring with a diagonal Padé approximant of degree 3–13.
pub fn complex_expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    let id = CMatrix::identity(n, n);
    let norm = norm1(a);

    for &(deg, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match deg {
                3 => &PADE_3,
                5 => &PADE_5,
                7 => &PADE_7,
                _ => &PADE_9,
            };
            let (u, v) = pade_low(a, coeffs, &id);
            return solve_pade(&u, &v);
        }
    }

    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = scaled(a, 0.5f64.powi(s));
    let b = &PADE_13;
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * (scaled(&a6, b[13]) + scaled(&a4, b[11]) + scaled(&a2, b[9]))
        + scaled(&a6, b[7])
        + scaled(&a4, b[5])
        + scaled(&a2, b[3])
        + scaled(&id, b[1]);
    let u = &a * inner_u;
    let v = &a6 * (scaled(&a6, b[12]) + scaled(&a4, b[10]) + scaled(&a2, b[8]))
        + scaled(&a6, b[6])
        + scaled(&a4, b[4])
        + scaled(&a2, b[2])
        + scaled(&id, b[0]);
    let mut r = solve_pade(&u, &v);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

fn pade_low(a: &CMatrix, b: &[f64], id: &CMatrix) -> (CMatrix, CMatrix) {
    let a2 = a * a;
    let mut power = id.clone();
    let mut u_inner = scaled(id, b[1]);
    let mut v = scaled(id, b[0]);
    for k in 1..b.len() / 2 {
        power = &power * &a2;
        u_inner += scaled(&power, b[2 * k + 1]);
        v += scaled(&power, b[2 * k]);
    }
    (a * u_inner, v)
}

fn solve_pade(u: &CMatrix, v: &CMatrix) -> CMatrix {
    (v - u)
        .lu()
        .solve(&(v + u))
        .expect("Padé denominator is nonsingular within the theta bounds")
}
