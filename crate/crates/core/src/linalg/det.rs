//! Permutation determinant `det_p`, the double determinant `ddet` and the
//! entrywise inverse built from them.

use super::perm::{for_each_permutation, NormalCycleForm};
use super::QMatrix;
use crate::error::{Error, Result};
use crate::quat::Quaternion;

/// Largest order for which `det_p` enumerates `S_n`.
pub const DETP_MAX_N: usize = 8;

/// Sum over `σ ∈ S_n` of `ε(σ)` times the cycle-ordered product.
///
/// Each permutation is put in normal cycle form; cycles are multiplied left to
/// right by decreasing leader and each cycle `(n₁ i₂ … i_s)` contributes
/// `a_{n₁i₂} a_{i₂i₃} ⋯ a_{i_s n₁}`. Terms are accumulated in lexicographic
/// permutation order so results are bitwise reproducible.
pub fn det_p(a: &QMatrix) -> Result<Quaternion> {
    let n = a.require_square()?;
    if n > DETP_MAX_N {
        return Err(Error::TooLarge { n, max: DETP_MAX_N });
    }
    let mut total = Quaternion::ZERO;
    for_each_permutation(n, |sigma| {
        let form = NormalCycleForm::of_mapping(sigma);
        let mut term: Option<Quaternion> = None;
        for cycle in form.cycles() {
            let len = cycle.len();
            for (m, &row) in cycle.iter().enumerate() {
                let f = a[(row, cycle[(m + 1) % len])];
                term = Some(match term {
                    Some(t) => t * f,
                    None => f,
                });
            }
        }
        let term = term.expect("n >= 1");
        if form.sign() > 0 {
            total += term;
        } else {
            total -= term;
        }
    });
    Ok(total)
}

/// `det_p(A⁺A)` as a quaternion, imaginary part not yet checked.
pub fn ddet_raw(a: &QMatrix) -> Result<Quaternion> {
    a.require_square()?;
    det_p(&(&a.conj_transpose() * a))
}

/// Double determinant `det_p(A⁺A)`, which is real for every square `A`.
pub fn ddet(a: &QMatrix) -> Result<f64> {
    let d = ddet_raw(a)?;
    let imag = d.im().norm();
    if imag > 1e-8 * (1.0 + d.norm()) {
        return Err(Error::NotReal { real: d.w, imag });
    }
    Ok(d.w)
}

/// Threshold on `|ddet A|` below which `A` counts as singular.
///
/// `ddet` is homogeneous of degree `2n` in the entries, so the threshold
/// scales with `‖A‖_F^{2n}`.
pub fn singular_tolerance(a: &QMatrix) -> f64 {
    let n = a.rows() as i32;
    1e-10 * (1.0 + a.frobenius_norm().powi(2 * n))
}

pub fn is_singular(a: &QMatrix) -> Result<bool> {
    Ok(ddet(a)?.abs() < singular_tolerance(a))
}

/// Cofactor-like entry `w_kj` (0-based `k`, `j`).
///
/// With `A'` the matrix `A` with columns `j` and `n−1` exchanged, this is
/// `det_p(L A')` where `L` is `A'⁺` with its last row replaced by `e_kᵀ`.
/// For `j = n−1` no exchange happens.
pub fn w_entry(a: &QMatrix, k: usize, j: usize) -> Result<Quaternion> {
    let n = a.require_square()?;
    if k >= n || j >= n {
        return Err(Error::IndexOutOfRange { k, j, n });
    }
    let swapped = swapped_gram(a, j);
    det_p(&replace_last_row(&swapped.0, &swapped.1, k))
}

/// Returns `(A'⁺A', A')` for the column exchange `j ↔ n−1`.
fn swapped_gram(a: &QMatrix, j: usize) -> (QMatrix, QMatrix) {
    let n = a.rows();
    let mut ap = a.clone();
    ap.swap_columns(j, n - 1);
    (&ap.conj_transpose() * &ap, ap)
}

// Rows 0..n−1 of L·A' coincide with A'⁺A'; the last row is e_kᵀ A' = row k of A'.
fn replace_last_row(gram: &QMatrix, ap: &QMatrix, k: usize) -> QMatrix {
    let n = gram.rows();
    QMatrix::from_fn(
        n,
        n,
        |r, c| if r + 1 == n { ap[(k, c)] } else { gram[(r, c)] },
    )
}

/// Inverse with entries `b_jk = conj(w_kj) / ddet(A)`.
pub fn inverse(a: &QMatrix) -> Result<QMatrix> {
    let n = a.require_square()?;
    let d = ddet(a)?;
    if d.abs() < singular_tolerance(a) {
        return Err(Error::Singular { ddet: d });
    }
    let mut b = QMatrix::zeros(n, n);
    for j in 0..n {
        let (gram, ap) = swapped_gram(a, j);
        for k in 0..n {
            let w = det_p(&replace_last_row(&gram, &ap, k))?;
            b[(j, k)] = w.conj() / d;
        }
    }
    Ok(b)
}
