//! Right eigenpairs `A v = v λ` of a constant quaternion matrix.
//!
//! Eigenvalues of `χ(A)` come in conjugate pairs `μ, μ̄`; each pair is one
//! similarity class of right eigenvalues, represented here by the complex
//! number with nonnegative `i` part. If `u = (u₀, u₁, …)` is an eigenvector of
//! `χ(A)` for `μ`, the quaternion vector with entries
//! `v_m = u_{2m} − conj(u_{2m+1}) j` satisfies `A v = v μ`.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use super::adjoint::{complex_adjoint, CMatrix};
use super::{QMatrix, QVector};
use crate::error::{Error, Result};
use crate::quat::Quaternion;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenPair {
    /// Complex representative `a + b i`, `b ≥ 0`.
    pub lambda: Quaternion,
    /// Unit-norm eigenvector.
    pub vector: QVector,
}

pub fn right_eigenpairs(a: &QMatrix) -> Result<Vec<EigenPair>> {
    let n = a.require_square()?;
    let chi = complex_adjoint(a);
    let scale = chi.norm().max(1.0);

    let eig = chi
        .clone()
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::Defective("Schur form did not converge".into()))?;

    let mut reps: Vec<(f64, f64)> = eig.iter().map(|z| (z.re, z.im.abs())).collect();
    reps.sort_by(|p, q| p.partial_cmp(q).expect("finite eigenvalues"));

    let cluster_tol = 1e-6 * scale;
    let mut clusters: Vec<Vec<(f64, f64)>> = Vec::new();
    for r in reps {
        match clusters.last_mut() {
            Some(c) if dist(c[0], r) <= cluster_tol => c.push(r),
            _ => clusters.push(vec![r]),
        }
    }

    let mut pairs = Vec::with_capacity(n);
    for cluster in clusters {
        if cluster.len() % 2 != 0 {
            return Err(Error::Defective(format!(
                "unpaired eigenvalue cluster near {:?}",
                cluster[0]
            )));
        }
        let mult = cluster.len() / 2;
        let k = cluster.len() as f64;
        let re = cluster.iter().map(|p| p.0).sum::<f64>() / k;
        let im = cluster.iter().map(|p| p.1).sum::<f64>() / k;
        let lambda = Quaternion::new(re, im, 0.0, 0.0);

        let shifted = &chi - CMatrix::identity(2 * n, 2 * n) * Complex64::new(re, im);
        let candidates = null_vectors(&shifted, 1e-8 * scale);
        let mut chosen: Vec<QVector> = Vec::new();
        for u in candidates {
            if chosen.len() == mult {
                break;
            }
            let v = normalize(to_quaternion_vector(&u));
            if independent_with(&chosen, &v) {
                chosen.push(v);
            }
        }
        if chosen.len() < mult {
            return Err(Error::Defective(format!(
                "eigenvalue {lambda} has multiplicity {mult} but only {} independent eigenvectors",
                chosen.len()
            )));
        }
        pairs.extend(
            chosen
                .into_iter()
                .map(|vector| EigenPair { lambda, vector }),
        );
    }

    let bound = 1e-9 * a.frobenius_norm();
    for p in &pairs {
        let r = residual(a, p);
        if r > bound {
            return Err(Error::Defective(format!(
                "residual {r:e} for eigenvalue {} exceeds {bound:e}",
                p.lambda
            )));
        }
    }
    Ok(pairs)
}

/// `‖A v − v λ‖`.
pub(crate) fn residual(a: &QMatrix, p: &EigenPair) -> f64 {
    (&a.mul_vec(&p.vector) - &p.vector.mul_right(p.lambda)).norm()
}

fn dist(p: (f64, f64), q: (f64, f64)) -> f64 {
    (p.0 - q.0).hypot(p.1 - q.1)
}

// Right singular vectors whose singular value is below `tol`.
fn null_vectors(m: &CMatrix, tol: f64) -> Vec<DVector<Complex64>> {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| {
        svd.singular_values[a]
            .partial_cmp(&svd.singular_values[b])
            .expect("finite singular values")
    });
    idx.into_iter()
        .filter(|&i| svd.singular_values[i] <= tol)
        .map(|i| v_t.row(i).adjoint())
        .collect()
}

fn to_quaternion_vector(u: &DVector<Complex64>) -> QVector {
    QVector(
        (0..u.len() / 2)
            .map(|m| {
                let z1 = u[2 * m];
                let z2 = -u[2 * m + 1].conj();
                Quaternion::new(z1.re, z1.im, z2.re, z2.im)
            })
            .collect(),
    )
}

/// Unit norm, then a right factor `e^{iθ}` (which commutes with λ) making the
/// first significant entry's leading complex part real and positive.
fn normalize(v: QVector) -> QVector {
    let v = v.mul_right(Quaternion::real(1.0 / v.norm()));
    let Some(lead) = v.iter().find(|q| q.norm() > 1e-8) else {
        return v;
    };
    let z1 = Complex64::new(lead.w, lead.x);
    let z2 = Complex64::new(lead.y, lead.z);
    // (z₁ + z₂ j) e^{iθ} = z₁ e^{iθ} + z₂ e^{−iθ} j
    let theta = if z1.norm() > 1e-12 {
        -z1.arg()
    } else {
        z2.arg()
    };
    v.mul_right(Quaternion::new(theta.cos(), theta.sin(), 0.0, 0.0))
}

fn independent_with(chosen: &[QVector], v: &QVector) -> bool {
    let mut cols = chosen.to_vec();
    cols.push(v.clone());
    let m = QMatrix::from_columns(&cols).expect("equal lengths");
    let sv = complex_adjoint(&m).singular_values();
    sv.iter().fold(f64::INFINITY, |a, &b| a.min(b)) > 1e-6
}
