//! Dense quaternion matrices and the noncommutative linear algebra built on
//! them.

mod adjoint;
mod det;
mod eigen;
mod perm;

pub use adjoint::{complex_adjoint, expm, from_complex_adjoint, inverse_via_adjoint, CMatrix};
pub use det::{
    ddet, ddet_raw, det_p, inverse, is_singular, singular_tolerance, w_entry, DETP_MAX_N,
};
pub use eigen::{right_eigenpairs, EigenPair};
pub use perm::{for_each_permutation, NormalCycleForm, Permutation};

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quat::Quaternion;

/// Column vector of quaternions.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QVector(pub Vec<Quaternion>);

impl QVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![Quaternion::ZERO; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Quaternion> {
        self.0.iter()
    }

    /// Right scalar multiplication `v · q`.
    pub fn mul_right(&self, q: Quaternion) -> Self {
        Self(self.0.iter().map(|&v| v * q).collect())
    }

    /// Euclidean norm over all 4n real components.
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Sup-norm over quaternion entries, `max_m |v_m|`.
    pub fn sup_norm(&self) -> f64 {
        self.0.iter().map(|q| q.norm()).fold(0.0, f64::max)
    }

    /// Largest absolute real component.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|q| q.to_array())
            .fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.len(), other.len(), "vector length mismatch");
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.max_abs_diff(*b))
            .fold(0.0, f64::max)
    }

    /// Flattens to `[w₁, x₁, y₁, z₁, w₂, …]`.
    pub fn to_components(&self) -> Vec<f64> {
        self.0.iter().flat_map(|q| q.to_array()).collect()
    }

    pub fn from_components(c: &[f64]) -> Self {
        assert_eq!(c.len() % 4, 0);
        Self(
            c.chunks_exact(4)
                .map(|s| Quaternion::new(s[0], s[1], s[2], s[3]))
                .collect(),
        )
    }

    pub fn as_column(&self) -> QMatrix {
        QMatrix {
            rows: self.len(),
            cols: 1,
            data: self.0.clone(),
        }
    }
}

impl From<Vec<Quaternion>> for QVector {
    fn from(v: Vec<Quaternion>) -> Self {
        Self(v)
    }
}

impl Index<usize> for QVector {
    type Output = Quaternion;
    fn index(&self, i: usize) -> &Quaternion {
        &self.0[i]
    }
}

impl IndexMut<usize> for QVector {
    fn index_mut(&mut self, i: usize) -> &mut Quaternion {
        &mut self.0[i]
    }
}

impl Add for &QVector {
    type Output = QVector;
    fn add(self, r: &QVector) -> QVector {
        assert_eq!(self.len(), r.len(), "vector length mismatch");
        QVector(self.0.iter().zip(&r.0).map(|(a, b)| *a + *b).collect())
    }
}

impl Sub for &QVector {
    type Output = QVector;
    fn sub(self, r: &QVector) -> QVector {
        assert_eq!(self.len(), r.len(), "vector length mismatch");
        QVector(self.0.iter().zip(&r.0).map(|(a, b)| *a - *b).collect())
    }
}

impl Neg for &QVector {
    type Output = QVector;
    fn neg(self) -> QVector {
        QVector(self.0.iter().map(|q| -*q).collect())
    }
}

/// Dense row-major quaternion matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<Quaternion>>", into = "Vec<Vec<Quaternion>>")]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Quaternion>,
}

impl TryFrom<Vec<Vec<Quaternion>>> for QMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<Quaternion>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl From<QMatrix> for Vec<Vec<Quaternion>> {
    fn from(m: QMatrix) -> Self {
        m.to_rows()
    }
}

impl QMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Quaternion>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape("matrix dimensions must be positive".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Quaternion::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| {
            if r == c {
                Quaternion::ONE
            } else {
                Quaternion::ZERO
            }
        })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Quaternion,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<Quaternion>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::new(nrows, ncols, rows.into_iter().flatten().collect())
    }

    pub fn from_columns(cols: &[QVector]) -> Result<Self> {
        let n = cols.first().map_or(0, QVector::len);
        if cols.iter().any(|c| c.len() != n) {
            return Err(Error::Shape("columns of unequal length".into()));
        }
        if n == 0 {
            return Err(Error::Shape("empty column list".into()));
        }
        Ok(Self::from_fn(n, cols.len(), |r, c| cols[c][r]))
    }

    pub fn diag(d: &[Quaternion]) -> Self {
        let n = d.len();
        Self::from_fn(n, n, |r, c| if r == c { d[r] } else { Quaternion::ZERO })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Quaternion] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<Quaternion>> {
        self.data.chunks(self.cols).map(<[_]>::to_vec).collect()
    }

    pub fn column(&self, j: usize) -> QVector {
        QVector((0..self.rows).map(|r| self[(r, j)]).collect())
    }

    pub fn swap_columns(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    /// `A⁺` with `(A⁺)_{ij} = conj(A_{ji})`.
    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub(crate) fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::Shape(format!(
                "expected a square matrix, got {}x{}",
                self.rows, self.cols
            )))
        }
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Self::from_fn(self.rows, rhs.cols, |r, c| {
            (0..self.cols).map(|k| self[(r, k)] * rhs[(k, c)]).sum()
        }))
    }

    pub fn checked_mul_vec(&self, v: &QVector) -> Result<QVector> {
        if self.cols != v.len() {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by a vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok(self.mul_vec(v))
    }

    pub fn mul_vec(&self, v: &QVector) -> QVector {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        QVector(
            (0..self.rows)
                .map(|r| (0..self.cols).map(|k| self[(r, k)] * v[k]).sum())
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&q| q * s).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest absolute real component.
    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .flat_map(|q| q.to_array())
            .map(f64::abs)
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.max_abs_diff(*b))
            .fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(Quaternion) -> Quaternion) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&q| f(q)).collect(),
        }
    }
}

impl Index<(usize, usize)> for QMatrix {
    type Output = Quaternion;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Quaternion {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for QMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Quaternion {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &QMatrix {
    type Output = QMatrix;
    fn mul(self, rhs: &QMatrix) -> QMatrix {
        self.checked_mul(rhs).expect("matrix shape mismatch")
    }
}

impl Add for &QMatrix {
    type Output = QMatrix;
    fn add(self, rhs: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| *a + *b)
                .collect(),
        }
    }
}

impl Sub for &QMatrix {
    type Output = QMatrix;
    fn sub(self, rhs: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| *a - *b)
                .collect(),
        }
    }
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const I: Quaternion = Quaternion::I;
    const J: Quaternion = Quaternion::J;
    const K: Quaternion = Quaternion::K;

    #[test]
    fn conj_transpose_worked_example() {
        let b = QMatrix::from_rows(vec![vec![J, -I], vec![Quaternion::ONE, K]]).unwrap();
        let expected = QMatrix::from_rows(vec![vec![-J, Quaternion::ONE], vec![I, -K]]).unwrap();
        assert_eq!(b.conj_transpose(), expected);
        assert_eq!(QMatrix::identity(3).conj_transpose(), QMatrix::identity(3));
    }

    #[test]
    fn conj_transpose_reverses_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let a = random_matrix(&mut rng, 3, 2);
            let b = random_matrix(&mut rng, 2, 4);
            let lhs = (&a * &b).conj_transpose();
            let rhs = &b.conj_transpose() * &a.conj_transpose();
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
            assert_eq!(a.conj_transpose().conj_transpose(), a);
        }
    }

    #[test]
    fn shape_errors() {
        assert!(QMatrix::new(2, 2, vec![Quaternion::ONE; 3]).is_err());
        assert!(QMatrix::from_rows(vec![vec![I], vec![I, J]]).is_err());
        let a = QMatrix::zeros(2, 3);
        assert!(a.checked_mul(&a).is_err());
    }

    #[test]
    fn serde_nested_arrays() {
        let m = QMatrix::from_rows(vec![vec![I, q(1.0, 0.0, 0.0, 0.0)]]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[[0.0,1.0,0.0,0.0],[1.0,0.0,0.0,0.0]]]");
        assert_eq!(serde_json::from_str::<QMatrix>(&s).unwrap(), m);
    }
}
