//! Scalar quaternion arithmetic.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute threshold below which a quaternion is treated as zero.
pub const ZERO_TOL: f64 = 1e-12;

/// A quaternion `w + x i + y j + z k` with `i² = j² = k² = ijk = −1`.
///
/// Serialized as the array `[w, x, y, z]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<[f64; 4]> for Quaternion {
    fn from(c: [f64; 4]) -> Self {
        Self::new(c[0], c[1], c[2], c[3])
    }
}

impl From<Quaternion> for [f64; 4] {
    fn from(q: Quaternion) -> Self {
        q.to_array()
    }
}

impl From<f64> for Quaternion {
    fn from(r: f64) -> Self {
        Self::real(r)
    }
}

impl Quaternion {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Self = Self::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Self = Self::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Self = Self::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Self = Self::new(0.0, 0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    #[inline]
    pub const fn real(w: f64) -> Self {
        Self::new(w, 0.0, 0.0, 0.0)
    }

    #[inline]
    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    #[inline]
    pub fn conj(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    #[inline]
    pub fn norm_sqr(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Real part.
    #[inline]
    pub fn re(self) -> f64 {
        self.w
    }

    /// Imaginary part `x i + y j + z k`.
    #[inline]
    pub fn im(self) -> Self {
        Self::new(0.0, self.x, self.y, self.z)
    }

    /// `q̄ / |q|²`. Fails on the exact zero quaternion.
    pub fn inv(self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if n2 == 0.0 {
            return Err(Error::DivisionByZero);
        }
        Ok(self.conj() / n2)
    }

    pub fn is_zero(self, tol: f64) -> bool {
        self.norm() <= tol
    }

    /// Largest absolute component difference.
    pub fn max_abs_diff(self, other: Self) -> f64 {
        let d = self - other;
        d.w.abs().max(d.x.abs()).max(d.y.abs()).max(d.z.abs())
    }

    /// Exponential `e^w (cos|v| + v/|v| sin|v|)` with `v` the imaginary part.
    pub fn exp(self) -> Self {
        let ew = self.w.exp();
        let v = self.im().norm();
        if v < 1e-300 {
            return Self::real(ew);
        }
        let s = ew * v.sin() / v;
        Self::new(ew * v.cos(), s * self.x, s * self.y, s * self.z)
    }

    /// Right division `self · rhs⁻¹`.
    pub fn div_right(self, rhs: Self) -> Result<Self> {
        Ok(self * rhs.inv()?)
    }

    /// Zeroes every component whose magnitude is at most `tol`.
    pub fn chop(self, tol: f64) -> Self {
        let c = |v: f64| if v.abs() <= tol { 0.0 } else { v };
        Self::new(c(self.w), c(self.x), c(self.y), c(self.z))
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Quaternion {
    type Output = Self;
    #[inline]
    fn add(self, r: Self) -> Self {
        Self::new(self.w + r.w, self.x + r.x, self.y + r.y, self.z + r.z)
    }
}

impl AddAssign for Quaternion {
    #[inline]
    fn add_assign(&mut self, r: Self) {
        *self = *self + r;
    }
}

impl Sub for Quaternion {
    type Output = Self;
    #[inline]
    fn sub(self, r: Self) -> Self {
        Self::new(self.w - r.w, self.x - r.x, self.y - r.y, self.z - r.z)
    }
}

impl SubAssign for Quaternion {
    #[inline]
    fn sub_assign(&mut self, r: Self) {
        *self = *self - r;
    }
}

impl Neg for Quaternion {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.w, -self.x, -self.y, -self.z)
    }
}

/// Hamilton product.
impl Mul for Quaternion {
    type Output = Self;
    #[inline]
    fn mul(self, b: Self) -> Self {
        let a = self;
        Self::new(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )
    }
}

impl MulAssign for Quaternion {
    #[inline]
    fn mul_assign(&mut self, r: Self) {
        *self = *self * r;
    }
}

impl Mul<f64> for Quaternion {
    type Output = Self;
    #[inline]
    fn mul(self, s: f64) -> Self {
        Self::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    #[inline]
    fn mul(self, q: Quaternion) -> Quaternion {
        q * self
    }
}

impl Div<f64> for Quaternion {
    type Output = Self;
    #[inline]
    fn div(self, s: f64) -> Self {
        Self::new(self.w / s, self.x / s, self.y / s, self.z / s)
    }
}

impl std::iter::Sum for Quaternion {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |acc, q| acc + q)
    }
}

/// Renders `a+bi+cj+dk`, omitting zero terms; unit coefficients print bare
/// (`-i`, `j`). The zero quaternion renders as `0`.
impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        if self.w != 0.0 {
            out.push_str(&format!("{}", self.w));
        }
        for (c, unit) in [(self.x, 'i'), (self.y, 'j'), (self.z, 'k')] {
            if c == 0.0 {
                continue;
            }
            if c < 0.0 {
                out.push('-');
            } else if !out.is_empty() {
                out.push('+');
            }
            let mag = c.abs();
            if mag != 1.0 {
                out.push_str(&format!("{mag}"));
            }
            out.push(unit);
        }
        if out.is_empty() {
            out.push('0');
        }
        f.pad(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const I: Quaternion = Quaternion::I;
    const J: Quaternion = Quaternion::J;
    const K: Quaternion = Quaternion::K;

    // Brute-force product from the basis table: e_a e_b = sign * e_c.
    fn table_product(a: Quaternion, b: Quaternion) -> Quaternion {
        const TABLE: [[(f64, usize); 4]; 4] = [
            [(1.0, 0), (1.0, 1), (1.0, 2), (1.0, 3)],
            [(1.0, 1), (-1.0, 0), (1.0, 3), (-1.0, 2)],
            [(1.0, 2), (-1.0, 3), (-1.0, 0), (1.0, 1)],
            [(1.0, 3), (1.0, 2), (-1.0, 1), (-1.0, 0)],
        ];
        let (ac, bc) = (a.to_array(), b.to_array());
        let mut out = [0.0; 4];
        for p in 0..4 {
            for q in 0..4 {
                let (s, c) = TABLE[p][q];
                out[c] += s * ac[p] * bc[q];
            }
        }
        out.into()
    }

    fn quat() -> impl Strategy<Value = Quaternion> {
        prop::array::uniform4(-3.0f64..3.0).prop_map(Quaternion::from)
    }

    #[test]
    fn multiplication_table() {
        assert_eq!(I * J, K);
        assert_eq!(J * I, -K);
        assert_eq!(K * J, -I);
        assert_eq!(I * I, -Quaternion::ONE);
        assert_eq!(I * J * K, -Quaternion::ONE);
        assert_ne!(I * J, J * I);
    }

    #[test]
    fn product_matches_basis_table() {
        let a = Quaternion::ONE + J;
        let b = I + K;
        assert_eq!(a * b, table_product(a, b));
        assert_eq!(a * b, 2.0 * I);
    }

    #[test]
    fn conj_norm_inv() {
        assert_eq!(J.conj(), -J);
        assert_eq!(Quaternion::new(1.0, 1.0, 1.0, 1.0).norm(), 2.0);
        assert_eq!(J.inv().unwrap(), -J);
        assert_eq!(Quaternion::ZERO.inv(), Err(Error::DivisionByZero));
        let q = Quaternion::new(1.0, -2.0, 0.5, 3.0);
        assert_eq!(q.re(), 1.0);
        assert_eq!(q.im(), Quaternion::new(0.0, -2.0, 0.5, 3.0));
    }

    #[test]
    fn exp_special_values() {
        assert_eq!(Quaternion::ZERO.exp(), Quaternion::ONE);
        let half_pi = (J * std::f64::consts::FRAC_PI_2).exp();
        assert!(half_pi.max_abs_diff(J) < 1e-15);
        let pi = (K * std::f64::consts::PI).exp();
        assert!(pi.max_abs_diff(-Quaternion::ONE) < 1e-15);
        assert!((Quaternion::real(1.5).exp().w - 1.5f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn display_format() {
        assert_eq!(Quaternion::ZERO.to_string(), "0");
        assert_eq!((-2.0 * I).to_string(), "-2i");
        assert_eq!(Quaternion::new(1.0, 1.0, 1.0, 1.0).to_string(), "1+i+j+k");
        assert_eq!(
            Quaternion::new(0.5, 0.0, -1.0, 2.5).to_string(),
            "0.5-j+2.5k"
        );
        assert_eq!(J.to_string(), "j");
    }

    #[test]
    fn serde_as_array() {
        let q = Quaternion::new(1.0, 2.0, 3.0, 4.0);
        let s = serde_json::to_string(&q).unwrap();
        assert_eq!(s, "[1.0,2.0,3.0,4.0]");
        assert_eq!(serde_json::from_str::<Quaternion>(&s).unwrap(), q);
    }

    fn series_exp(q: Quaternion) -> Quaternion {
        let mut term = Quaternion::ONE;
        let mut sum = Quaternion::ONE;
        for n in 1..30 {
            term = term * q / n as f64;
            sum += term;
        }
        sum
    }

    proptest! {
        #[test]
        fn prop_norm_multiplicative(a in quat(), b in quat()) {
            let lhs = (a * b).norm();
            prop_assert!((lhs - a.norm() * b.norm()).abs() <= 1e-12 * (1.0 + lhs));
        }

        #[test]
        fn prop_matches_table(a in quat(), b in quat()) {
            prop_assert!((a * b).max_abs_diff(table_product(a, b)) < 1e-12);
        }

        #[test]
        fn prop_associative(a in quat(), b in quat(), c in quat()) {
            let l = (a * b) * c;
            prop_assert!(l.max_abs_diff(a * (b * c)) <= 1e-12 * (1.0 + l.norm()));
        }

        #[test]
        fn prop_conj_reverses(p in quat(), h in quat()) {
            prop_assert!((p * h).conj().max_abs_diff(h.conj() * p.conj()) < 1e-12);
        }

        #[test]
        fn prop_inverse_two_sided(q in quat()) {
            prop_assume!(q.norm() > 1e-3);
            let inv = q.inv().unwrap();
            prop_assert!((q * inv).max_abs_diff(Quaternion::ONE) < 1e-12);
            prop_assert!((inv * q).max_abs_diff(Quaternion::ONE) < 1e-12);
        }

        #[test]
        fn prop_exp_matches_series(v in prop::array::uniform4(-1.5f64..1.5)) {
            let q = Quaternion::from(v);
            prop_assume!(q.norm() <= 3.0);
            prop_assert!(q.exp().max_abs_diff(series_exp(q)) < 1e-10);
        }
    }
}
