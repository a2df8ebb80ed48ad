use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::ExprMatrix;
use crate::linalg::{
    self, complex_adjoint, ddet, expm, right_eigenpairs, singular_tolerance, EigenPair, QMatrix,
};

/// Orders up to which `Φ⁻¹` and invertibility checks use the entrywise
/// (determinant-based) formulas; larger systems go through the complex adjoint.
pub const ENTRYWISE_MAX_N: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FundamentalKind {
    /// `exp(A (t − t_ref))` for constant `A`.
    Exponential,
    /// Columns `ν_m e^{λ_m t}` from right eigenpairs of constant `A`.
    Eigen,
    /// RK4 integration of `Φ' = A(t) Φ` with Hermite dense output.
    Numeric,
}

#[derive(Debug, Clone)]
enum Flow {
    Exponential(QMatrix),
    Eigen(Vec<EigenPair>),
    Numeric(NumericFlow),
}

/// A fundamental matrix `Φ(t)` of `x' = A(t) x`.
#[derive(Debug, Clone)]
pub struct FundamentalMatrix {
    n: usize,
    t_ref: f64,
    flow: Flow,
}

impl FundamentalMatrix {
    pub fn kind(&self) -> FundamentalKind {
        match self.flow {
            Flow::Exponential(_) => FundamentalKind::Exponential,
            Flow::Eigen(_) => FundamentalKind::Eigen,
            Flow::Numeric(_) => FundamentalKind::Numeric,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn t_ref(&self) -> f64 {
        self.t_ref
    }

    pub fn eval(&self, t: f64) -> Result<QMatrix> {
        match &self.flow {
            Flow::Exponential(a) => expm(a, t - self.t_ref),
            Flow::Eigen(pairs) => {
                let cols: Vec<_> = pairs
                    .iter()
                    .map(|p| p.vector.mul_right((p.lambda * t).exp()))
                    .collect();
                QMatrix::from_columns(&cols)
            }
            Flow::Numeric(flow) => flow.eval(t),
        }
    }

    /// `Φ(t)⁻¹`, via the entrywise inverse for small systems.
    pub fn inverse_at(&self, t: f64) -> Result<QMatrix> {
        invert(&self.eval(t)?)
    }
}

pub(crate) fn invert(m: &QMatrix) -> Result<QMatrix> {
    if m.rows() <= ENTRYWISE_MAX_N {
        linalg::inverse(m)
    } else {
        linalg::inverse_via_adjoint(m)
    }
}

/// `ddet` for small systems, `det χ(A)` beyond the entrywise range.
pub(crate) fn invertibility_measure(m: &QMatrix) -> Result<f64> {
    if m.rows() <= ENTRYWISE_MAX_N {
        ddet(m)
    } else {
        Ok(complex_adjoint(m).determinant().re)
    }
}

pub fn fundamental_constant(a: &QMatrix, t_ref: f64) -> Result<FundamentalMatrix> {
    let n = a.require_square()?;
    Ok(FundamentalMatrix {
        n,
        t_ref,
        flow: Flow::Exponential(a.clone()),
    })
}

/// Closed-form `Φ(t) = (ν₁ e^{λ₁ t}, …, ν_n e^{λ_n t})`.
///
/// Fails with [`Error::Defective`] when the eigenvectors are not independent;
/// callers then fall back to [`fundamental_constant`].
pub fn fundamental_eigen(a: &QMatrix) -> Result<FundamentalMatrix> {
    let n = a.require_square()?;
    let pairs = right_eigenpairs(a)?;
    let v = QMatrix::from_columns(&pairs.iter().map(|p| p.vector.clone()).collect::<Vec<_>>())?;
    let d = invertibility_measure(&v)?;
    if d.abs() < singular_tolerance(&v) {
        return Err(Error::Defective(format!(
            "eigenvector matrix is singular (ddet = {d:e})"
        )));
    }
    Ok(FundamentalMatrix {
        n,
        t_ref: 0.0,
        flow: Flow::Eigen(pairs),
    })
}

/// Integrates `Φ' = A(t) Φ`, `Φ(t_ref) = I` with classical RK4 across
/// `[lo, hi]` (which must contain `t_ref`), using about `steps` steps in
/// total split proportionally on either side of `t_ref`.
pub fn fundamental_numeric(
    a: &ExprMatrix,
    t_ref: f64,
    lo: f64,
    hi: f64,
    steps: usize,
) -> Result<FundamentalMatrix> {
    if a.rows() != a.cols() {
        return Err(Error::Shape("A(t) must be square".into()));
    }
    if !(lo <= t_ref && t_ref <= hi) || !(lo < hi) {
        return Err(Error::Input(format!(
            "anchor {t_ref} must lie in the interval [{lo}, {hi}]"
        )));
    }
    if steps == 0 {
        return Err(Error::Input("ode_steps must be positive".into()));
    }
    let n = a.rows();
    let span = hi - lo;
    let side_steps = |len: f64| -> usize {
        if len <= 0.0 {
            0
        } else {
            ((steps as f64 * len / span).ceil() as usize).max(1)
        }
    };

    let id = QMatrix::identity(n);
    let d0 = a.eval(t_ref)?.checked_mul(&id)?;
    let back = integrate(a, t_ref, lo, side_steps(t_ref - lo), &id)?;
    let fwd = integrate(a, t_ref, hi, side_steps(hi - t_ref), &id)?;

    let mut nodes: Vec<Node> = back.into_iter().rev().collect();
    nodes.push(Node {
        t: t_ref,
        value: id,
        deriv: d0,
    });
    nodes.extend(fwd);

    for node in &nodes {
        let d = invertibility_measure(&node.value)?;
        if d.abs() < singular_tolerance(&node.value) {
            return Err(Error::StepFailure { t: node.t, ddet: d });
        }
    }
    Ok(FundamentalMatrix {
        n,
        t_ref,
        flow: Flow::Numeric(NumericFlow { nodes }),
    })
}

#[derive(Debug, Clone)]
struct Node {
    t: f64,
    value: QMatrix,
    deriv: QMatrix,
}

fn axpy(y: &QMatrix, h: f64, k: &QMatrix) -> QMatrix {
    y + &k.scale(h)
}

// Nodes strictly after `from`, ending exactly at `to`; `to` may lie below `from`.
fn integrate(
    a: &ExprMatrix,
    from: f64,
    to: f64,
    steps: usize,
    start: &QMatrix,
) -> Result<Vec<Node>> {
    let mut out = Vec::with_capacity(steps);
    if steps == 0 {
        return Ok(out);
    }
    let h = (to - from) / steps as f64;
    let mut y = start.clone();
    let mut a_t = a.eval(from)?;
    for s in 0..steps {
        let t = from + s as f64 * h;
        let t_next = if s + 1 == steps {
            to
        } else {
            from + (s + 1) as f64 * h
        };
        let a_mid = a.eval(t + 0.5 * h)?;
        let a_end = a.eval(t_next)?;
        let k1 = &a_t * &y;
        let k2 = &a_mid * &axpy(&y, 0.5 * h, &k1);
        let k3 = &a_mid * &axpy(&y, 0.5 * h, &k2);
        let k4 = &a_end * &axpy(&y, h, &k3);
        let incr = &(&(&k1 + &k2.scale(2.0)) + &k3.scale(2.0)) + &k4;
        y = axpy(&y, h / 6.0, &incr);
        let deriv = &a_end * &y;
        out.push(Node {
            t: t_next,
            value: y.clone(),
            deriv,
        });
        a_t = a_end;
    }
    Ok(out)
}

#[derive(Debug, Clone)]
struct NumericFlow {
    nodes: Vec<Node>,
}

impl NumericFlow {
    fn eval(&self, t: f64) -> Result<QMatrix> {
        let first = &self.nodes[0];
        let last = self.nodes.last().expect("non-empty grid");
        let slack = 1e-12 * (1.0 + first.t.abs().max(last.t.abs()));
        if t < first.t - slack || t > last.t + slack {
            return Err(Error::OutOfRange {
                t,
                lo: first.t,
                hi: last.t,
            });
        }
        let t = t.clamp(first.t, last.t);
        let idx = self.nodes.partition_point(|nd| nd.t <= t);
        if idx > 0 && self.nodes[idx - 1].t == t {
            return Ok(self.nodes[idx - 1].value.clone());
        }
        let (l, r) = (&self.nodes[idx - 1], &self.nodes[idx]);
        let h = r.t - l.t;
        let s = (t - l.t) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let m = &(&l.value.scale(h00) + &l.deriv.scale(h10 * h)) + &r.value.scale(h01);
        Ok(&m + &r.deriv.scale(h11 * h))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::QVector;
    use crate::quat::Quaternion;

    const O: Quaternion = Quaternion::ONE;
    const I: Quaternion = Quaternion::I;
    const J: Quaternion = Quaternion::J;
    const K: Quaternion = Quaternion::K;
    const Z: Quaternion = Quaternion::ZERO;

    fn triangular() -> QMatrix {
        QMatrix::from_rows(vec![vec![I, Z], vec![O, O + I]]).unwrap()
    }

    fn closed_form_42(t: f64) -> QMatrix {
        let eit = (I * t).exp();
        let e1it = ((O + I) * t).exp();
        QMatrix::from_rows(vec![vec![I * eit, Z], vec![-I * eit, e1it]]).unwrap()
    }

    #[test]
    fn constant_diagonal() {
        let phi = fundamental_constant(&QMatrix::diag(&[J, K]), 0.0).unwrap();
        assert_eq!(phi.kind(), FundamentalKind::Exponential);
        for t in [0.0, 0.5, 1.0] {
            let want = QMatrix::diag(&[(J * t).exp(), (K * t).exp()]);
            assert!(phi.eval(t).unwrap().max_abs_diff(&want) < 1e-14);
        }
        let zero = fundamental_constant(&QMatrix::zeros(2, 2), 0.0).unwrap();
        assert_eq!(zero.eval(3.0).unwrap(), QMatrix::identity(2));
    }

    #[test]
    fn exponential_matches_eigen_form_after_normalization() {
        let a = triangular();
        let phi = fundamental_constant(&a, 0.0).unwrap();
        let p0_inv = linalg::inverse(&closed_form_42(0.0)).unwrap();
        for t in [0.25, 0.5, 1.0] {
            let normalized = &closed_form_42(t) * &p0_inv;
            assert!(phi.eval(t).unwrap().max_abs_diff(&normalized) < 1e-12);
        }
    }

    #[test]
    fn eigen_form_example() {
        let phi = fundamental_eigen(&triangular()).unwrap();
        assert_eq!(phi.kind(), FundamentalKind::Eigen);
        // Columns are right multiples of the closed-form columns by constants.
        let c = &linalg::inverse(&closed_form_42(0.0)).unwrap() * &phi.eval(0.0).unwrap();
        for t in [0.0, 0.3, 1.0] {
            let want = &closed_form_42(t) * &c;
            assert!(phi.eval(t).unwrap().max_abs_diff(&want) < 1e-12);
            assert!((ddet(&closed_form_42(t)).unwrap() - (2.0 * t).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn eigen_form_real_diagonal_and_scalar() {
        let a = QMatrix::diag(&[Quaternion::real(-1.0), Quaternion::real(2.0)]);
        let phi = fundamental_eigen(&a).unwrap();
        let m = phi.eval(0.7).unwrap();
        assert!((m[(0, 0)].norm() - (-0.7f64).exp()).abs() < 1e-12);
        assert!((m[(1, 1)].norm() - (1.4f64).exp()).abs() < 1e-12);

        let s = fundamental_eigen(&QMatrix::diag(&[I])).unwrap();
        let h = 1e-5;
        let t = 0.4;
        let d = &(&s.eval(t + h).unwrap() - &s.eval(t - h).unwrap()).scale(0.5 / h);
        let want = &QMatrix::diag(&[I]) * &s.eval(t).unwrap();
        assert!(d.max_abs_diff(&want) < 1e-9);
        assert!((s.eval(t).unwrap()[(0, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_form_rejects_defective() {
        let a = QMatrix::from_rows(vec![vec![I, O], vec![Z, I]]).unwrap();
        assert!(matches!(fundamental_eigen(&a), Err(Error::Defective(_))));
    }

    #[test]
    fn numeric_matches_exponential() {
        let a = ExprMatrix::parse(&[vec!["j", "0"], vec!["0", "k"]]).unwrap();
        let phi = fundamental_numeric(&a, 0.0, 0.0, 1.0, 1000).unwrap();
        let exact = fundamental_constant(&QMatrix::diag(&[J, K]), 0.0).unwrap();
        for t in [0.0, 0.123, 0.5, 0.9999, 1.0] {
            assert!(phi.eval(t).unwrap().max_abs_diff(&exact.eval(t).unwrap()) < 1e-8);
        }
        assert_eq!(phi.eval(0.0).unwrap(), QMatrix::identity(2));
        assert!(matches!(phi.eval(1.5), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn numeric_zero_and_scalar_real() {
        let zero = ExprMatrix::parse(&[vec!["0", "0"], vec!["0", "0"]]).unwrap();
        let phi = fundamental_numeric(&zero, 0.0, 0.0, 2.0, 10).unwrap();
        assert_eq!(phi.eval(1.37).unwrap(), QMatrix::identity(2));

        let a = ExprMatrix::parse(&[vec!["t"]]).unwrap();
        let phi = fundamental_numeric(&a, 0.0, 0.0, 1.0, 1000).unwrap();
        for t in [0.3, 0.77, 1.0] {
            let got = phi.eval(t).unwrap()[(0, 0)];
            assert!(got.max_abs_diff(Quaternion::real((t * t / 2.0).exp())) < 1e-8);
        }
    }

    #[test]
    fn numeric_two_sided_anchor() {
        let a = ExprMatrix::parse(&[vec!["cos(t)*i"]]).unwrap();
        let phi = fundamental_numeric(&a, 0.0, -1.0, 2.0, 3000).unwrap();
        // Commuting case: Φ(t) = exp(i sin t).
        for t in [-1.0f64, -0.4, 0.0, 1.1, 2.0] {
            let want = (I * t.sin()).exp();
            assert!(phi.eval(t).unwrap()[(0, 0)].max_abs_diff(want) < 1e-9);
        }
    }

    #[test]
    fn numeric_time_varying_satisfies_ode() {
        let src = [vec!["t*j", "1"], vec!["sin(t)*k", "i - t"]];
        let a = ExprMatrix::parse(&src).unwrap();
        let phi = fundamental_numeric(&a, 0.0, 0.0, 1.0, 4096).unwrap();
        let h = 1e-4;
        for t in [0.2, 0.5, 0.8] {
            let d = &(&phi.eval(t + h).unwrap() - &phi.eval(t - h).unwrap()).scale(0.5 / h);
            let want = &a.eval(t).unwrap() * &phi.eval(t).unwrap();
            assert!(d.max_abs_diff(&want) < 1e-6);
            let v = QVector(vec![O, J]);
            assert!(phi.eval(t).unwrap().mul_vec(&v).norm() > 0.0);
        }
    }

    #[test]
    fn numeric_rejects_bad_interval() {
        let a = ExprMatrix::parse(&[vec!["1"]]).unwrap();
        assert!(fundamental_numeric(&a, 2.0, 0.0, 1.0, 10).is_err());
        assert!(fundamental_numeric(&a, 0.0, 0.0, 1.0, 0).is_err());
    }

    #[test]
    fn numeric_step_failure_detected() {
        // h·a is a root of the RK4 amplification polynomial, so one step
        // maps Φ to (numerically) zero.
        let a = ExprMatrix::parse(&[vec!["-1.729444231067705 + 0.8889743761218646*i"]]).unwrap();
        let err = fundamental_numeric(&a, 0.0, 0.0, 1.0, 1);
        assert!(matches!(err, Err(Error::StepFailure { .. })));
    }
}
