//! Quaternion-valued expressions of a real variable `t`.
//!
//! Products keep their written operand order, `a/b` means `a·b⁻¹`, and
//! multiplication is never implicit (`2*i`, not `2i`).

mod parser;

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{QMatrix, QVector};
use crate::quat::{Quaternion, ZERO_TOL};

pub use parser::parse;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    I,
    J,
    K,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    /// Right division.
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Unit(Unit),
    Var,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, t: f64) -> Result<Quaternion> {
        Ok(match self {
            Expr::Num(v) => Quaternion::real(*v),
            Expr::Unit(Unit::I) => Quaternion::I,
            Expr::Unit(Unit::J) => Quaternion::J,
            Expr::Unit(Unit::K) => Quaternion::K,
            Expr::Var => Quaternion::real(t),
            Expr::Neg(e) => -e.eval(t)?,
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.eval(t)?, b.eval(t)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a.div_right(b)?,
                }
            }
            Expr::Pow(base, n) => {
                let b = base.eval(t)?;
                let mut acc = Quaternion::ONE;
                for _ in 0..*n {
                    acc *= b;
                }
                acc
            }
            Expr::Call(f, arg) => {
                let a = arg.eval(t)?;
                match f {
                    Func::Exp => a.exp(),
                    Func::Sin | Func::Cos => {
                        let imag = a.im().norm();
                        if imag >= ZERO_TOL {
                            return Err(Error::NonRealArgument {
                                func: f.name(),
                                imag,
                            });
                        }
                        Quaternion::real(if *f == Func::Sin {
                            a.w.sin()
                        } else {
                            a.w.cos()
                        })
                    }
                }
            }
        })
    }

    /// Whether the variable `t` occurs anywhere in the tree.
    pub fn mentions_t(&self) -> bool {
        match self {
            Expr::Var => true,
            Expr::Num(_) | Expr::Unit(_) => false,
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => e.mentions_t(),
            Expr::Binary(_, a, b) => a.mentions_t() || b.mentions_t(),
        }
    }

    pub fn zero() -> Self {
        Expr::Num(0.0)
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}

/// Fully parenthesized source text that parses back to an equivalent tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => {
                write!(f, "(-{:?})", -v)
            }
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Unit(Unit::I) => f.write_str("i"),
            Expr::Unit(Unit::J) => f.write_str("j"),
            Expr::Unit(Unit::K) => f.write_str("k"),
            Expr::Var => f.write_str("t"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, a, b) => {
                let sym = match op {
                    BinOp::Add => '+',
                    BinOp::Sub => '-',
                    BinOp::Mul => '*',
                    BinOp::Div => '/',
                };
                write!(f, "({a}{sym}{b})")
            }
            Expr::Pow(b, n) => write!(f, "({b}^{n})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// Column of expressions, e.g. a forcing term `f(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprVector(pub Vec<Expr>);

impl ExprVector {
    pub fn parse<S: AsRef<str>>(cells: &[S]) -> Result<Self> {
        cells
            .iter()
            .enumerate()
            .map(|(r, s)| parse(s.as_ref()).map_err(|e| e.in_cell(r, 0)))
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![Expr::zero(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn eval(&self, t: f64) -> Result<QVector> {
        self.0
            .iter()
            .enumerate()
            .map(|(r, e)| e.eval(t).map_err(|err| err.in_cell(r, 0)))
            .collect::<Result<Vec<_>>>()
            .map(QVector)
    }

    pub fn is_zero_literal(&self) -> bool {
        self.0.iter().all(|e| *e == Expr::Num(0.0))
    }
}

/// Rectangular grid of expressions, e.g. a coefficient matrix `A(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprMatrix {
    rows: usize,
    cols: usize,
    cells: Vec<Expr>,
}

impl ExprMatrix {
    pub fn parse<S: AsRef<str>>(rows: &[Vec<S>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if nrows == 0 || ncols == 0 {
            return Err(Error::Shape("expression matrix must be non-empty".into()));
        }
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::Shape(
                "expression matrix rows differ in length".into(),
            ));
        }
        let mut cells = Vec::with_capacity(nrows * ncols);
        for (r, row) in rows.iter().enumerate() {
            for (c, s) in row.iter().enumerate() {
                cells.push(parse(s.as_ref()).map_err(|e| e.in_cell(r, c))?);
            }
        }
        Ok(Self {
            rows: nrows,
            cols: ncols,
            cells,
        })
    }

    /// Constant matrix whose cells are the rendered entries of `m`.
    pub fn constant(m: &QMatrix) -> Self {
        let cells = m
            .entries()
            .iter()
            .map(|q| {
                let parts = [
                    Expr::Num(q.w),
                    Expr::Binary(
                        BinOp::Mul,
                        Box::new(Expr::Num(q.x)),
                        Box::new(Expr::Unit(Unit::I)),
                    ),
                    Expr::Binary(
                        BinOp::Mul,
                        Box::new(Expr::Num(q.y)),
                        Box::new(Expr::Unit(Unit::J)),
                    ),
                    Expr::Binary(
                        BinOp::Mul,
                        Box::new(Expr::Num(q.z)),
                        Box::new(Expr::Unit(Unit::K)),
                    ),
                ];
                parts
                    .into_iter()
                    .reduce(|a, b| Expr::Binary(BinOp::Add, Box::new(a), Box::new(b)))
                    .expect("four parts")
            })
            .collect();
        Self {
            rows: m.rows(),
            cols: m.cols(),
            cells,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cell(&self, r: usize, c: usize) -> &Expr {
        &self.cells[r * self.cols + c]
    }

    pub fn eval(&self, t: f64) -> Result<QMatrix> {
        let mut data = Vec::with_capacity(self.cells.len());
        for (idx, e) in self.cells.iter().enumerate() {
            data.push(
                e.eval(t)
                    .map_err(|err| err.in_cell(idx / self.cols, idx % self.cols))?,
            );
        }
        QMatrix::new(self.rows, self.cols, data)
    }

    pub fn mentions_t(&self) -> bool {
        self.cells.iter().any(Expr::mentions_t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn num(v: f64) -> Box<Expr> {
        Box::new(Expr::Num(v))
    }

    #[test]
    fn parses_forcing_term() {
        let e = p("(t^2+1)*i");
        let want = Expr::Binary(
            BinOp::Mul,
            Box::new(Expr::Binary(
                BinOp::Add,
                Box::new(Expr::Pow(Box::new(Expr::Var), 2)),
                num(1.0),
            )),
            Box::new(Expr::Unit(Unit::I)),
        );
        assert_eq!(e, want);
        assert_eq!(p("1"), Expr::Num(1.0));
    }

    #[test]
    fn function_binds_before_product() {
        let e = p("exp(j*t)*j");
        match e {
            Expr::Binary(BinOp::Mul, lhs, rhs) => {
                assert!(matches!(*lhs, Expr::Call(Func::Exp, _)));
                assert_eq!(*rhs, Expr::Unit(Unit::J));
            }
            other => panic!("unexpected tree {other:?}"),
        }
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(p("-t^2").eval(3.0).unwrap(), Quaternion::real(-9.0));
        assert_eq!(p("1-2-3").eval(0.0).unwrap(), Quaternion::real(-4.0));
        assert_eq!(p("8/2/2").eval(0.0).unwrap(), Quaternion::real(2.0));
        assert_eq!(p("2*3^2").eval(0.0).unwrap(), Quaternion::real(18.0));
        assert_eq!(p("(1+t)^0").eval(5.0).unwrap(), Quaternion::ONE);
        assert_eq!(p("1.5e1 + 2E-1").eval(0.0).unwrap(), Quaternion::real(15.2));
    }

    #[test]
    fn noncommutative_order_kept() {
        assert_eq!(p("i*j").eval(0.0).unwrap(), Quaternion::K);
        assert_eq!(p("j*i").eval(0.0).unwrap(), -Quaternion::K);
        // right division: i/j = i·(−j) = −k
        assert_eq!(p("i/j").eval(0.0).unwrap(), -Quaternion::K);
    }

    #[test]
    fn evaluation_examples() {
        assert_eq!(p("(t^2+1)*i").eval(2.0).unwrap(), Quaternion::I * 5.0);
        let e = p("exp(j*t)").eval(PI).unwrap();
        assert!(e.max_abs_diff(-Quaternion::ONE) < 1e-15);
        let sol = p("2*t*i + exp(j*t)*j - (t^2 + exp(j*t) - 1)*k")
            .eval(0.0)
            .unwrap();
        assert_eq!(sol, Quaternion::J);
        assert!((p("pi").eval(0.0).unwrap().w - PI).abs() == 0.0);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        assert!(matches!(parse("2i"), Err(Error::Syntax { pos: 1, .. })));
        assert!(matches!(parse("t^-1"), Err(Error::BadExponent { pos: 2 })));
        assert!(matches!(parse("t^2.5"), Err(Error::BadExponent { .. })));
        assert!(matches!(parse("t^(2)"), Err(Error::BadExponent { .. })));
        assert!(matches!(
            parse("1 + foo"),
            Err(Error::UnknownIdentifier { pos: 4, .. })
        ));
        assert!(matches!(parse("(1+t"), Err(Error::Syntax { pos: 4, .. })));
        assert!(matches!(parse(""), Err(Error::Syntax { .. })));
        assert!(matches!(parse("1 $ 2"), Err(Error::Syntax { pos: 2, .. })));
        assert!(matches!(parse("exp t"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn evaluation_errors() {
        assert_eq!(p("1/(t-t)").eval(1.0), Err(Error::DivisionByZero));
        assert!(matches!(
            p("sin(i*t)").eval(1.0),
            Err(Error::NonRealArgument { func: "sin", .. })
        ));
        assert!(p("cos(t + 0*i)").eval(1.0).is_ok());
    }

    #[test]
    fn matrices_and_vectors() {
        let a = ExprMatrix::parse(&[vec!["j", "0"], vec!["0", "k"]]).unwrap();
        assert_eq!(
            a.eval(0.3).unwrap(),
            QMatrix::diag(&[Quaternion::J, Quaternion::K])
        );
        assert!(!a.mentions_t());
        let s = ExprMatrix::parse(&[vec!["t"]]).unwrap();
        assert_eq!(
            s.eval(3.0).unwrap(),
            QMatrix::diag(&[Quaternion::real(3.0)])
        );
        let b = ExprMatrix::parse(&[vec!["i", "0"], vec!["1", "1+i"]]).unwrap();
        let m = b.eval(0.0).unwrap();
        assert_eq!(m[(1, 1)], Quaternion::new(1.0, 1.0, 0.0, 0.0));

        match ExprMatrix::parse(&[vec!["1", "2*"]]) {
            Err(Error::Cell { row: 0, col: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
        let bad = ExprMatrix::parse(&[vec!["1"], vec!["1/(t-1)"]]).unwrap();
        match bad.eval(1.0) {
            Err(Error::Cell {
                row: 1,
                col: 0,
                source,
            }) => {
                assert_eq!(*source, Error::DivisionByZero)
            }
            other => panic!("{other:?}"),
        }
        let v = ExprVector::parse(&["(t^2+1)*i", "t*j"]).unwrap();
        assert_eq!(v.eval(1.0).unwrap()[1], Quaternion::J);
    }

    #[test]
    fn constant_matrix_round_trip() {
        let m = QMatrix::diag(&[Quaternion::new(1.0, -2.0, 0.5, 3.0), Quaternion::J]);
        assert_eq!(ExprMatrix::constant(&m).eval(7.0).unwrap(), m);
    }

    // Plain f64 evaluation for unit-free trees.
    fn real_eval(e: &Expr, t: f64) -> f64 {
        match e {
            Expr::Num(v) => *v,
            Expr::Var => t,
            Expr::Unit(_) => unreachable!(),
            Expr::Neg(a) => -real_eval(a, t),
            Expr::Binary(op, a, b) => {
                let (a, b) = (real_eval(a, t), real_eval(b, t));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                }
            }
            Expr::Pow(a, n) => real_eval(a, t).powi(*n as i32),
            Expr::Call(Func::Exp, a) => real_eval(a, t).exp(),
            Expr::Call(Func::Sin, a) => real_eval(a, t).sin(),
            Expr::Call(Func::Cos, a) => real_eval(a, t).cos(),
        }
    }

    fn tree(with_units: bool) -> impl Strategy<Value = Expr> {
        let leaf = if with_units {
            prop_oneof![
                (-3.0f64..3.0).prop_map(Expr::Num),
                Just(Expr::Var),
                Just(Expr::Unit(Unit::I)),
                Just(Expr::Unit(Unit::J)),
                Just(Expr::Unit(Unit::K)),
            ]
            .boxed()
        } else {
            prop_oneof![(-3.0f64..3.0).prop_map(Expr::Num), Just(Expr::Var)].boxed()
        };
        leaf.prop_recursive(4, 24, 2, move |inner| {
            let ops = prop_oneof![
                Just(BinOp::Add),
                Just(BinOp::Sub),
                Just(BinOp::Mul),
                Just(BinOp::Div)
            ];
            let funcs = if with_units {
                Just(Func::Exp).boxed()
            } else {
                prop_oneof![Just(Func::Exp), Just(Func::Sin), Just(Func::Cos)].boxed()
            };
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                (ops, inner.clone(), inner.clone()).prop_map(|(op, a, b)| Expr::Binary(
                    op,
                    Box::new(a),
                    Box::new(b)
                )),
                (inner.clone(), 0u32..4).prop_map(|(e, n)| Expr::Pow(Box::new(e), n)),
                (funcs, inner).prop_map(|(f, e)| Expr::Call(f, Box::new(e))),
            ]
        })
    }

    fn close(a: Quaternion, b: Quaternion) -> bool {
        !a.is_finite() || !b.is_finite() || a.max_abs_diff(b) <= 1e-12 * (1.0 + a.norm())
    }

    proptest! {
        #[test]
        fn prop_render_round_trip(e in tree(true), t in -2.0f64..2.0) {
            let back = parse(&e.to_string()).unwrap();
            match (e.eval(t), back.eval(t)) {
                (Ok(a), Ok(b)) => prop_assert!(close(a, b), "{e}: {a} vs {b}"),
                (Err(a), Err(b)) => prop_assert_eq!(a, b),
                (a, b) => prop_assert!(false, "{e}: {a:?} vs {b:?}"),
            }
        }

        #[test]
        fn prop_real_trees_match_f64(e in tree(false), t in -2.0f64..2.0) {
            let want = real_eval(&e, t);
            if let Ok(got) = e.eval(t) {
                if want.is_finite() && got.is_finite() {
                    prop_assert!((got.w - want).abs() <= 1e-12 * (1.0 + want.abs()), "{e}");
                    prop_assert_eq!(got.im(), Quaternion::ZERO);
                }
            }
        }
    }
}
