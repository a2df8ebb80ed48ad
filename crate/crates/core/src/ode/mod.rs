//! Variation-of-constants solver for `x' = A(t) x + f(t)` over quaternions.
//!
//! Every solution has the form `φ(t) = Φ(t) q + Φ(t) ∫_{t₀}^{t} Φ⁻¹(s) f(s) ds`
//! for a fundamental matrix `Φ` and a constant vector `q`. Initial values fix
//! `q = Φ⁻¹(t₀) x⁰`; periodicity fixes
//! `q = (Φ(0) − Φ(T))⁻¹ Φ(T) ∫_0^T Φ⁻¹ f`.

mod fundamental;
mod quad;

pub use fundamental::{
    fundamental_constant, fundamental_eigen, fundamental_numeric, FundamentalKind,
    FundamentalMatrix, ENTRYWISE_MAX_N,
};
pub use quad::{adaptive_simpson, MAX_DEPTH};

use std::cell::RefCell;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{ExprMatrix, ExprVector};
use crate::linalg::{singular_tolerance, QMatrix, QVector};
pub(crate) use fundamental::invert;
use fundamental::invertibility_measure;

pub const DEFAULT_QUAD_TOL: f64 = 1e-10;
pub const DEFAULT_ODE_STEPS: usize = 4096;
pub const DEFAULT_SAMPLES: usize = 101;

/// Entries of `A` varying by less than this across probe times count as
/// constant.
pub const CONSTANCY_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub enum Mode {
    Ivp { x0: QVector },
    Homogeneous { x0: QVector },
    Periodic { period: f64 },
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Ivp { .. } => "ivp",
            Mode::Homogeneous { .. } => "homogeneous",
            Mode::Periodic { .. } => "periodic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub quad_tol: f64,
    pub ode_steps: usize,
    pub samples: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            quad_tol: DEFAULT_QUAD_TOL,
            ode_steps: DEFAULT_ODE_STEPS,
            samples: DEFAULT_SAMPLES,
        }
    }
}

/// A complete initial-value or periodic problem.
#[derive(Debug, Clone)]
pub struct Problem {
    a: ExprMatrix,
    f: ExprVector,
    mode: Mode,
    t0: f64,
    t_end: f64,
    settings: Settings,
}

impl Problem {
    pub fn new(
        a: ExprMatrix,
        f: ExprVector,
        mode: Mode,
        t0: f64,
        t_end: f64,
        settings: Settings,
    ) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::Input(format!(
                "A must be square, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        if f.len() != n {
            return Err(Error::Input(format!(
                "f has {} entries, expected {n}",
                f.len()
            )));
        }
        if !(t0.is_finite() && t_end.is_finite() && t0 < t_end) {
            return Err(Error::Input(format!(
                "need t0 < t_end, got [{t0}, {t_end}]"
            )));
        }
        match &mode {
            Mode::Ivp { x0 } | Mode::Homogeneous { x0 } if x0.len() != n => {
                return Err(Error::Input(format!(
                    "x0 has {} entries, expected {n}",
                    x0.len()
                )));
            }
            Mode::Periodic { period } if !(period.is_finite() && *period > 0.0) => {
                return Err(Error::Input(format!(
                    "period must be positive, got {period}"
                )));
            }
            _ => {}
        }
        if !(settings.quad_tol > 0.0) {
            return Err(Error::Input("quad_tol must be positive".into()));
        }
        if settings.ode_steps == 0 {
            return Err(Error::Input("ode_steps must be positive".into()));
        }
        if settings.samples < 2 {
            return Err(Error::Input("samples must be at least 2".into()));
        }
        Ok(Self {
            a,
            f,
            mode,
            t0,
            t_end,
            settings,
        })
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn a(&self) -> &ExprMatrix {
        &self.a
    }

    pub fn f(&self) -> &ExprVector {
        &self.f
    }

    pub fn mode(&self) -> &Mode {
        &self.mode
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn settings(&self) -> Settings {
        self.settings
    }

    /// Equispaced sample times including both endpoints.
    pub fn sample_times(&self) -> Vec<f64> {
        sample_grid(self.t0, self.t_end, self.settings.samples)
    }

    /// Time at which the general solution is anchored.
    fn anchor(&self) -> f64 {
        match self.mode {
            Mode::Periodic { .. } => 0.0,
            _ => self.t0,
        }
    }

    /// Interval on which `Φ` must be available.
    fn working_interval(&self) -> (f64, f64) {
        match self.mode {
            Mode::Periodic { period } => (self.t0.min(0.0), self.t_end.max(period)),
            _ => (self.t0, self.t_end),
        }
    }

    /// Picks `exp(A t)` for constant coefficients and RK4 otherwise.
    pub fn fundamental(&self) -> Result<FundamentalMatrix> {
        let (lo, hi) = self.working_interval();
        let anchor = self.anchor();
        match constant_value(&self.a, lo, hi)? {
            Some(a) => fundamental_constant(&a, anchor),
            None => fundamental_numeric(&self.a, anchor, lo, hi, self.settings.ode_steps),
        }
    }
}

pub fn sample_grid(t0: f64, t_end: f64, samples: usize) -> Vec<f64> {
    let step = (t_end - t0) / (samples - 1) as f64;
    (0..samples)
        .map(|s| {
            if s + 1 == samples {
                t_end
            } else {
                t0 + s as f64 * step
            }
        })
        .collect()
}

// Probe fractions are irrational-ish so periodic entries do not alias.
const PROBES: [f64; 5] = [0.0, 0.1381966, 0.4142136, 0.7548777, 1.0];

/// `Some(A)` when every entry of `A(t)` is constant on `[lo, hi]`, judged by
/// evaluating at five spread points.
pub fn constant_value(a: &ExprMatrix, lo: f64, hi: f64) -> Result<Option<QMatrix>> {
    let first = a.eval(lo)?;
    if !a.mentions_t() {
        return Ok(Some(first));
    }
    let values = PROBES
        .iter()
        .map(|p| a.eval(lo + p * (hi - lo)))
        .collect::<Result<Vec<_>>>()?;
    for (x, vx) in values.iter().enumerate() {
        for vy in &values[x + 1..] {
            if vx.max_abs_diff(vy) >= CONSTANCY_TOL {
                return Ok(None);
            }
        }
    }
    Ok(Some(first))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub mode: String,
    pub quad_tol: f64,
    pub ode_steps: usize,
    pub fundamental: FundamentalKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Sampled trajectory. `residuals` stays empty until
/// [`crate::verify::residual_max`] fills it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionTable {
    pub times: Vec<f64>,
    pub values: Vec<QVector>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub residuals: Vec<f64>,
    pub metadata: Metadata,
}

impl SolutionTable {
    pub fn dim(&self) -> usize {
        self.values.first().map_or(0, QVector::len)
    }
}

/// Integrand `s ↦ Φ⁻¹(s) f(s)` with inverses memoized per node.
struct Integrand<'a> {
    phi: &'a FundamentalMatrix,
    f: &'a ExprVector,
    cache: RefCell<HashMap<u64, QMatrix>>,
}

impl<'a> Integrand<'a> {
    fn new(phi: &'a FundamentalMatrix, f: &'a ExprVector) -> Self {
        Self {
            phi,
            f,
            cache: RefCell::new(HashMap::new()),
        }
    }

    fn inverse_at(&self, s: f64) -> Result<QMatrix> {
        if let Some(m) = self.cache.borrow().get(&s.to_bits()) {
            return Ok(m.clone());
        }
        let m = self.phi.inverse_at(s)?;
        self.cache.borrow_mut().insert(s.to_bits(), m.clone());
        Ok(m)
    }

    fn eval(&self, s: f64) -> Result<Vec<f64>> {
        let inv = self.inverse_at(s)?;
        Ok(inv.mul_vec(&self.f.eval(s)?).to_components())
    }

    fn integrate(&self, a: f64, b: f64, tol: f64) -> Result<QVector> {
        if a == b || self.f.is_zero_literal() {
            return Ok(QVector::zeros(self.phi.dim()));
        }
        let c = adaptive_simpson(|s| self.eval(s), a, b, tol, MAX_DEPTH)?;
        Ok(QVector::from_components(&c))
    }

    /// `∫_{anchor}^{t} Φ⁻¹ f` at each of the ascending `times`, accumulated
    /// panel by panel outward from the anchor.
    fn cumulative(&self, anchor: f64, times: &[f64], quad_tol: f64) -> Result<Vec<QVector>> {
        let n = self.phi.dim();
        let span = times.iter().map(|t| (t - anchor).abs()).fold(0.0, f64::max);
        let panel_tol = |len: f64| {
            if span > 0.0 {
                quad_tol * len / span
            } else {
                quad_tol
            }
        };
        let mut out = vec![QVector::zeros(n); times.len()];
        let split = times.partition_point(|&t| t < anchor);

        let mut acc = QVector::zeros(n);
        let mut prev = anchor;
        for (idx, &t) in times.iter().enumerate().skip(split) {
            acc = &acc + &self.integrate(prev, t, panel_tol(t - prev))?;
            out[idx] = acc.clone();
            prev = t;
        }
        let mut acc = QVector::zeros(n);
        let mut prev = anchor;
        for idx in (0..split).rev() {
            let t = times[idx];
            acc = &acc + &self.integrate(prev, t, panel_tol(prev - t))?;
            out[idx] = acc.clone();
            prev = t;
        }
        Ok(out)
    }
}

/// `Φ(t) ∫_{t₀}^{t} Φ⁻¹(s) f(s) ds`.
pub fn particular_integral(
    phi: &FundamentalMatrix,
    f: &ExprVector,
    t0: f64,
    t: f64,
    quad_tol: f64,
) -> Result<QVector> {
    let integral = Integrand::new(phi, f).integrate(t0, t, quad_tol)?;
    Ok(phi.eval(t)?.mul_vec(&integral))
}

/// `t ↦ Φ(t) q + Φ(t) ∫_{t₀}^{t} Φ⁻¹(s) f(s) ds`.
pub struct GeneralSolution<'a> {
    integrand: Integrand<'a>,
    q: QVector,
    t0: f64,
    quad_tol: f64,
}

pub fn general_solution<'a>(
    phi: &'a FundamentalMatrix,
    q: QVector,
    f: &'a ExprVector,
    t0: f64,
    quad_tol: f64,
) -> Result<GeneralSolution<'a>> {
    if q.len() != phi.dim() || f.len() != phi.dim() {
        return Err(Error::Shape(format!(
            "q has {} and f has {} entries for a system of order {}",
            q.len(),
            f.len(),
            phi.dim()
        )));
    }
    Ok(GeneralSolution {
        integrand: Integrand::new(phi, f),
        q,
        t0,
        quad_tol,
    })
}

impl GeneralSolution<'_> {
    pub fn eval(&self, t: f64) -> Result<QVector> {
        let integral = self.integrand.integrate(self.t0, t, self.quad_tol)?;
        Ok(self.integrand.phi.eval(t)?.mul_vec(&(&self.q + &integral)))
    }

    /// Values at ascending `times`, sharing quadrature panels between
    /// neighbouring samples.
    pub fn sample(&self, times: &[f64]) -> Result<Vec<QVector>> {
        let integrals = self.integrand.cumulative(self.t0, times, self.quad_tol)?;
        times
            .iter()
            .zip(integrals)
            .map(|(&t, integral)| Ok(self.integrand.phi.eval(t)?.mul_vec(&(&self.q + &integral))))
            .collect()
    }

    pub fn constant(&self) -> &QVector {
        &self.q
    }
}

fn metadata(p: &Problem, phi: &FundamentalMatrix, warnings: Vec<String>) -> Metadata {
    Metadata {
        mode: p.mode.name().to_string(),
        quad_tol: p.settings.quad_tol,
        ode_steps: p.settings.ode_steps,
        fundamental: phi.kind(),
        warnings,
    }
}

/// `φ(t) = Φ(t) Φ⁻¹(t₀) x⁰ + Φ(t) ∫_{t₀}^{t} Φ⁻¹(s) f(s) ds` at the sample
/// times. Homogeneous problems use `f = 0`.
pub fn solve_ivp(p: &Problem) -> Result<SolutionTable> {
    let (x0, zero_f);
    let f = match &p.mode {
        Mode::Ivp { x0: x } => {
            x0 = x;
            &p.f
        }
        Mode::Homogeneous { x0: x } => {
            x0 = x;
            zero_f = ExprVector::zeros(p.dim());
            &zero_f
        }
        Mode::Periodic { .. } => {
            return Err(Error::Input(
                "solve_ivp needs an ivp or homogeneous problem".into(),
            ))
        }
    };
    let phi = p.fundamental()?;
    solve_ivp_with(p, &phi, f, x0)
}

/// Same as [`solve_ivp`] with a caller-supplied fundamental matrix.
pub fn solve_ivp_with(
    p: &Problem,
    phi: &FundamentalMatrix,
    f: &ExprVector,
    x0: &QVector,
) -> Result<SolutionTable> {
    let q = invert(&phi.eval(p.t0)?)?.mul_vec(x0);
    let sol = general_solution(phi, q, f, p.t0, p.settings.quad_tol)?;
    let times = p.sample_times();
    let mut values = sol.sample(&times)?;
    // At t₀ the formula reduces to x⁰ up to rounding in Φ(t₀)Φ⁻¹(t₀).
    if times[0] == p.t0 {
        values[0] = x0.clone();
    }
    Ok(SolutionTable {
        times,
        values,
        residuals: Vec::new(),
        metadata: metadata(p, phi, Vec::new()),
    })
}

/// The `T`-periodic solution, when `Φ(0) − Φ(T)` is invertible.
pub fn solve_periodic(p: &Problem) -> Result<SolutionTable> {
    let Mode::Periodic { period } = p.mode else {
        return Err(Error::Input(
            "solve_periodic needs a periodic problem".into(),
        ));
    };
    let mut warnings = Vec::new();
    let drift = periodicity_defect(p, period)?;
    if drift > 1e-9 {
        warnings.push(format!(
            "A(t) or f(t) does not look {period}-periodic (max sampled deviation {drift:e})"
        ));
    }

    let phi = p.fundamental()?;
    let phi_0 = phi.eval(0.0)?;
    let phi_t = phi.eval(period)?;
    let gap = &phi_0 - &phi_t;
    let d = invertibility_measure(&gap)?;
    if d.abs() < singular_tolerance(&gap) {
        return Err(Error::NoPeriodicSolution { ddet: d });
    }
    let integrand = Integrand::new(&phi, &p.f);
    let over_period = integrand.integrate(0.0, period, p.settings.quad_tol)?;
    let q = invert(&gap)?.mul_vec(&phi_t.mul_vec(&over_period));

    let sol = general_solution(&phi, q, &p.f, 0.0, p.settings.quad_tol)?;
    let times = p.sample_times();
    let values = sol.sample(&times)?;
    Ok(SolutionTable {
        times,
        values,
        residuals: Vec::new(),
        metadata: metadata(p, &phi, warnings),
    })
}

fn periodicity_defect(p: &Problem, period: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for s in 0..8 {
        let t = period * (s as f64 + 0.37) / 8.0;
        worst = worst.max(p.a.eval(t + period)?.max_abs_diff(&p.a.eval(t)?));
        worst = worst.max(p.f.eval(t + period)?.max_abs_diff(&p.f.eval(t)?));
    }
    Ok(worst)
}

/// Dispatches on the problem mode.
pub fn solve(p: &Problem) -> Result<SolutionTable> {
    match p.mode {
        Mode::Periodic { .. } => solve_periodic(p),
        _ => solve_ivp(p),
    }
}
