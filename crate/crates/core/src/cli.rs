//! Command-line front end: read a JSON problem file, solve, and print CSV or
//! JSON.
//!
//! Exit status is 0 on success, 2 for unusable input and 3 when the numerics
//! fail (singular matrices, quadrature or step-size failure).

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::Error;
use crate::expr::{Expr, ExprMatrix, ExprVector};
use crate::linalg::{ddet, det_p, right_eigenpairs, QMatrix, QVector};
use crate::ode::{
    self, constant_value, sample_grid, Mode, Problem, Settings, SolutionTable, DEFAULT_ODE_STEPS,
    DEFAULT_QUAD_TOL, DEFAULT_SAMPLES,
};
use crate::quat::Quaternion;
use crate::verify;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "quatode",
    version,
    about = "Solve linear quaternion-valued ODE systems"
)]
pub struct Args {
    /// Problem file (JSON)
    #[arg(long)]
    pub input: PathBuf,
    /// Output path, or "-" for stdout
    #[arg(long, default_value = "-")]
    pub output: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Overrides quad_tol from the problem file
    #[arg(long)]
    pub tol: Option<f64>,
    /// Overrides samples from the problem file
    #[arg(long)]
    pub samples: Option<usize>,
    /// Append finite-difference residuals
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Ivp,
    Periodic,
    Fundamental,
    Detp,
    Ddet,
    Inverse,
    Eig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    pub mode: ModeName,
    #[serde(rename = "A")]
    pub a: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ode_steps: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("invalid problem file: {0}")]
    Schema(String),
    #[error("{0}")]
    Solver(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Solver(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

/// Flag overrides applied on top of the problem file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Options {
    pub format: Format,
    pub tol: Option<f64>,
    pub samples: Option<usize>,
    pub verify: bool,
}

impl From<&Args> for Options {
    fn from(a: &Args) -> Self {
        Self {
            format: a.format,
            tol: a.tol,
            samples: a.samples,
            verify: a.verify,
        }
    }
}

/// Rendered result plus anything worth telling the user on stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub body: String,
    pub notes: Vec<String>,
}

pub fn parse_problem(text: &str) -> Result<ProblemFile, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

impl ProblemFile {
    fn matrix(&self) -> Result<ExprMatrix, CliError> {
        if self.n == 0 {
            return Err(schema("n must be positive"));
        }
        if self.a.len() != self.n || self.a.iter().any(|r| r.len() != self.n) {
            return Err(schema(format!(
                "A must be a {0}x{0} array of strings",
                self.n
            )));
        }
        Ok(ExprMatrix::parse(&self.a)?)
    }

    fn forcing(&self) -> Result<ExprVector, CliError> {
        match &self.f {
            None => Ok(ExprVector::zeros(self.n)),
            Some(f) if f.len() != self.n => Err(schema(format!(
                "f has {} entries, expected {}",
                f.len(),
                self.n
            ))),
            Some(f) => Ok(ExprVector::parse(f)?),
        }
    }

    fn initial(&self) -> Result<QVector, CliError> {
        let x0 = self
            .x0
            .as_ref()
            .ok_or_else(|| schema("mode ivp requires x0"))?;
        if x0.len() != self.n {
            return Err(schema(format!(
                "x0 has {} entries, expected {}",
                x0.len(),
                self.n
            )));
        }
        let mut out = Vec::with_capacity(x0.len());
        for (r, cell) in x0.iter().enumerate() {
            let e: Expr = cell.parse().map_err(|e: Error| e.in_cell(r, 0))?;
            if e.mentions_t() {
                return Err(schema(format!("x0[{r}] must not depend on t")));
            }
            out.push(e.eval(0.0).map_err(|e| e.in_cell(r, 0))?);
        }
        Ok(QVector(out))
    }

    fn settings(&self, opts: &Options) -> Settings {
        Settings {
            quad_tol: opts.tol.or(self.quad_tol).unwrap_or(DEFAULT_QUAD_TOL),
            ode_steps: self.ode_steps.unwrap_or(DEFAULT_ODE_STEPS),
            samples: opts.samples.or(self.samples).unwrap_or(DEFAULT_SAMPLES),
        }
    }

    fn t0(&self) -> f64 {
        self.t0.unwrap_or(0.0)
    }

    /// Builds the solver problem for the ivp and periodic modes.
    pub fn to_problem(&self, opts: &Options) -> Result<Problem, CliError> {
        let a = self.matrix()?;
        let f = self.forcing()?;
        let settings = self.settings(opts);
        let t0 = self.t0();
        let (mode, t_end) = match self.mode {
            ModeName::Ivp => {
                let t_end = self
                    .t_end
                    .ok_or_else(|| schema("mode ivp requires t_end"))?;
                (
                    Mode::Ivp {
                        x0: self.initial()?,
                    },
                    t_end,
                )
            }
            ModeName::Periodic => {
                let period = self
                    .period
                    .ok_or_else(|| schema("mode periodic requires T"))?;
                (Mode::Periodic { period }, self.t_end.unwrap_or(t0 + period))
            }
            other => return Err(schema(format!("mode {other:?} is not a trajectory mode"))),
        };
        Ok(Problem::new(a, f, mode, t0, t_end, settings)?)
    }
}

fn num(x: f64) -> String {
    // `+ 0.0` turns -0 into 0
    format!("{:.16e}", x + 0.0)
}

fn push_quat(row: &mut String, q: Quaternion) {
    for c in q.to_array() {
        row.push(',');
        row.push_str(&num(c));
    }
}

/// Rounds to 12 significant digits and drops components that are rounding
/// noise relative to `scale`, for symbolic display.
pub fn tidy(q: Quaternion, scale: f64) -> Quaternion {
    let round = |c: f64| format!("{c:.11e}").parse::<f64>().unwrap_or(c);
    let q = q.chop(1e-13 * scale.max(1.0));
    Quaternion::new(round(q.w), round(q.x), round(q.y), round(q.z))
}

fn table_csv(table: &SolutionTable) -> String {
    let n = table.dim();
    let mut out = String::from("t");
    for m in 1..=n {
        for c in ["w", "i", "j", "k"] {
            let _ = write!(out, ",x{m}.{c}");
        }
    }
    if !table.residuals.is_empty() {
        out.push_str(",residual");
    }
    out.push('\n');
    for (s, (&t, v)) in table.times.iter().zip(&table.values).enumerate() {
        let mut row = num(t);
        for &q in v.iter() {
            push_quat(&mut row, q);
        }
        if let Some(r) = table.residuals.get(s) {
            row.push(',');
            row.push_str(&num(*r));
        }
        out.push_str(&row);
        out.push('\n');
    }
    out
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn solve_trajectory(p: &ProblemFile, opts: &Options) -> Result<Report, CliError> {
    let problem = p.to_problem(opts)?;
    let mut table = ode::solve(&problem)?;
    let mut notes = table.metadata.warnings.clone();
    if opts.verify {
        let worst = verify::residual_max(&mut table, problem.a(), problem.f())?;
        notes.push(format!("max interior residual: {worst:e}"));
    }
    let body = match opts.format {
        Format::Csv => table_csv(&table),
        Format::Json => to_json(&table),
    };
    Ok(Report { body, notes })
}

fn fundamental_table(p: &ProblemFile, opts: &Options) -> Result<Report, CliError> {
    let a = p.matrix()?;
    let settings = p.settings(opts);
    let t0 = p.t0();
    let t_end = p
        .t_end
        .ok_or_else(|| schema("mode fundamental requires t_end"))?;
    if !(t0 < t_end) || settings.samples < 2 {
        return Err(schema("need t0 < t_end and samples >= 2"));
    }
    let phi = match constant_value(&a, t0, t_end)? {
        Some(c) => ode::fundamental_constant(&c, t0)?,
        None => ode::fundamental_numeric(&a, t0, t0, t_end, settings.ode_steps)?,
    };
    let times = sample_grid(t0, t_end, settings.samples);
    let mut values = Vec::with_capacity(times.len());
    let mut dets = Vec::with_capacity(times.len());
    for &t in &times {
        let m = phi.eval(t)?;
        dets.push(ddet(&m)?);
        values.push(m);
    }
    let body = match opts.format {
        Format::Csv => {
            let n = p.n;
            let mut out = String::from("t");
            for r in 1..=n {
                for c in 1..=n {
                    for u in ["w", "i", "j", "k"] {
                        let _ = write!(out, ",phi{r}_{c}.{u}");
                    }
                }
            }
            out.push_str(",ddet\n");
            for ((&t, m), d) in times.iter().zip(&values).zip(&dets) {
                let mut row = num(t);
                for &q in m.entries() {
                    push_quat(&mut row, q);
                }
                row.push(',');
                row.push_str(&num(*d));
                out.push_str(&row);
                out.push('\n');
            }
            out
        }
        Format::Json => to_json(&json!({
            "times": times,
            "values": values,
            "ddet": dets,
            "fundamental": phi.kind(),
        })),
    };
    Ok(Report {
        body,
        notes: Vec::new(),
    })
}

fn matrix_text(m: &QMatrix) -> String {
    let scale = m.max_abs();
    let mut out = String::new();
    for row in m.to_rows() {
        let cells: Vec<String> = row.iter().map(|&q| tidy(q, scale).to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn algebra(p: &ProblemFile, opts: &Options) -> Result<Report, CliError> {
    let a = p.matrix()?.eval(p.t0())?;
    let scale = a.max_abs();
    let body = match p.mode {
        ModeName::Detp => {
            let d = det_p(&a)?;
            let shown = tidy(d, scale.powi(p.n as i32));
            match opts.format {
                Format::Csv => format!("{shown}\n"),
                Format::Json => to_json(&json!({ "detp": d, "text": shown.to_string() })),
            }
        }
        ModeName::Ddet => {
            let d = ddet(&a)?;
            match opts.format {
                Format::Csv => format!("{d}\n"),
                Format::Json => to_json(&json!({ "ddet": d })),
            }
        }
        ModeName::Inverse => {
            let inv = ode::invert(&a)?;
            match opts.format {
                Format::Csv => matrix_text(&inv),
                Format::Json => to_json(&json!({ "inverse": inv })),
            }
        }
        ModeName::Eig => {
            let m = p.matrix()?;
            if m.mentions_t() && constant_value(&m, p.t0(), p.t0() + 1.0)?.is_none() {
                return Err(schema("mode eig requires a constant A"));
            }
            let pairs = right_eigenpairs(&a)?;
            match opts.format {
                Format::Csv => {
                    let mut out = String::from("lambda");
                    for r in 1..=p.n {
                        let _ = write!(out, ",v{r}");
                    }
                    out.push('\n');
                    for pair in &pairs {
                        out.push_str(&tidy(pair.lambda, scale).to_string());
                        for &q in pair.vector.iter() {
                            out.push(',');
                            out.push_str(&tidy(q, 1.0).to_string());
                        }
                        out.push('\n');
                    }
                    out
                }
                Format::Json => to_json(&json!({ "eigenpairs": pairs })),
            }
        }
        _ => unreachable!("trajectory modes are handled elsewhere"),
    };
    Ok(Report {
        body,
        notes: Vec::new(),
    })
}

/// Solves a parsed problem file and renders the output.
pub fn execute(p: &ProblemFile, opts: &Options) -> Result<Report, CliError> {
    match p.mode {
        ModeName::Ivp | ModeName::Periodic => solve_trajectory(p, opts),
        ModeName::Fundamental => fundamental_table(p, opts),
        _ => algebra(p, opts),
    }
}

/// Same as [`execute`] starting from the problem file's text.
pub fn execute_str(text: &str, opts: &Options) -> Result<Report, CliError> {
    execute(&parse_problem(text)?, opts)
}

pub fn run(args: &Args) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", args.input.display())))?;
    let report = execute_str(&text, &Options::from(args))?;
    if args.output == "-" {
        print!("{}", report.body);
    } else {
        std::fs::write(&args.output, &report.body)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", args.output)))?;
    }
    Ok(report.notes)
}

/// Entry point used by the binary.
pub fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(notes) => {
            for n in notes {
                eprintln!("note: {n}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ROTATION: &str = r#"{
        "n": 2, "mode": "ivp",
        "A": [["j", "0"], ["0", "k"]],
        "f": ["(t^2 + 1)*i", "t*j"],
        "x0": ["j", "k"],
        "t0": 0, "t_end": 1
    }"#;

    fn opts() -> Options {
        Options::default()
    }

    #[test]
    fn ivp_csv_header_and_first_row() {
        let out = execute_str(ROTATION, &opts()).unwrap().body;
        let mut lines = out.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,x1.w,x1.i,x1.j,x1.k,x2.w,x2.i,x2.j,x2.k"
        );
        let first: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|c| c.parse().unwrap())
            .collect();
        assert_eq!(first, vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(out.lines().count(), 102);
    }

    #[test]
    fn verify_adds_residual_column() {
        let o = Options {
            verify: true,
            samples: Some(11),
            ..opts()
        };
        let r = execute_str(ROTATION, &o).unwrap();
        assert!(r.body.lines().next().unwrap().ends_with(",residual"));
        assert_eq!(r.body.lines().count(), 12);
        assert!(r.notes[0].starts_with("max interior residual"));
    }

    #[test]
    fn json_output_round_trips() {
        let o = Options {
            format: Format::Json,
            samples: Some(11),
            ..opts()
        };
        let body = execute_str(ROTATION, &o).unwrap().body;
        let table: SolutionTable = serde_json::from_str(&body).unwrap();
        assert_eq!(table.times.len(), 11);
        assert_eq!(table.metadata.mode, "ivp");
    }

    #[test]
    fn detp_and_ddet_modes() {
        let detp = r#"{"n": 2, "mode": "detp", "A": [["1+j", "i+k"], ["1", "k"]]}"#;
        assert_eq!(execute_str(detp, &opts()).unwrap().body, "-2i\n");
        let dd = r#"{"n": 2, "mode": "ddet", "A": [["j", "-i"], ["1", "k"]]}"#;
        assert_eq!(execute_str(dd, &opts()).unwrap().body, "4\n");
    }

    #[test]
    fn inverse_and_eig_modes() {
        let inv = r#"{"n": 2, "mode": "inverse", "A": [["j", "-i"], ["1", "k"]]}"#;
        assert_eq!(
            execute_str(inv, &opts()).unwrap().body,
            "-0.5j,0.5\n0.5i,-0.5k\n"
        );
        let eig = r#"{"n": 2, "mode": "eig", "A": [["i", "0"], ["1", "1+i"]]}"#;
        let body = execute_str(eig, &opts()).unwrap().body;
        let lambdas: Vec<&str> = body
            .lines()
            .skip(1)
            .map(|l| l.split(',').next().unwrap())
            .collect();
        assert_eq!(lambdas, vec!["i", "1+i"]);
    }

    #[test]
    fn fundamental_mode_reports_ddet() {
        let p = r#"{"n": 2, "mode": "fundamental", "A": [["i", "0"], ["1", "1+i"]],
                    "t_end": 1, "samples": 3}"#;
        let body = execute_str(p, &opts()).unwrap().body;
        let last = body.lines().last().unwrap();
        let d: f64 = last.rsplit(',').next().unwrap().parse().unwrap();
        assert!((d - 2f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn input_errors_exit_2() {
        let cases = [
            r#"{"n": 2, "mode": "ivp"}"#,
            r#"{"n": 1, "mode": "ivp", "A": [["j"]], "x0": ["1"], "t_end": 1, "bogus": 1}"#,
            r#"{"n": 1, "mode": "ivp", "A": [["2i"]], "x0": ["1"], "t_end": 1}"#,
            r#"{"n": 1, "mode": "ivp", "A": [["j"]], "x0": ["t"], "t_end": 1}"#,
            r#"{"n": 1, "mode": "ivp", "A": [["j"]], "t_end": 1}"#,
            r#"{"n": 2, "mode": "ddet", "A": [["j"]]}"#,
            r#"{"n": 1, "mode": "periodic", "A": [["-1"]]}"#,
        ];
        for c in cases {
            let e = execute_str(c, &opts()).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{c}: {e}");
        }
    }

    #[test]
    fn parse_errors_carry_position() {
        let p = r#"{"n": 1, "mode": "ivp", "A": [["j + 2i"]], "x0": ["1"], "t_end": 1}"#;
        let msg = execute_str(p, &opts()).unwrap_err().to_string();
        assert!(
            msg.contains("cell (0, 0)") && msg.contains("position"),
            "{msg}"
        );
    }

    #[test]
    fn numerical_errors_exit_3() {
        let singular = r#"{"n": 2, "mode": "inverse", "A": [["1", "j"], ["1", "j"]]}"#;
        assert_eq!(execute_str(singular, &opts()).unwrap_err().exit_code(), 3);
        let resonant = r#"{"n": 1, "mode": "periodic", "A": [["j"]], "f": ["cos(t)"], "T": 6.283185307179586}"#;
        assert_eq!(execute_str(resonant, &opts()).unwrap_err().exit_code(), 3);
    }
}
