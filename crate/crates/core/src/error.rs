use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by the zero quaternion")]
    DivisionByZero,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("index ({k}, {j}) out of range for a {n}x{n} matrix")]
    IndexOutOfRange { k: usize, j: usize, n: usize },

    #[error("det_p enumerates n! permutations and is capped at n = {max}, got n = {n}")]
    TooLarge { n: usize, max: usize },

    #[error("matrix is singular (ddet = {ddet:e})")]
    Singular { ddet: f64 },

    #[error("ddet has an imaginary part of {imag:e} (real part {real:e})")]
    NotReal { real: f64, imag: f64 },

    #[error("complex matrix is not the adjoint of a quaternion matrix (deviation {deviation:e})")]
    NotQuaternionic { deviation: f64 },

    #[error("eigenvector extraction failed: {0}")]
    Defective(String),

    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier '{name}' at position {pos}")]
    UnknownIdentifier { pos: usize, name: String },

    #[error("exponent at position {pos} must be a non-negative integer literal")]
    BadExponent { pos: usize },

    #[error("{func} requires a real argument, got imaginary part of norm {imag:e}")]
    NonRealArgument { func: &'static str, imag: f64 },

    #[error("cell ({row}, {col}): {source}")]
    Cell {
        row: usize,
        col: usize,
        source: Box<Error>,
    },

    #[error("adaptive quadrature did not converge on [{a}, {b}] within depth {depth}")]
    Quadrature { a: f64, b: f64, depth: u32 },

    #[error("fundamental matrix became singular at t = {t} (ddet = {ddet:e}); increase ode_steps")]
    StepFailure { t: f64, ddet: f64 },

    #[error("t = {t} lies outside the integrated interval [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("no unique periodic solution: Phi(0) - Phi(T) is singular (ddet = {ddet:e})")]
    NoPeriodicSolution { ddet: f64 },

    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },

    #[error("invalid problem: {0}")]
    Input(String),
}

impl Error {
    /// True for failures of the numerics (singularity, non-convergence) as
    /// opposed to malformed input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::DivisionByZero
            | Error::Singular { .. }
            | Error::NotReal { .. }
            | Error::NotQuaternionic { .. }
            | Error::Defective(_)
            | Error::Quadrature { .. }
            | Error::StepFailure { .. }
            | Error::NoPeriodicSolution { .. } => true,
            Error::Cell { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub(crate) fn in_cell(self, row: usize, col: usize) -> Self {
        Error::Cell {
            row,
            col,
            source: Box::new(self),
        }
    }
}
