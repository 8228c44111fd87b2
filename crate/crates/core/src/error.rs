//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The assumption of a unique stationary direction failed: zero is not a
    /// simple eigenvalue of the generator (or no zero eigenvalue was found).
    #[error("zero eigenvalue is not simple: {count} eigenvalues within {tol:.3e} of zero")]
    ZeroNotSimple { count: usize, tol: f64 },

    /// A constrained linear solve left a residual above tolerance. Either the
    /// right-hand side is not in the image of the map (a construction bug) or
    /// the Fock cutoff is too small.
    #[error("linear system not solvable: relative residual {residual:.3e} exceeds {tol:.3e}")]
    NotSolvable { residual: f64, tol: f64 },

    #[error("gauge map numerically singular: condition number {cond:.3e} exceeds {max:.3e}")]
    SingularGauge { cond: f64, max: f64 },

    #[error("map is not Hermiticity-preserving: defect {defect:.3e} exceeds {tol:.3e}")]
    NotHermPreserving { defect: f64, tol: f64 },

    #[error("spectrum is not closed under complex conjugation")]
    NotConjugateClosed,

    #[error("operation requires zero detuning, got delta_a = {0}")]
    RequiresZeroDetuning(f64),

    #[error("trajectory fit ill-conditioned: {0}")]
    FitIllConditioned(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("linear algebra backend failure: {0}")]
    LinAlg(String),
}

pub type Result<T> = std::result::Result<T, Error>;
