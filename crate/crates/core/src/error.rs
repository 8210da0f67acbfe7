use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("pole: z = {z} coincides with the puncture {puncture}")]
    Pole { z: Complex64, puncture: Complex64 },

    #[error("branch error: sqrt(p) is not defined at a root of p (z = {0})")]
    Branch(Complex64),

    #[error("point z = {z} lies outside the evaluation disk (|t| = {dist:.3e}, radius {radius:.3e})")]
    OutOfDisk { z: Complex64, dist: f64, radius: f64 },

    #[error("series coefficients overflowed at order {order}")]
    Overflow { order: usize },

    #[error("step size collapsed near waypoint {waypoint} (distance to puncture {clearance:.3e})")]
    StepCollapse { waypoint: Complex64, clearance: f64 },

    #[error("real continuation requires real coefficients, got alpha = {alpha}, beta = {beta}")]
    ComplexCoefficients { alpha: Complex64, beta: Complex64 },

    #[error("no sign change bracket found for {what}")]
    BracketNotFound { what: String },

    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),

    #[error("conjugation into real matrices failed: {0}")]
    ConjugationFailure(String),

    #[error("branch inconsistency: {0}")]
    BranchInconsistency(String),

    #[error("contour chain is open: {0}")]
    OpenChain(String),

    #[error("approach direction is tangent to the contour")]
    TangentialApproach,

    #[error("classification mismatch: {0}")]
    Mismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
