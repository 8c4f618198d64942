use thiserror::Error;

/// Errors raised by the numerical pipeline. Values are reported as `f64`
/// regardless of the scalar type the computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value at node {index} (x = {x})")]
    NonFinite { index: usize, x: f64 },

    #[error("length mismatch: expected {expected} samples, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error(
        "near-vanishing denominator at node {index} (|v| = {value:e}, threshold {threshold:e})"
    )]
    VanishingDenominator {
        index: usize,
        value: f64,
        threshold: f64,
    },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("not a band edge: |f0(T) - f0(0)| = {defect:e} exceeds {tolerance:e}")]
    NotBandEdge { defect: f64, tolerance: f64 },

    #[error("f0,2(T) vanishes and the periodic combination is undetermined")]
    DegenerateEndpoint,

    #[error("f0 not periodic: |f0(T) - f0(0)| = {defect:e}")]
    NotPeriodic { defect: f64 },

    #[error("series budget exceeded at lambda = {lambda}: tail ratio {ratio:e}")]
    SeriesBudgetExceeded { lambda: f64, ratio: f64 },

    #[error("series ill-conditioned at lambda = {lambda}: rounding bound {bound:e}")]
    IllConditioned { lambda: f64, bound: f64 },

    #[error("no sign change of D - 2 found on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("imaginary residue {residue:e} in discriminant coefficient {index}")]
    ImaginaryResidue { index: usize, residue: f64 },

    #[error("empty lambda range [{lo}, {hi}]")]
    EmptyRange { lo: f64, hi: f64 },

    #[error("series truncation insufficient beyond lambda = {lambda} ({found} of {requested} eigenvalues found)")]
    TruncationInsufficient {
        lambda: f64,
        found: usize,
        requested: usize,
    },

    #[error("degenerate self-matching quadratic: |f2(T)| = {value:e}")]
    DegenerateQuadratic { value: f64 },

    #[error("Bloch factor cross-check failed: deviation {deviation:e}")]
    BlochMismatch { deviation: f64 },

    #[error("factorization residual too large: {residual:e}")]
    FactorizationResidual { residual: f64 },

    #[error("SUSY invariance violated: max |D - D~| = {deviation:e} at lambda = {lambda}")]
    SusyInvarianceViolated { deviation: f64, lambda: f64 },

    #[error("involution check failed: {what} deviates by {deviation:e}")]
    InvolutionFailed { what: &'static str, deviation: f64 },

    #[error("ODE integration failed: {0}")]
    Integration(String),
}

pub type Result<T> = std::result::Result<T, Error>;
