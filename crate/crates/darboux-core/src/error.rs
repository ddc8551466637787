use thiserror::Error;

/// Errors raised by the dressing toolkit.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    #[error("non-finite entry at ({row},{col})")]
    NonFinite { row: usize, col: usize },

    #[error("ragged row list: row {row} has {got} entries, expected {expected}")]
    RaggedRows {
        row: usize,
        got: usize,
        expected: usize,
    },

    #[error(
        "matrix is not Hermitian: asymmetry {asymmetry:.3e} exceeds tolerance {tolerance:.3e}"
    )]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("singular matrix encountered in linear solve")]
    Singular,

    #[error(
        "spectral gap violation in {context}: distance {distance:.3e} at or below threshold {threshold:.3e}"
    )]
    SpectralGap {
        context: String,
        distance: f64,
        threshold: f64,
    },

    #[error("eigenvalue iteration failed to converge for a {n}x{n} matrix")]
    EigenNoConvergence { n: usize },

    #[error(
        "linear solve for the displacement equation left residual {residual:.3e}, above bound {bound:.3e}"
    )]
    SylvesterResidual { residual: f64, bound: f64 },

    #[error("coupling constants c[{i}] = {a} and c[{j}] = {b} are not distinct")]
    DuplicateCoupling { i: usize, j: usize, a: f64, b: f64 },

    #[error(
        "coupling constant c[{k}] = {value} is within {distance:.3e} of the spectrum of A (threshold {threshold:.3e})"
    )]
    CouplingOnSpectrum {
        k: usize,
        value: f64,
        distance: f64,
        threshold: f64,
    },

    #[error(
        "matrix identity A S - S A* = i Pi Pi* violated at t = {t}: residual {residual:.3e} exceeds {tolerance:.3e}"
    )]
    IdentityViolation {
        t: f64,
        residual: f64,
        tolerance: f64,
    },

    #[error(
        "S(t) is numerically singular at t = {t}: condition estimate {condition:.3e} exceeds limit {limit:.3e}"
    )]
    SingularState { t: f64, condition: f64, limit: f64 },

    #[error("rows of beta are not orthonormal: deviation {deviation:.3e} exceeds {tolerance:.3e}")]
    NotOrthonormal { deviation: f64, tolerance: f64 },

    #[error("axis index {k} out of range for {r} space variables")]
    AxisOutOfRange { k: usize, r: usize },

    #[error(
        "two evaluation routes for the quadratic form disagree: residual {residual:.3e} exceeds {tolerance:.3e}"
    )]
    QuadraticFormMismatch { residual: f64, tolerance: f64 },

    #[error("invalid time grid: {context}")]
    InvalidTimeGrid { context: String },

    #[error("trajectory too coarse: {context}")]
    TrajectoryTooCoarse { context: String },

    #[error("invalid box domain: {context}")]
    InvalidBox { context: String },

    #[error("quadrature grid too large: {points} points exceed the {limit} limit")]
    GridTooLarge { points: usize, limit: usize },

    #[error("unknown tolerance name {name:?}")]
    UnknownTolerance { name: String },

    #[error("invalid tolerance value for {name:?}: {value}")]
    InvalidTolerance { name: String, value: f64 },

    #[error("scenario error: {context}")]
    Scenario { context: String },

    #[error("scenario parse error: {0}")]
    ScenarioParse(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
