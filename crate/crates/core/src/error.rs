use thiserror::Error;

/// Errors surfaced by the toolkit. The CLI maps these onto its exit codes.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),
    #[error("derivative unavailable: {0}")]
    DerivativeUnavailable(String),
    #[error("not a diffeomorphism: {0}")]
    NotDiffeomorphism(String),
    #[error("no rank decomposition on symbol")]
    NoRankDecomposition,
    #[error("grid too large for the direct quantization: {points} points > {limit}")]
    GridTooLarge { points: usize, limit: usize },
    #[error("operator failed linearity check: relative defect {0:.3e}")]
    NonlinearOperator(f64),
    #[error("quadrature failure: integrand jump {0:.3e} between adjacent nodes")]
    QuadratureFailure(f64),
    #[error("map is not contractive: sup|Dg| = {0:.6}")]
    NotContractive(f64),
    #[error("band overflow: {0}")]
    BandOverflow(String),
    #[error("symbol not evaluable at non-lattice frequencies")]
    FrequencyEvalUnavailable,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed input: {0}")]
    MalformedInput(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
