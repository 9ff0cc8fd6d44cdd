//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by the toolkit. Variants carry enough context to name the
/// failing invariant in CLI messages.
#[derive(Debug, Error)]
pub enum Error {
    /// A matrix argument contains non-finite entries or is malformed.
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    /// A matrix required to be positive semidefinite has a significantly
    /// negative eigenvalue.
    #[error("matrix is not PSD: eigenvalue {eigenvalue} below -{tolerance} * operator norm")]
    NotPsd { eigenvalue: f64, tolerance: f64 },

    /// Whitening is impossible because the weighted moment matrix is zero.
    #[error("degenerate instance: weighted moment matrix has rank 0")]
    DegenerateInstance,

    /// Effective resistance queried across components.
    #[error("vertices {s} and {t} are not connected in the positive-weight subgraph")]
    Disconnected { s: usize, t: usize },

    /// Cut query with an empty or full vertex set.
    #[error("invalid cut: S must be a nonempty proper subset of the vertices")]
    InvalidCut,

    /// Mismatched dimensions between two arguments.
    #[error("dimension mismatch: {0}")]
    DimensionError(String),

    /// A numerical routine left its guaranteed regime.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// Rounding input is not in isotropic position.
    #[error("instance is not isotropic: |sum x_i v_i v_i^T - I| = {deviation:.3e} exceeds {tolerance:.1e}")]
    NotIsotropic { deviation: f64, tolerance: f64 },

    /// The randomized swap exceeded its iteration cap. Carries the partial
    /// selection at abort time.
    #[error("iteration cap exceeded after {iterations} iterations (lambda_min = {lambda_min})")]
    IterationCapExceeded {
        iterations: usize,
        lambda_min: f64,
        partial: Vec<usize>,
    },

    /// Signing with all-zero weighted costs.
    #[error("degenerate costs: <c, x> = 0")]
    DegenerateCosts,

    /// Sparsifier verification on an empty edge subset.
    #[error("empty sparsifier")]
    EmptySparsifier,

    /// A runtime certificate inequality failed; indicates a bug.
    #[error("certificate violation: {0}")]
    CertificateViolation(String),

    /// Network reduction on a fractional solution with disconnected support.
    #[error("fractional support is disconnected (Laplacian rank {rank}, expected {expected})")]
    DisconnectedSupport { rank: usize, expected: usize },

    /// Relaxation solver could not reach a finite objective.
    #[error("relaxation infeasible: no finite objective after {iterations} iterations")]
    Infeasible { iterations: usize },

    /// Budgeted design rounding called below its budget threshold.
    #[error("budget too small: C = {budget} < {required} = 15 n c_inf / eps^2")]
    BudgetTooSmall { budget: f64, required: f64 },

    /// All budgeted-rounding retries exceeded the budget.
    #[error("unlucky run: {attempts} seeded attempts exceeded the budget")]
    UnluckyRun { attempts: usize },

    /// A synthetic chain broke one of the concentration hypotheses.
    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),

    /// Concentration bound evaluated outside its parameter ranges.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Unparsable or inconsistent input data.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
