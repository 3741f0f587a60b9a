use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("banded factorization hit a zero pivot at row {pivot}")]
    Singular { pivot: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiscretizeError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("boundary closure {closure} is not supported on a {symmetry} grid")]
    UnsupportedClosure {
        closure: &'static str,
        symmetry: &'static str,
    },
    #[error("field has {got} samples, grid has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("field changes sign inside the decay-fit window")]
    SignChange,
    #[error("beta must be positive, got {0}")]
    NonPositiveBeta(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("field has {got} samples, grid has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite sample in {0}")]
    NonFinite(&'static str),
    #[error("crest root bracketing failed for lambda = {lambda}")]
    RootBracketing { lambda: f64 },
    #[error("quadrature left the admissible interval (0, lambda) at x = {x}")]
    LeftInterval { x: f64 },
    #[error(transparent)]
    Discretize(#[from] DiscretizeError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("Newton did not converge in {iterations} iterations (residual {residual:.3e})")]
    MaxIterations { iterations: usize, residual: f64 },
    #[error("linear solve failed: {0}")]
    LinearSolve(#[from] LinalgError),
    #[error("iterate reached the stagnation limit: max u = {max_u} >= lambda = {lambda}")]
    Stagnation { max_u: f64, lambda: f64 },
    #[error("iterate left the ellipticity region (gap {gap:.3e})")]
    Ellipticity { gap: f64 },
    #[error("non-finite residual")]
    NonFinite,
    #[error("Newton solves require an even half-line grid")]
    RequiresEvenGrid,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Discretize(#[from] DiscretizeError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContinuationError {
    #[error("invalid continuation input: {0}")]
    InvalidInput(String),
    #[error("initial solve failed: {0}")]
    InitialSolve(SolverError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Discretize(#[from] DiscretizeError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("ellipticity coefficient B = {0} is not positive")]
    NonPositiveB(f64),
    #[error("lambda = {0} outside the admissible range")]
    LambdaRange(f64),
    #[error("beta must be positive, got {0}")]
    NonPositiveBeta(f64),
    #[error(transparent)]
    Discretize(#[from] DiscretizeError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("trajectory blew up at x = {x} (norm {norm:.3e})")]
    Blowup { x: f64, norm: f64 },
    #[error("invalid oracle input: {0}")]
    InvalidInput(String),
    #[error("profiles do not share a common domain")]
    IncompatibleDomains,
}
