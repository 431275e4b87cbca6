use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invariant density R^2 = {r2:e} is at or below the floor {floor:e}")]
    DegenerateDensity { r2: f64, floor: f64 },

    #[error("tetrad is singular (|det| = {det:e})")]
    SingularTetrad { det: f64 },

    #[error("matrix is not invertible: {0}")]
    NonInvertible(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid axis {axis} has {points} points; differentiated axes need at least 5")]
    GridTooSmall { axis: usize, points: usize },

    #[error("no sign change of the matching function in [{lo}, {hi}]")]
    NoRootInBracket {
        lo: f64,
        hi: f64,
        /// `(energy, matching function)` samples that were tried.
        trace: Vec<(f64, f64)>,
    },

    #[error("integration failed to stay finite near r = {r}")]
    StiffnessFailure { r: f64 },

    #[error("self-consistent iteration diverged at iteration {iteration}")]
    DivergenceDetected { iteration: usize, history: Vec<f64> },

    #[error("no regular angular solution for k = {k}, m3 = {m3}")]
    NoRegularSolution { k: f64, m3: i32 },

    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
