use thiserror::Error;

use crate::solver::MrcSolution;

#[derive(Debug, Error)]
pub enum MrcError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// `k^2 - lambda_j^2` is within the Wood-anomaly tolerance of zero.
    #[error("Wood anomaly at order j={j}: |k^2 - lambda_j^2| = {gap:e} <= {tol:e}")]
    WoodAnomaly { j: i64, gap: f64, tol: f64 },

    #[error("points ({x1}, {x2}) and ({xi1}, {xi2}) are closer than min_separation {min_sep:e}")]
    CoincidentPoints {
        x1: f64,
        x2: f64,
        xi1: f64,
        xi2: f64,
        min_sep: f64,
    },

    #[error("bad node count {count} for profile {profile}: {reason}")]
    BadCount {
        profile: String,
        count: usize,
        reason: String,
    },

    #[error("pole {index} at ({x}, {y}) is outside the region between y=-b and the boundary: {reason}")]
    PoleOutsideRegion {
        index: usize,
        x: f64,
        y: f64,
        reason: String,
    },

    #[error("profile {0} is not the graph of a function")]
    NotAGraph(String),

    #[error("all singular values discarded (sigma_max = {sigma_max:e})")]
    DegenerateMatrix { sigma_max: f64 },

    /// Tolerance not met after the allowed refinements; the best solution found is attached.
    #[error("residual {r_min:e} above epsilon {epsilon:e} after {passes} pass(es)")]
    NotConverged {
        r_min: f64,
        epsilon: f64,
        passes: usize,
        best: Box<MrcSolution>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("tabulated profile: {0}")]
    Tabulated(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, MrcError>;
