use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid jump law: {0}")]
    InvalidLaw(String),

    #[error("first absolute moment of the jump law diverges")]
    DivergentFirstMoment,

    #[error("jump law has infinite total rate; a small-jump cutoff eps > 0 is required")]
    InfiniteActivity,

    #[error("jump law is not centered (mean jump {0:e}); the atom recursion requires zero mean")]
    NonCenteredLaw(f64),

    #[error("target set is empty")]
    EmptyTargets,

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("point (t={t}, x={x}) is outside the simulated window")]
    OutsideWindow { t: f64, x: f64 },

    #[error("two atoms share the time coordinate {0}")]
    TiedTimes(f64),

    #[error("quadrature did not converge on [{a}, {b}]")]
    QuadratureNotConverged { a: f64, b: f64 },

    #[error("sample is degenerate (zero standard deviation)")]
    DegenerateSample,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable machine-readable code, used in JSON summaries.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidLaw(_) => "invalid_law",
            Error::DivergentFirstMoment => "divergent_first_moment",
            Error::InfiniteActivity => "infinite_activity",
            Error::NonCenteredLaw(_) => "non_centered_law",
            Error::EmptyTargets => "empty_targets",
            Error::InvalidWindow(_) => "invalid_window",
            Error::OutsideWindow { .. } => "outside_window",
            Error::TiedTimes(_) => "tied_times",
            Error::QuadratureNotConverged { .. } => "quadrature_not_converged",
            Error::DegenerateSample => "degenerate_sample",
            Error::InvalidArgument(_) => "invalid_argument",
        }
    }
}
