use thiserror::Error;

/// Errors raised by the geometry, ODE and flow routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Eigenvalues outside the closure of the admissible cone.
    #[error("λ = {lambda:?} lies outside the closure of the cone {cone}")]
    OutsideCone { lambda: Vec<f64>, cone: String },

    /// Derivatives were requested at a point on the cone boundary.
    #[error("λ = {lambda:?} lies on the boundary of the cone {cone}; derivatives are not defined there")]
    OnBoundary { lambda: Vec<f64>, cone: String },

    /// A pointwise field computation met an inadmissible curvature vector.
    #[error("grid point {index:?}: {source}")]
    AtGridPoint {
        index: Vec<usize>,
        #[source]
        source: Box<Error>,
    },

    /// Generic violation of an operation's domain (slab bounds, parameters, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid curvature function: {0}")]
    InvalidSpec(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate grid: axis {axis} has {points} points (at least {required} needed)")]
    DegenerateGrid {
        axis: usize,
        points: usize,
        required: usize,
    },

    #[error("local error estimate {estimate:.3e} exceeds tolerance {tolerance:.3e} at x = {x}")]
    StepTooLarge {
        x: f64,
        estimate: f64,
        tolerance: f64,
    },

    #[error("could not bracket the radial curvature root in [{lo}, {hi}] at r = {r}")]
    RootBracketFailure { r: f64, lo: f64, hi: f64 },

    #[error("curvature left the cone {cone} at {location}: λ = {lambda:?}")]
    ConeExit {
        location: String,
        lambda: Vec<f64>,
        cone: String,
    },

    #[error("instability: max |u| grew by a factor {growth:.3e} in one step")]
    Instability { growth: f64 },

    #[error("flow failed at t = {t}: {source}")]
    FlowFailure {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("value {value} outside the interpolation range [{min}, {max}]")]
    InterpolationRange { value: f64, min: f64, max: f64 },

    #[error("data is not a translator: max residual {max_residual:.3e} exceeds tolerance {tolerance:.3e}")]
    NotATranslator { max_residual: f64, tolerance: f64 },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical_failure(&self) -> bool {
        match self {
            Error::StepTooLarge { .. }
            | Error::RootBracketFailure { .. }
            | Error::ConeExit { .. }
            | Error::Instability { .. } => true,
            Error::FlowFailure { source, .. } | Error::AtGridPoint { source, .. } => {
                source.is_numerical_failure()
            }
            _ => false,
        }
    }

    pub(crate) fn at(index: Vec<usize>, source: Error) -> Self {
        Error::AtGridPoint {
            index,
            source: Box::new(source),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
