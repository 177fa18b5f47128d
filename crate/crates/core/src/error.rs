use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter coordinate {index} = {value} lies outside [{lo}, {hi}]")]
    DomainViolation {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("{what}: expected dimension {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("quadrature backend supports d <= 2, model has d = {0}")]
    UnsupportedDimension(usize),

    #[error("unsupported operation: {0}")]
    Unsupported(&'static str),

    #[error("non-finite log target {value} at initial parameter {param:?} (chain {chain})")]
    NonFiniteInit {
        chain: usize,
        param: Vec<f64>,
        value: f64,
    },

    #[error("non-finite value {value} for draw {index}")]
    NonFiniteDraw { index: usize, value: f64 },

    #[error("overflow in log E_w[p(X_i|w)^alpha] at sample {sample}, alpha = {alpha}")]
    Overflow { sample: usize, alpha: f64 },

    #[error("alpha = {alpha} outside the window [{lo}, {hi}]")]
    AlphaOutOfWindow { alpha: f64, lo: f64, hi: f64 },

    #[error("need at least {needed} reports, got {got}")]
    TooFewReports { needed: usize, got: usize },

    #[error("report {index} is missing `{field}`")]
    MissingField { index: usize, field: &'static str },

    #[error("all {0} replicates failed")]
    AllReplicatesFailed(usize),

    #[error("configuration error:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("ensemble file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerical machinery (sampler, overflow), as
    /// opposed to bad inputs or configuration.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFiniteInit { .. }
                | Error::NonFiniteDraw { .. }
                | Error::Overflow { .. }
                | Error::AllReplicatesFailed(_)
        )
    }
}
