use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {0} is outside the supported range 1..=32")]
    UnsupportedDimension(usize),

    #[error("invalid profile string {0:?}")]
    InvalidProfile(String),

    #[error("duplicate profile {0} in hypothesis list")]
    DuplicateProfile(String),

    #[error("hypothesis DAG has no polyforest; derive one before testing")]
    MissingPolyforest,

    #[error("no p-value for node {0}")]
    MissingPValue(String),

    #[error("parameter {name} = {value} is out of range ({expected})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("model is not monotone: eta({lower}) = {lower_value} > eta({upper}) = {upper_value}")]
    NonMonotoneModel {
        lower: String,
        upper: String,
        lower_value: f64,
        upper_value: f64,
    },

    #[error("data error: {0}")]
    Data(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_open_unit(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value < 1.0 {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            expected: "0 < x < 1",
        })
    }
}
