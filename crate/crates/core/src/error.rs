use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is out of range or inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A genotype, tree or dataset does not fit the layout it is used with.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// An operation was called outside its precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid data: {0}")]
    Data(String),

    /// The optimizer state became numerically unusable.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad inputs rather than by a failing computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Shape(_)
                | Error::Precondition(_)
                | Error::Data(_)
                | Error::Csv(_)
                | Error::Json(_)
        )
    }
}
