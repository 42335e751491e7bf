use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Model(#[from] polariton::Error),

    #[error("numerical tolerance: {0}")]
    Tolerance(String),

    #[error("partial output: {0}")]
    Partial(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("image: {0}")]
    Image(#[from] image::ImageError),
}

impl CliError {
    /// 0 success, 1 configuration, 2 numerical tolerance, 3 partial output.
    pub fn exit_code(&self) -> i32 {
        use polariton::Error as E;
        match self {
            CliError::Config(_) => 1,
            CliError::Model(e) => match e {
                E::Tolerance { .. } | E::NoConvergence { .. } => 2,
                E::Io(_) | E::Checkpoint(_) => 3,
                _ => 1,
            },
            CliError::Tolerance(_) => 2,
            CliError::Partial(_) | CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) | CliError::Image(_) => 3,
        }
    }
}
