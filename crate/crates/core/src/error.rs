use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A distribution or spec parameter outside its admissible domain.
    #[error("parameter domain: {0}")]
    Domain(String),

    /// Moments that no Beta distribution can reproduce.
    #[error("infeasible moments: mean {mean}, variance {variance} (need variance < mean*(1-mean))")]
    InfeasibleMoments { mean: f64, variance: f64 },

    #[error("hour {hour}: {source}")]
    HourlyFit {
        hour: usize,
        #[source]
        source: Box<Error>,
    },

    /// An error raised while fitting or evaluating one named pipeline stage.
    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("too few tail exceedances above {threshold}: {count} < {required}")]
    TailSparsity {
        threshold: f64,
        count: usize,
        required: usize,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("degenerate region: total anomalous mass {0:e}")]
    DegenerateRegion(f64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("covariance is not positive semidefinite: {0}")]
    Conditioning(String),

    #[error("propagation failed at sigma point {index}: {reason}")]
    Propagation { index: usize, reason: String },

    #[error("configuration: {0}")]
    Config(String),

    #[error("validation: {0}")]
    Validation(String),

    #[error("data quality: {0}")]
    Quality(String),

    #[error("format: {0}")]
    Format(String),

    #[error("missing dependency artifact: {0}")]
    MissingArtifact(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Process exit codes for the command-line front end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    Validation = 2,
    Fit = 3,
    Io = 4,
}

impl Error {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub fn in_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            Error::HourlyFit { source, .. } | Error::Stage { source, .. } => source.exit_code(),
            Error::InfeasibleMoments { .. }
            | Error::TailSparsity { .. }
            | Error::InsufficientData(_)
            | Error::Estimation(_)
            | Error::DegenerateRegion(_)
            | Error::Conditioning(_)
            | Error::Propagation { .. } => ExitCode::Fit,
            Error::Io { .. } | Error::MissingArtifact(_) => ExitCode::Io,
            Error::Domain(_)
            | Error::Dimension(_)
            | Error::Config(_)
            | Error::Validation(_)
            | Error::Quality(_)
            | Error::Format(_)
            | Error::Json(_)
            | Error::Csv(_) => ExitCode::Validation,
        }
    }
}
