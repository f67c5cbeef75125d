use std::fmt;

/// Exit-code buckets: 2 config error, 3 data error, 4 internal error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Internal,
}

#[derive(Debug)]
pub struct CliError {
    pub stage: String,
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn config(stage: &str, msg: impl fmt::Display) -> Self {
        CliError {
            stage: stage.into(),
            kind: ErrorKind::Config,
            message: msg.to_string(),
        }
    }

    pub fn data(stage: &str, msg: impl fmt::Display) -> Self {
        CliError {
            stage: stage.into(),
            kind: ErrorKind::Data,
            message: msg.to_string(),
        }
    }

    pub fn internal(stage: &str, msg: impl fmt::Display) -> Self {
        CliError {
            stage: stage.into(),
            kind: ErrorKind::Internal,
            message: msg.to_string(),
        }
    }

    /// Classify a core error raised while processing input data.
    pub fn from_core(stage: &str, err: bioclust::Error) -> Self {
        use bioclust::Error as E;
        let kind = match &err {
            E::Parse { .. } | E::EmptyRecord(_) | E::Range(_) | E::DimensionMismatch { .. } => {
                ErrorKind::Data
            }
            E::InvalidArgument(_) => ErrorKind::Config,
            E::Io(_) => ErrorKind::Internal,
        };
        CliError {
            stage: stage.into(),
            kind,
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Internal => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error in stage `{}`: {}", self.stage, self.message)
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;
