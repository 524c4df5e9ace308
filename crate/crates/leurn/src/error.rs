use std::path::PathBuf;

/// Errors surfaced by file handling and the command line.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{0}")]
    Bundle(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] leurn_core::Error),
}

impl CliError {
    /// Stable category name for machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Csv { .. } => "csv",
            CliError::Json { .. } => "parse",
            CliError::Bundle(_) => "bundle",
            CliError::Usage(_) => "usage",
            CliError::Core(e) => match e {
                leurn_core::Error::Shape(_) => "shape",
                leurn_core::Error::Config(_) => "config",
                leurn_core::Error::NonFinite(_) => "non_finite",
                leurn_core::Error::Target(_) => "target",
                leurn_core::Error::Empty(_) => "empty",
                leurn_core::Error::Diverged { .. } => "diverged",
                leurn_core::Error::Data(_) => "data",
                leurn_core::Error::Region(_) => "region",
            },
        }
    }

    /// Whether the error is a closed output pipe (e.g. output piped to `head`).
    pub fn is_broken_pipe(&self) -> bool {
        let io = match self {
            CliError::Io { source, .. } => Some(source),
            CliError::Csv { source, .. } => match source.kind() {
                csv::ErrorKind::Io(e) => Some(e),
                _ => None,
            },
            _ => None,
        };
        io.is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe)
    }

    /// `error[<kind>]: <message>` on a single line.
    pub fn one_line(&self) -> String {
        let msg = self.to_string().replace(['\n', '\r'], " ");
        format!("error[{}]: {}", self.kind(), msg)
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}
