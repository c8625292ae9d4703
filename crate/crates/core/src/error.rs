use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A closed-form bound was evaluated outside the region where it is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("malformed weight matrix: {0}")]
    MalformedMatrix(String),

    #[error("empty data set")]
    EmptyData,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("data set of {samples} samples is too small for the requested split")]
    DatasetTooSmall { samples: usize },

    #[error("training diverged at epoch {epoch}")]
    Divergence { epoch: usize },

    #[error("shatter probe over {points} points exceeds the enumeration cap of {cap}")]
    EnumerationCap { points: usize, cap: usize },

    #[error("unknown data set `{0}` (expected glass, thyroid or wine)")]
    UnknownDataset(String),

    #[error("{source_name}:{line}:{column}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{source_name}:{line}: class label `{label}` is not covered by the positive rule")]
    UnmappedLabel {
        source_name: String,
        line: usize,
        label: String,
    },

    #[error("checksum mismatch for {}: expected {expected}, got {actual}", path.display())]
    ChecksumMismatch {
        path: PathBuf,
        expected: String,
        actual: String,
    },

    #[error("download failed: {0}")]
    Download(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config file: {0}")]
    ConfigFile(#[from] toml::de::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures that come from the environment (files, network)
    /// rather than from the arguments.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Parse { .. }
                | Error::UnmappedLabel { .. }
                | Error::ChecksumMismatch { .. }
                | Error::Download(_)
                | Error::ConfigFile(_)
        )
    }

    /// Process exit code: 1 for domain and usage errors, 2 for I/O errors.
    pub fn exit_code(&self) -> i32 {
        if self.is_io() {
            2
        } else {
            1
        }
    }
}
