use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("world generation failed after {attempts} placement attempts")]
    WorldGeneration { attempts: usize },

    #[error("pose ({x:.3}, {y:.3}) is inside a solid or outside the room")]
    PoseInSolid { x: f64, y: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("bad magic: expected {expected:?}")]
    BadMagic { expected: &'static str },

    #[error("unsupported format version {found} (expected {expected})")]
    BadVersion { found: u32, expected: u32 },

    #[error("truncated input: {0}")]
    Truncated(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error("architecture mismatch: {0}")]
    ArchitectureMismatch(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line tool.
    ///
    /// 1 usage, 2 config, 3 io, 4 data format, 5 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::PoseInSolid { .. } => 1,
            Error::Config(_) | Error::WorldGeneration { .. } => 2,
            Error::Io { .. } => 3,
            Error::ShapeMismatch(_)
            | Error::BadMagic { .. }
            | Error::BadVersion { .. }
            | Error::Truncated(_)
            | Error::Format(_)
            | Error::ArchitectureMismatch(_)
            | Error::EmptyDataset => 4,
            Error::Numeric(_) => 5,
        }
    }
}
