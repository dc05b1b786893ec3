use std::path::{Path, PathBuf};

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    /// Configuration, usage or I/O error.
    Usage = 1,
    NotConverged = 2,
    DiagnosticsFailed = 3,
}

impl Exit {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A stored artifact that does not parse.
    #[error("{}: {reason}", path.display())]
    Format { path: PathBuf, reason: String },

    #[error(transparent)]
    Solver(#[from] frontwave_core::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn format(path: &Path, reason: impl Into<String>) -> Self {
        Self::Format {
            path: path.to_path_buf(),
            reason: reason.into(),
        }
    }

    pub fn exit(&self) -> Exit {
        use frontwave_core::Error as E;
        match self {
            Self::Config(_) | Self::Io { .. } | Self::Format { .. } => Exit::Usage,
            Self::Solver(E::Config { .. } | E::Domain(_) | E::SizeMismatch { .. }) => Exit::Usage,
            Self::Solver(_) => Exit::NotConverged,
        }
    }
}
