use std::path::PathBuf;

/// Failure classes of the harness, each with its own exit status.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("route failure: {0}")]
    Route(String),
    #[error("refusing to run: {0}")]
    Resource(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl LabError {
    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Config(_) => 1,
            LabError::Route(_) | LabError::Io { .. } => 2,
            LabError::Resource(_) => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> LabError {
        let path = path.into();
        move |source| LabError::Io { path, source }
    }
}

impl From<cusp_spectra::Error> for LabError {
    fn from(e: cusp_spectra::Error) -> Self {
        use cusp_spectra::Error as E;
        match e {
            E::InvalidParameter(_) | E::Parse { .. } | E::Io(_) => LabError::Config(e.to_string()),
            _ => LabError::Route(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
