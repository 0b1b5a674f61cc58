use std::path::PathBuf;

/// Errors raised while reading datasets or writing reports.
#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: cannot decode image: {reason}", path.display())]
    Decode { path: PathBuf, reason: String },
    #[error("{}: {source}", path.display())]
    Mask {
        path: PathBuf,
        #[source]
        source: hiou_core::Error,
    },
    #[error("sample {id}: {source}")]
    Sample {
        id: String,
        #[source]
        source: hiou_core::Error,
    },
    #[error(transparent)]
    Core(#[from] hiou_core::Error),
    #[error("unpaired files: predictions without GT {pred_only:?}, GT without prediction {gt_only:?}")]
    Orphans {
        pred_only: Vec<String>,
        gt_only: Vec<String>,
    },
    #[error("{}: duplicate stem {stem:?}", dir.display())]
    DuplicateStem { dir: PathBuf, stem: String },
    #[error("no paired samples found")]
    NoPairs,
    #[error("missing intensity images for {0:?}")]
    MissingImages(Vec<String>),
    #[error("malformed {what}: {reason}")]
    Malformed { what: &'static str, reason: String },
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl EvalError {
    /// Process exit code: 1 for configuration errors, 2 for data errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            EvalError::Config(_) => 1,
            EvalError::Core(hiou_core::Error::InvalidConfig(_)) => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> EvalError {
        let path = path.into();
        move |source| EvalError::Io { path, source }
    }
}

pub type Result<T, E = EvalError> = std::result::Result<T, E>;
