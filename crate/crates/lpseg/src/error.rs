use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] lpseg_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: cannot decode image: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{path}: {msg}")]
    Parse { path: PathBuf, msg: String },

    #[error("{0}")]
    Invalid(String),
}

/// Coarse failure classes, used for CLI exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Io,
    Decode,
    Dimension,
    Params,
    Other,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Other => 1,
            ErrorKind::Io => 3,
            ErrorKind::Decode => 4,
            ErrorKind::Dimension => 5,
            ErrorKind::Params => 6,
        }
    }
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        use lpseg_core::Error as C;
        match self {
            Error::Io { .. } => ErrorKind::Io,
            Error::Image { .. } | Error::Parse { .. } => ErrorKind::Decode,
            Error::Invalid(_) => ErrorKind::Params,
            Error::Core(e) => match e {
                C::TrimapValue { .. } | C::ChannelOutOfRange { .. } => ErrorKind::Decode,
                C::SizeMismatch { .. }
                | C::EmptyImage { .. }
                | C::DimensionMismatch { .. }
                | C::QueryDimension { .. }
                | C::NodeCountMismatch { .. } => ErrorKind::Dimension,
                C::LambdaLength { .. }
                | C::LambdaValue { .. }
                | C::ZeroK
                | C::KTooLarge { .. }
                | C::TooFewClasses(_)
                | C::ClassOutOfRange { .. }
                | C::TooFewSeededClasses(_)
                | C::StrokeOutOfBounds { .. }
                | C::Config(_) => ErrorKind::Params,
                C::EmptyEvaluation => ErrorKind::Other,
            },
        }
    }
}
