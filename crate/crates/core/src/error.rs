use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("label line {line}, field {field}: {message}")]
    LabelParse {
        line: usize,
        field: usize,
        message: String,
    },

    #[error("label line {line}: unknown class name {name:?}")]
    UnknownClass { line: usize, name: String },

    #[error("missing key {0}")]
    CalibMissingKey(String),

    #[error("calibration key {key}: expected {expected} values, found {found}")]
    CalibShape {
        key: String,
        expected: usize,
        found: usize,
    },

    #[error("calibration: {0}")]
    CalibInvalid(String),

    #[error("point cloud byte length {0} is not a multiple of 16")]
    PointCloudLength(usize),

    #[error("{kind}/{file} not found (frame {id})")]
    MissingArtifact {
        id: String,
        kind: &'static str,
        file: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("singular transform: {0}")]
    SingularTransform(&'static str),

    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("manifest: {0}")]
    Manifest(String),

    #[error("detector failed on frame {frame_id}: {message}")]
    Detector { frame_id: String, message: String },

    #[error("cannot train from scratch on an empty labeled set")]
    EmptyTrainingSet,

    #[error("no evaluated class has a defined AP")]
    NoDefinedAp,

    #[error("no inconsistency record for pool frame {0}")]
    MissingRecord(String),

    #[error("unknown frame id {0}")]
    UnknownFrame(String),

    #[error("detector state blob: {0}")]
    StateFormat(String),

    #[error("cycle {cycle}: {source}")]
    Cycle {
        cycle: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input data or configuration, as opposed
    /// to failures inside the engine itself.
    pub fn is_data_error(&self) -> bool {
        match self {
            Error::Detector { .. } | Error::NoDefinedAp => false,
            Error::Cycle { source, .. } => source.is_data_error(),
            _ => true,
        }
    }
}
