use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image decode error on {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("bad container magic {0:?}, expected \"GSDT\"")]
    BadMagic([u8; 4]),

    #[error("unsupported container version {0}")]
    UnsupportedVersion(u16),

    #[error("unsupported dtype code {0}")]
    UnsupportedDtype(u8),

    #[error("truncated container: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("trailing bytes after container payload: {0}")]
    TrailingBytes(usize),

    #[error("raster has {0} channels, expected a single-channel label image")]
    MultiChannel(u8),

    #[error("label {label} at pixel ({x}, {y}) is not below num_classes {num_classes}")]
    LabelOutOfRange {
        label: u32,
        x: usize,
        y: usize,
        num_classes: usize,
    },

    #[error("negative label {0}")]
    NegativeLabel(i64),

    #[error("non-finite value at element {0}")]
    NonFinite(usize),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("dtype mismatch: {0}")]
    Dtype(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("instance id 0 is reserved for background")]
    ReservedInstance,

    #[error("instance id {0} does not occur in the map")]
    MissingInstance(u32),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("need at least 2 samples to fit a gaussian, got {0}")]
    NotEnoughSamples(usize),

    #[error("covariance is indefinite: eigenvalue {0:e} below tolerance")]
    IndefiniteCovariance(f64),

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the environment rather than of the inputs.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
