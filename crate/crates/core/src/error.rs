use std::path::PathBuf;

use thiserror::Error;

use crate::ids::{EntityId, LabelId, TupleId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid label {0:?}: labels must be non-empty strings")]
    InvalidLabel(String),

    #[error("unknown label id {0}")]
    UnknownLabelId(LabelId),

    #[error(
        "label {value} is already grouped under key {existing}, cannot regroup under {requested}"
    )]
    AlreadyGrouped {
        value: LabelId,
        existing: LabelId,
        requested: LabelId,
    },

    #[error("invalid label set: {0}")]
    InvalidLabelSet(String),

    #[error("unknown tuple {0}")]
    UnknownTuple(TupleId),

    #[error("refcount underflow on tuple {0}")]
    RefcountUnderflow(TupleId),

    #[error("unknown entity {0}")]
    UnknownEntity(EntityId),

    #[error("unknown node key {0:?}")]
    UnknownNodeKey(String),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("capacity exceeded: {0}")]
    CapacityExceeded(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("parse error in {path} at line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("cannot cluster an empty graph")]
    EmptyGraph,

    #[error("not a snapshot (bad magic)")]
    NotASnapshot,

    #[error("unsupported snapshot version {0}")]
    UnsupportedVersion(u16),

    #[error("corrupt snapshot in section {section}: {message}")]
    CorruptSnapshot { section: u16, message: String },

    #[error("invalid synthetic spec: {0}")]
    Spec(String),

    #[error("correctness failure: {0}")]
    CorrectnessFailure(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable kind, used by the CLI error envelope.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidLabel(_) => "InvalidLabel",
            Error::UnknownLabelId(_) => "UnknownLabelId",
            Error::AlreadyGrouped { .. } => "AlreadyGrouped",
            Error::InvalidLabelSet(_) => "InvalidLabelSet",
            Error::UnknownTuple(_) => "UnknownTuple",
            Error::RefcountUnderflow(_) => "RefcountUnderflow",
            Error::UnknownEntity(_) => "UnknownEntity",
            Error::UnknownNodeKey(_) => "UnknownNodeKey",
            Error::InvalidQuery(_) => "InvalidQuery",
            Error::CapacityExceeded(_) => "CapacityExceeded",
            Error::Io { .. } => "IoError",
            Error::Manifest(_) => "ManifestError",
            Error::Parse { .. } => "ParseError",
            Error::EmptyGraph => "EmptyGraph",
            Error::NotASnapshot => "NotASnapshot",
            Error::UnsupportedVersion(_) => "UnsupportedVersion",
            Error::CorruptSnapshot { .. } => "CorruptSnapshot",
            Error::Spec(_) => "SpecError",
            Error::CorrectnessFailure(_) => "CorrectnessFailure",
            Error::Json(_) => "JsonError",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
