use std::path::PathBuf;

use crate::model::{Level, NodeKey};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("fixation {observer_id}/{seq_index} on image {image_id} at ({x}, {y}) is outside the {width}x{height} scene")]
    OutOfBounds {
        image_id: String,
        observer_id: String,
        seq_index: u32,
        x: f64,
        y: f64,
        width: u32,
        height: u32,
    },

    #[error("observer {observer_id} on image {image_id} has no retained fixations")]
    EmptyScanpath {
        image_id: String,
        observer_id: String,
    },

    #[error("object {object_id} is not annotated in scene {image_id}")]
    UnknownObject { image_id: String, object_id: u32 },

    #[error("node {node} is not in the attention graph for image {image_id}")]
    UnknownNode { image_id: String, node: NodeKey },

    #[error("scanpath {observer_id} on image {image_id} has {terms} term(s); at least 2 are needed to score")]
    DegenerateScanpath {
        image_id: String,
        observer_id: String,
        terms: usize,
    },

    #[error("level mismatch: expected {expected}, found {found}")]
    LevelMismatch { expected: Level, found: Level },

    #[error("group {group} has no usable subjects")]
    EmptyGroup { group: String },

    #[error("subject {subject} has no image that can be scored against both groups")]
    Unclassifiable { subject: String },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("scene {image_id} failed validation: {}", violations.join("; "))]
    InvalidScene {
        image_id: String,
        violations: Vec<String>,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
