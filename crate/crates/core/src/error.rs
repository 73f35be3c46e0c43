use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{0}: no trajectories found")]
    EmptyInput(PathBuf),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("trajectory {0} has zero length (all points identical)")]
    ZeroLength(String),

    #[error("point ({x:.3}, {y:.3}) lies outside the grid")]
    OutsideGrid { x: f64, y: f64 },

    #[error("lane {0} leaves the scene grid")]
    LaneOutsideGrid(String),

    #[error("training data contains a single class; need at least two")]
    SingleClass,

    #[error("skeleton sequence {id}: root joint {root} missing (sequence has {joints} joints)")]
    MissingRootJoint { id: String, root: usize, joints: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("bad field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
