use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dependency cycle through task `{task}`")]
    Cycle { task: String },

    #[error("task `{task}` depends on unknown task `{dep}`")]
    DanglingDep { task: String, dep: String },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("unknown task `{0}`")]
    UnknownTask(String),

    #[error("unknown group {0}")]
    UnknownGroup(usize),

    #[error("state error: {0}")]
    State(String),

    #[error("deadlock at t={time}: {completed}/{total} tasks completed and nothing is runnable")]
    Deadlock {
        time: f64,
        completed: usize,
        total: usize,
    },

    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParam(msg.into())
    }

    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}
