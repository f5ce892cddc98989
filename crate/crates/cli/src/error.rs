use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("config parse error at line {line}, column {column} (field `{field}`): {message}")]
    Parse {
        line: usize,
        column: usize,
        field: String,
        message: String,
    },

    #[error("scenario `{scenario}`: {message}")]
    Invalid { scenario: String, message: String },

    #[error("scenario `{scenario}`: {source}")]
    Engine {
        scenario: String,
        #[source]
        source: eqo_core::Error,
    },

    #[error("unknown preset or missing config file `{0}`")]
    UnknownTarget(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
