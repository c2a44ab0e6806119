use serde::Serialize;
use statcp::ModelError;
use thiserror::Error;

/// Exit code for malformed input, unknown names and invalid parameters.
pub const INPUT_ERROR: i32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed JSON in `{path}`: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("malformed region CSV: {0}")]
    Csv(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Input(_) => "input",
            CliError::Model(_) => "model",
            CliError::Io { .. } => "io",
            CliError::Json { .. } => "json",
            CliError::Csv(_) => "csv",
        }
    }

    /// The error as the JSON object written to stderr.
    pub fn to_json(&self) -> String {
        error_json(self.kind(), &self.to_string())
    }
}

/// Result of a solve, as reported to the caller.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Feasible,
    Infeasible,
    ResourceLimit,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Feasible => 0,
            Status::Infeasible => 2,
            Status::ResourceLimit => 3,
        }
    }

    /// Combines the statuses of two searches over the same model.
    pub fn worst(self, other: Status) -> Status {
        use Status::*;
        match (self, other) {
            (Infeasible, _) | (_, Infeasible) => Infeasible,
            (ResourceLimit, _) | (_, ResourceLimit) => ResourceLimit,
            _ => Feasible,
        }
    }
}

pub fn error_json(kind: &str, message: &str) -> String {
    serde_json::json!({ "error": kind, "message": message }).to_string()
}
