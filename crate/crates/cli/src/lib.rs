//! Library side of the scenario runner; the binary in `main.rs` is a thin
//! dispatcher so integration tests can drive the pipelines directly.

pub mod config;
pub mod output;
pub mod runner;

use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Configuration problems; carries one message per offending field.
    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Config(Vec<String>),
    #[error("{0}")]
    Io(String),
    /// A numerical contract broke inside the named module and operation.
    #[error("{module}.{op}: {message}")]
    Contract {
        module: &'static str,
        op: &'static str,
        message: String,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 1,
            CliError::Contract { .. } => 3,
        }
    }

    /// Machine-readable error report printed to stderr on failure.
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            CliError::Config(fields) => json!({"error": "config", "problems": fields}),
            CliError::Io(message) => json!({"error": "io", "message": message}),
            CliError::Contract {
                module,
                op,
                message,
            } => json!({"error": "contract", "module": module, "op": op, "message": message}),
        }
    }
}
