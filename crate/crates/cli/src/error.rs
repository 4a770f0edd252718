use std::fmt;

use selfdecl::ErrorKind;
use serde::Serialize;

/// Exit status classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Failure {
    Usage,
    Data,
    Numeric,
}

impl Failure {
    pub fn exit_code(self) -> u8 {
        match self {
            Failure::Usage => 1,
            Failure::Data => 2,
            Failure::Numeric => 3,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Failure,
    pub message: String,
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            kind: Failure::Usage,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self {
            kind: Failure::Data,
            message: message.into(),
        }
    }

    /// One-line JSON for `--error-json`.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": { "kind": self.kind, "code": self.kind.exit_code(), "message": self.message }
        })
        .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<selfdecl::Error> for CliError {
    fn from(e: selfdecl::Error) -> Self {
        let kind = match e.kind() {
            ErrorKind::Usage => Failure::Usage,
            ErrorKind::Numeric => Failure::Numeric,
            ErrorKind::Data => Failure::Data,
        };
        Self {
            kind,
            message: e.to_string(),
        }
    }
}
