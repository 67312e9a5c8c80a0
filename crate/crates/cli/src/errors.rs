//! Failure categories, one per nonzero exit code.

use std::fmt;
use tghyper::models::CheckpointError;
use tghyper::treebank::TreebankError;

/// Everything a subcommand can fail with.  The categories — and the exit
/// codes they map to — are a stable contract:
///
/// * exit 1: a requested check did not hold (`Check`)
/// * exit 2: bad flags or configuration (`Usage`)
/// * exit 3: malformed data or checkpoint (`Data`)
#[derive(Debug)]
pub enum CliError {
    Check(String),
    Usage(String),
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Check(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Check(m) | CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

impl From<TreebankError> for CliError {
    fn from(e: TreebankError) -> CliError {
        CliError::Data(e.to_string())
    }
}

impl From<CheckpointError> for CliError {
    fn from(e: CheckpointError) -> CliError {
        CliError::Data(e.to_string())
    }
}

/// Writes a file, folding I/O problems into the data category.
pub fn write_text(path: &std::path::Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}
