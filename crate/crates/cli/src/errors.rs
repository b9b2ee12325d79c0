//! Exit-code discipline: 0 success, 2 configuration, 3 ingestion,
//! 4 degeneracy, 1 anything else.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Ingest(String),
    Degenerate(String),
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Ingest(_) => 3,
            CliError::Degenerate(_) => 4,
            CliError::Other(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Ingest(m) => write!(f, "ingestion error: {m}"),
            CliError::Degenerate(m) => write!(f, "degeneracy: {m}"),
            CliError::Other(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<densjump::Error> for CliError {
    fn from(e: densjump::Error) -> Self {
        use densjump::Error as E;
        match &e {
            E::Domain(_) | E::InvalidMixture(_) => CliError::Config(e.to_string()),
            E::ExcessiveDegeneracy { .. } => CliError::Degenerate(e.to_string()),
            _ if e.is_degeneracy() => CliError::Degenerate(e.to_string()),
            _ => CliError::Other(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}
