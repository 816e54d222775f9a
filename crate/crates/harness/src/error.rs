use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] gfmate_core::Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("stale checkpoint cache at {path}: {reason}")]
    StaleCache { path: PathBuf, reason: String },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<HarnessError>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

/// Process exit codes of the CLI.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const DATA: i32 = 3;
    pub const NUMERIC: i32 = 4;
}

impl HarnessError {
    pub fn context(self, context: impl Into<String>) -> Self {
        HarnessError::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub fn exit_code(&self) -> i32 {
        use gfmate_core::Error as E;
        match self {
            HarnessError::Context { source, .. } => source.exit_code(),
            HarnessError::Config(_) => exit::CONFIG,
            HarnessError::Core(e) => match e {
                E::Config(_) | E::InvalidTemperature(_) | E::InvalidRank(_) | E::InvalidGrouping(_) => exit::CONFIG,
                E::NonFinite(_) => exit::NUMERIC,
                _ => exit::DATA,
            },
            HarnessError::StaleCache { .. } | HarnessError::Io(_) | HarnessError::Json(_) => exit::DATA,
        }
    }
}

pub(crate) trait ResultExt<T> {
    fn context(self, context: impl FnOnce() -> String) -> Result<T>;
}

impl<T, E: Into<HarnessError>> ResultExt<T> for std::result::Result<T, E> {
    fn context(self, context: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|e| e.into().context(context()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_error_class() {
        let nan: HarnessError = gfmate_core::Error::NonFinite("x".into()).into();
        assert_eq!(nan.exit_code(), exit::NUMERIC);
        assert_eq!(nan.context("seed 3").exit_code(), exit::NUMERIC);
        let bad: HarnessError = gfmate_core::Error::InvalidTemperature(0.0).into();
        assert_eq!(bad.exit_code(), exit::CONFIG);
        let parse: HarnessError = gfmate_core::Error::Parse {
            path: "e.txt".into(),
            line: 2,
            msg: "x".into(),
        }
        .into();
        assert_eq!(parse.exit_code(), exit::DATA);
        assert_eq!(HarnessError::Config("x".into()).exit_code(), exit::CONFIG);
    }
}
