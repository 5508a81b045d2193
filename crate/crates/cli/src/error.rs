use std::io;
use std::path::PathBuf;

use crate::config::ConfigError;

/// Failure of a CLI run. Each variant has its own exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("output directory {0} already exists (use --force to replace it)")]
    OutputExists(PathBuf),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
    #[error("{0}")]
    Budget(String),
    #[error("solver failure: {0}")]
    Solver(netctl_core::Error),
    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn io(context: impl Into<String>, source: io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 3,
            CliError::OutputExists(_) => 4,
            CliError::Io { .. } => 5,
            CliError::Budget(_) => 6,
            CliError::Solver(_) => 7,
            CliError::CheckFailed(_) => 8,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::OutputExists(_) => "output_exists",
            CliError::Io { .. } => "io",
            CliError::Budget(_) => "infeasible_budget",
            CliError::Solver(_) => "solver",
            CliError::CheckFailed(_) => "check_failed",
        }
    }

    /// One-line JSON error record.
    pub fn record(&self) -> String {
        let mut rec = serde_json::json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        if let CliError::Config(ConfigError { line: Some(line), .. }) = self {
            rec["line"] = serde_json::json!(line);
        }
        if let CliError::Solver(netctl_core::Error::Stage { stage, .. }) = self {
            rec["stage"] = serde_json::json!(stage);
        }
        rec.to_string()
    }
}

impl From<netctl_core::Error> for CliError {
    fn from(e: netctl_core::Error) -> Self {
        use netctl_core::Error as E;
        match (&e, e.root()) {
            (_, E::InfeasibleBudget(_) | E::CombinatorialCap { .. }) => CliError::Budget(e.to_string()),
            (E::InvalidInput(msg), _) => CliError::Config(ConfigError {
                line: None,
                message: msg.clone(),
            }),
            _ => CliError::Solver(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_are_distinct() {
        let errors = [
            CliError::Config(ConfigError {
                line: Some(4),
                message: "bad".into(),
            }),
            CliError::OutputExists("x".into()),
            CliError::io("write", io::Error::other("disk")),
            CliError::Budget("b".into()),
            CliError::Solver(netctl_core::Error::GraphGeneration { attempts: 3 }),
            CliError::CheckFailed("c".into()),
        ];
        let mut codes: Vec<i32> = errors.iter().map(CliError::exit_code).collect();
        codes.sort();
        codes.dedup();
        assert_eq!(codes.len(), errors.len());
        assert!(!codes.contains(&0) && !codes.contains(&2));
        let rec: serde_json::Value = serde_json::from_str(&errors[0].record()).unwrap();
        assert_eq!(rec["line"], 4);
        assert_eq!(rec["error"], "config");
    }

    #[test]
    fn core_errors_are_classified() {
        let e: CliError = netctl_core::Error::InfeasibleBudget("too many".into()).into();
        assert_eq!(e.kind(), "infeasible_budget");
        let e: CliError = netctl_core::Error::CombinatorialCap { count: 10, cap: 5 }.into();
        assert_eq!(e.kind(), "infeasible_budget");
    }
}
