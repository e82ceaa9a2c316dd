use std::path::PathBuf;

use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{path}: {message}")]
    Schema { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] hypergraphon::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use hypergraphon::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io { .. } | CliError::Json { .. } => 1,
            CliError::Schema { .. } => 4,
            CliError::Core(e) => match e {
                E::Infeasible { .. } | E::InfeasibleUpToMax(_) => 2,
                E::NonConvergent(_) => 3,
                E::Json(_) => 1,
                _ => 4,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        use hypergraphon::Error as E;
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Json { .. } => "json",
            CliError::Schema { .. } => "schema",
            CliError::Core(e) => match e {
                E::Infeasible { .. } | E::InfeasibleUpToMax(_) => "infeasible",
                E::NonConvergent(_) => "non_convergent",
                E::SyntaxError { .. } => "syntax_error",
                E::Json(_) => "json",
                _ => "validation",
            },
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut err = json!({
            "kind": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        if let CliError::Core(hypergraphon::Error::SyntaxError { position, .. }) = self {
            err["position"] = json!(position);
        }
        json!({ "error": err })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hypergraphon::Error as E;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
        assert_eq!(CliError::Core(E::Infeasible { best_residual: 0.1 }).exit_code(), 2);
        assert_eq!(CliError::Core(E::NonConvergent("x".into())).exit_code(), 3);
        assert_eq!(CliError::Core(E::EmptySolutionSet).exit_code(), 4);
    }

    #[test]
    fn syntax_errors_carry_position() {
        let e = CliError::Core(E::SyntaxError {
            position: 3,
            message: "x".into(),
        });
        let v = e.to_json();
        assert_eq!(v["error"]["kind"], "syntax_error");
        assert_eq!(v["error"]["position"], 3);
        assert_eq!(v["error"]["exit_code"], 4);
    }
}
