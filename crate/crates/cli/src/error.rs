use techlev::stats::StatsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("statistics error in {context}: {source}")]
    Stats {
        context: String,
        #[source]
        source: StatsError,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Stats { .. } => 4,
        }
    }

    pub fn stats(context: impl Into<String>, source: StatsError) -> Self {
        CliError::Stats { context: context.into(), source }
    }

    /// One-line JSON for statistics failures, `None` otherwise.
    pub fn machine_report(&self) -> Option<String> {
        let CliError::Stats { context, source } = self else {
            return None;
        };
        let mut obj = serde_json::json!({
            "error": source.code(),
            "context": context,
            "message": source.to_string(),
        });
        if let StatsError::ZeroCell { fisher_p } = source {
            obj["fisher_p"] = serde_json::json!(fisher_p);
        }
        if let StatsError::RankDeficient { columns } = source {
            obj["columns"] = serde_json::json!(columns);
        }
        Some(obj.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
