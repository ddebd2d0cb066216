use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: `{field}` {reason}")]
    Validation { field: String, reason: String },

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: kdiff::Error,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn missing(field: &str) -> Self {
        Self::validation(field, "is required")
    }

    pub fn missing_for(field: &str, what: &str) -> Self {
        Self::validation(field, format!("is required for {what}"))
    }

    pub fn stage(stage: &'static str) -> impl FnOnce(kdiff::Error) -> CliError {
        move |source| CliError::Stage { stage, source }
    }

    /// 1 for bad input or configuration, 2 for failures while computing.
    pub fn exit_code(&self) -> i32 {
        use kdiff::Error as E;
        match self {
            CliError::Validation { .. } => 1,
            CliError::Stage { source, .. } => match source {
                E::Io { .. }
                | E::Csv(_)
                | E::Json(_)
                | E::EmptyDataset
                | E::NonNumeric { .. }
                | E::RaggedRow { .. }
                | E::LabelColumnMissing(_)
                | E::InvalidParameter { .. }
                | E::IndexOutOfRange { .. }
                | E::SizeMismatch { .. } => 1,
                _ => 2,
            },
            CliError::Io(_) => 2,
        }
    }
}
