use std::fmt;

use gadm_core::baselines::BaselineError;
use gadm_core::batch_rl::BatchError;
use gadm_core::corpus_io::CorpusError;
use gadm_core::evolution::GaError;
use gadm_core::policy_dsl::DslError;
use gadm_core::simulator::SimError;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_DATA: i32 = 4;
pub const EXIT_NUMERIC: i32 = 5;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_DATA,
            message: message.into(),
        }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_PARSE,
            message: message.into(),
        }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_NUMERIC,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub type CliResult<T> = Result<T, CliError>;

impl From<DslError> for CliError {
    fn from(e: DslError) -> Self {
        match e {
            DslError::ArityMismatch { .. }
            | DslError::ParameterOutOfRange { .. }
            | DslError::UnknownTag(_)
            | DslError::TerminalAblation => CliError::config(e.to_string()),
            DslError::MissingStateVariable(_) => CliError::data(e.to_string()),
            _ => CliError::parse(e.to_string()),
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        let code = match e {
            CorpusError::Parse { .. } => EXIT_PARSE,
            CorpusError::NonFinite(_) => EXIT_NUMERIC,
            CorpusError::InvalidPlan(_) => EXIT_CONFIG,
            _ => EXIT_DATA,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<BatchError> for CliError {
    fn from(e: BatchError) -> Self {
        let code = match e {
            BatchError::InvalidConfig(_) | BatchError::StructuralParamForbidden => EXIT_CONFIG,
            BatchError::NonFinite(_) => EXIT_NUMERIC,
            BatchError::Dsl(d) => return d.into(),
            _ => EXIT_DATA,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<GaError> for CliError {
    fn from(e: GaError) -> Self {
        let code = match e {
            GaError::FitnessEvaluationFailure { .. } => EXIT_NUMERIC,
            _ => EXIT_CONFIG,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        let code = match e {
            SimError::Config(_) => EXIT_CONFIG,
            SimError::Ontology(_) => EXIT_PARSE,
            SimError::Policy { .. } => EXIT_DATA,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<BaselineError> for CliError {
    fn from(e: BaselineError) -> Self {
        let code = match e {
            BaselineError::InvalidConfig(_) => EXIT_CONFIG,
            BaselineError::DivergenceDetected { .. } => EXIT_NUMERIC,
            _ => EXIT_DATA,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}
