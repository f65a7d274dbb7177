use algoprob::codec::CodecError;
use algoprob::ctm::CtmError;
use algoprob::dist::DistError;
use algoprob::eca::EcaError;
use algoprob::halting::HaltingError;
use algoprob::machine::MachineError;
use algoprob::market::MarketError;
use thiserror::Error;

/// A failed command, carrying its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("refused: {0}")]
    Budget(String),
    #[error("data error: {0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Data(_) => 4,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

impl From<HaltingError> for CliError {
    fn from(e: HaltingError) -> Self {
        match e {
            HaltingError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            HaltingError::Config(_) => CliError::Data(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<CtmError> for CliError {
    fn from(e: CtmError) -> Self {
        match e {
            CtmError::Halting(h) => h.into(),
            CtmError::Dist(d) => d.into(),
            CtmError::SampleTooSmall(_) => CliError::Validation(e.to_string()),
            CtmError::NotInSupport { .. } => CliError::Data(e.to_string()),
        }
    }
}

impl From<DistError> for CliError {
    fn from(e: DistError) -> Self {
        match e {
            DistError::BadTupleLength(_) | DistError::NotBits(_) => CliError::Validation(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<EcaError> for CliError {
    fn from(e: EcaError) -> Self {
        match e {
            EcaError::Dist(d) => d.into(),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<MarketError> for CliError {
    fn from(e: MarketError) -> Self {
        match e {
            MarketError::Dist(d) => d.into(),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<MachineError> for CliError {
    fn from(e: MachineError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<CodecError> for CliError {
    fn from(e: CodecError) -> Self {
        match e {
            CodecError::Empty | CodecError::NotBits(_) => CliError::Validation(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}
