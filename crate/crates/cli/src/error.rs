use mav_core::amm::AmmError;
use mav_core::analysis::StatsError;
use mav_core::fees::FeeError;
use mav_core::market_data::DataError;
use mav_core::misalignment::DetectError;
use thiserror::Error;

/// Failure classes, one per process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numeric error: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<AmmError> for CliError {
    fn from(e: AmmError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        match e {
            DataError::Amm(e) => e.into(),
            e => CliError::Data(e.to_string()),
        }
    }
}

impl From<DetectError> for CliError {
    fn from(e: DetectError) -> Self {
        match e {
            DetectError::Amm { .. } => CliError::Numeric(e.to_string()),
            e => CliError::Data(e.to_string()),
        }
    }
}

impl From<FeeError> for CliError {
    fn from(e: FeeError) -> Self {
        match e {
            FeeError::Amm(e) => e.into(),
            e => CliError::Data(e.to_string()),
        }
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::Numeric(_) | StatsError::RankDeficient(_) | StatsError::NonFinite(_) => {
                CliError::Numeric(e.to_string())
            }
            e => CliError::Data(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}
