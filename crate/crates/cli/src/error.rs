use cantor_waring::coverage::CoverageError;
use cantor_waring::dust::DustError;
use cantor_waring::numerics::NumericsError;
use cantor_waring::padic::PadicError;
use cantor_waring::powersum::PowerSumError;
use cantor_waring::{bounds::BoundsError, cantor::CantorError};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("budget or cap exceeded: {0}")]
    Budget(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Verification(_) => 2,
            CliError::Budget(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io(_) => "io",
            CliError::Verification(_) => "verification",
            CliError::Budget(_) => "budget",
        }
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Report<'a> {
            error: &'a str,
            message: String,
            exit_code: i32,
        }
        let r = Report { error: self.kind(), message: self.to_string(), exit_code: self.exit_code() };
        serde_json::to_string(&r).expect("plain struct serializes")
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

impl From<NumericsError> for CliError {
    fn from(e: NumericsError) -> Self {
        match e {
            NumericsError::Undecidable { .. } => CliError::Budget(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<CantorError> for CliError {
    fn from(e: CantorError) -> Self {
        match e {
            CantorError::DepthCap { .. } => CliError::Budget(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        match e {
            BoundsError::Numerics(n) => n.into(),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<PowerSumError> for CliError {
    fn from(e: PowerSumError) -> Self {
        match e {
            PowerSumError::Budget { .. } => CliError::Budget(e.to_string()),
            PowerSumError::Bounds(b) => b.into(),
            PowerSumError::Cantor(c) => c.into(),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<CoverageError> for CliError {
    fn from(e: CoverageError) -> Self {
        match e {
            CoverageError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            CoverageError::Cantor(c) => c.into(),
            CoverageError::Numerics(n) => n.into(),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<DustError> for CliError {
    fn from(e: DustError) -> Self {
        match e {
            DustError::Numerics(n) => n.into(),
            DustError::PowerSum(p) => p.into(),
            DustError::WindowNotFound(_) => CliError::Budget(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<PadicError> for CliError {
    fn from(e: PadicError) -> Self {
        match e {
            PadicError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}
