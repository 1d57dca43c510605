//! CLI error classification and exit codes.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error (missing or
//! malformed inputs), 4 numerical failure (model-level).

use railsense_core::fiber::FiberError;
use railsense_core::materials::MaterialError;
use railsense_core::reconstruct::ReconstructError;
use railsense_core::scan::ScanError;
use railsense_core::shape::ShapeError;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Data(msg) => write!(f, "data error: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<railsense_core::csvio::CsvError> for CliError {
    fn from(e: railsense_core::csvio::CsvError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<FiberError> for CliError {
    fn from(e: FiberError) -> Self {
        match e {
            FiberError::FieldLengthMismatch { .. } => CliError::Data(e.to_string()),
            FiberError::InvalidSpec(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<ReconstructError> for CliError {
    fn from(e: ReconstructError) -> Self {
        match e {
            ReconstructError::RankDeficientAngles
            | ReconstructError::AllFramesRejected(_)
            | ReconstructError::StrainOutOfRange { .. } => CliError::Numerical(e.to_string()),
            ReconstructError::InsufficientCores { .. }
            | ReconstructError::InvalidCoreSubset(_)
            | ReconstructError::InvalidGratingSubset { .. }
            | ReconstructError::EmptyGratingSubset => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<ShapeError> for CliError {
    fn from(e: ShapeError) -> Self {
        match e {
            ShapeError::PlanarityViolation { .. } | ShapeError::UndefinedDirection { .. } => {
                CliError::Numerical(e.to_string())
            }
            ShapeError::NonPositiveSegment(_) | ShapeError::NonPositiveSpacing(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<MaterialError> for CliError {
    fn from(e: MaterialError) -> Self {
        match e {
            MaterialError::UnknownMaterial(_) | MaterialError::UnsupportedDegree(_) => {
                CliError::Config(e.to_string())
            }
            MaterialError::TooFewSamplesInWindow { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<ScanError> for CliError {
    fn from(e: ScanError) -> Self {
        match e {
            ScanError::InvalidScenario(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<railsense_core::phantoms::PhantomError> for CliError {
    fn from(e: railsense_core::phantoms::PhantomError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<railsense_core::analysis::AnalysisError> for CliError {
    fn from(e: railsense_core::analysis::AnalysisError) -> Self {
        CliError::Data(e.to_string())
    }
}
