use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("nodes {0} and {1} share a position")]
    ZeroDistance(usize, usize),
    #[error("need at least {required} trials, got {got}")]
    InsufficientTrials { required: usize, got: usize },
    #[error("pathloss exponent {0} must exceed 2")]
    FreeSpaceDivergence(f64),
    #[error("no calibration band covers {0} km")]
    MissingCalibration(f64),
    #[error("region radius {radius_km} km is below 10x link distance {distance_km} km")]
    InvalidRegion { radius_km: f64, distance_km: f64 },
    #[error("calibration band {band_km} km has only {cells} usable cells")]
    DegenerateFit { band_km: f64, cells: usize },
    #[error("node {node} needs jamming {required:e} W/Hz but only {budget:e} W/Hz is available")]
    InfeasibleLink { node: usize, required: f64, budget: f64 },
    #[error("edge {0}->{1} carries traffic with zero spectral efficiency")]
    ZeroRate(usize, usize),
    #[error("user {0} is unreachable from the root")]
    Unreachable(usize),
    #[error("exhaustive search exceeds {limit} states; use sampled mode")]
    CombinatorialBlowup { limit: u64 },
    #[error("relay subset disconnects user {0}")]
    NoFeasibleTree(usize),
    #[error("parse error: {}", .0.join("; "))]
    ParseError(Vec<String>),
    #[error("dataset has no valid rows")]
    EmptyDataset,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ZeroDistance(..) => "ZeroDistance",
            Error::InsufficientTrials { .. } => "InsufficientTrials",
            Error::FreeSpaceDivergence(_) => "FreeSpaceDivergence",
            Error::MissingCalibration(_) => "MissingCalibration",
            Error::InvalidRegion { .. } => "InvalidRegion",
            Error::DegenerateFit { .. } => "DegenerateFit",
            Error::InfeasibleLink { .. } => "InfeasibleLink",
            Error::ZeroRate(..) => "ZeroRate",
            Error::Unreachable(_) => "Unreachable",
            Error::CombinatorialBlowup { .. } => "CombinatorialBlowup",
            Error::NoFeasibleTree(_) => "NoFeasibleTree",
            Error::ParseError(_) => "ParseError",
            Error::EmptyDataset => "EmptyDataset",
            Error::InvalidInput(_) => "InvalidInput",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
