use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("congruence system has no solution")]
    NoSolution,
    #[error("override for subset {subset:?} is not an lcrm of its moduli")]
    InvalidOverride { subset: Vec<usize> },
    #[error("reconstruction failed after exhausting all corrections")]
    ReconstructionFailed,
    #[error("reconstructed vectors do not regenerate the input residue sets")]
    InconsistentSystem,
    #[error("no difference remainder is common to every residue set")]
    NoCommonDifference,
    #[error("spectrum has no peak above the noise floor")]
    NoPeaks,
    #[error("detected residues do not form a valid residue system: {0}")]
    DetectionMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable variant name, used by the CLI when reporting domain errors.
    pub fn name(&self) -> &'static str {
        match self {
            Error::SingularMatrix => "SingularMatrix",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NotSquare { .. } => "NotSquare",
            Error::NoSolution => "NoSolution",
            Error::InvalidOverride { .. } => "InvalidOverride",
            Error::ReconstructionFailed => "ReconstructionFailed",
            Error::InconsistentSystem => "InconsistentSystem",
            Error::NoCommonDifference => "NoCommonDifference",
            Error::NoPeaks => "NoPeaks",
            Error::DetectionMismatch(_) => "DetectionMismatch",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}
