use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("signature error: {0}")]
    Signature(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("geodesic escaped the patch: {0}")]
    Escape(String),
    #[error("step error: {0}")]
    Step(String),
    #[error("radius error: {0}")]
    Radius(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error("grid error: {0}")]
    Grid(String),
    #[error("quadrature near the origin did not converge: {0}")]
    Singularity(String),
    #[error("branch error: {0}")]
    Branch(String),
    #[error("pole error: {0}")]
    Pole(String),
    #[error("convergence error: {0}")]
    Convergence(String),
    #[error("tail error: {0}")]
    Tail(String),
    #[error("tolerance error: {0}")]
    Tolerance(String),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("memory error: {0}")]
    Memory(String),
    #[error("conditioning error: {0}")]
    Conditioning(String),
    #[error("not characteristic: {0}")]
    Characteristic(String),
    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    /// Short machine-readable tag used in structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Signature(_) => "SignatureError",
            Error::Domain(_) => "DomainError",
            Error::Escape(_) => "EscapeError",
            Error::Step(_) => "StepError",
            Error::Radius(_) => "RadiusError",
            Error::Fit(_) => "FitError",
            Error::Grid(_) => "GridError",
            Error::Singularity(_) => "SingularityWarning",
            Error::Branch(_) => "BranchError",
            Error::Pole(_) => "PoleError",
            Error::Convergence(_) => "ConvergenceError",
            Error::Tail(_) => "TailError",
            Error::Tolerance(_) => "ToleranceError",
            Error::Dimension(_) => "DimensionError",
            Error::Memory(_) => "MemoryError",
            Error::Conditioning(_) => "ConditioningError",
            Error::Characteristic(_) => "CharacteristicError",
            Error::Format(_) => "FormatError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
