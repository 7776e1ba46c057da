use thiserror::Error;

/// Every failure an analysis can report.
///
/// The CLI prints the variant name on standard error, so variants are kept
/// coarse and stable.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate edge {src} -> {dst}")]
    DuplicateEdge { src: String, dst: String },
    #[error("unknown node label {0}")]
    UnknownNode(String),
    #[error("driver/controlled node set is empty")]
    EmptyDriverSet,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("cavity iteration did not converge (residual {residual:e} after {iterations} iterations)")]
    NonConvergence { residual: f64, iterations: usize },
    #[error("configuration model rejected {attempts} consecutive draws")]
    RejectionFailure { attempts: usize },
    #[error("controllability Gramian is singular (smallest eigenvalue {min_eigenvalue:e})")]
    SingularGramian { min_eigenvalue: f64 },
    #[error("no node has a directed path to every target")]
    NoPathToTarget,
    #[error("input matrix B is singular")]
    SingularB,
    #[error("orbit never entered the control region within {steps} steps")]
    NoCapture { steps: usize },
    #[error("no compensatory perturbation found within {iterations} iterations")]
    NoCompensation { iterations: usize },
    #[error("constraints admit no perturbation toward the target")]
    InfeasibleConstraints,
    #[error("no trajectory supplied for clamped node {0}")]
    MissingTrajectory(usize),
    #[error("graph is disconnected (lambda_2 = {0:e})")]
    DisconnectedGraph(f64),
    #[error("no node is pinned")]
    NoPinnedNodes,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Variant name, used in CLI diagnostics.
    pub fn variant(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "ParseError",
            Error::DuplicateEdge { .. } => "DuplicateEdge",
            Error::UnknownNode(_) => "UnknownNode",
            Error::EmptyDriverSet => "EmptyDriverSet",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::RejectionFailure { .. } => "RejectionFailure",
            Error::SingularGramian { .. } => "SingularGramian",
            Error::NoPathToTarget => "NoPathToTarget",
            Error::SingularB => "SingularB",
            Error::NoCapture { .. } => "NoCapture",
            Error::NoCompensation { .. } => "NoCompensation",
            Error::InfeasibleConstraints => "InfeasibleConstraints",
            Error::MissingTrajectory(_) => "MissingTrajectory",
            Error::DisconnectedGraph(_) => "DisconnectedGraph",
            Error::NoPinnedNodes => "NoPinnedNodes",
            Error::InvalidArgument(_) => "InvalidArgument",
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
