use thiserror::Error;

/// Which partition property failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionDefect {
    Overlap,
    Gap,
}

impl std::fmt::Display for PartitionDefect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PartitionDefect::Overlap => f.write_str("overlap"),
            PartitionDefect::Gap => f.write_str("gap"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid probability space: {0}")]
    InvalidSpace(String),

    #[error("event does not belong to this probability space")]
    ForeignEvent,

    #[error("unknown atom or event {0:?}")]
    UnknownName(String),

    #[error("conditioning event has probability {0}")]
    ZeroMeasureCondition(String),

    #[error("not a partition: {defect} ({detail})")]
    NotAPartition {
        defect: PartitionDefect,
        detail: String,
    },

    #[error("size {0} is too small; at least 2 cells are required")]
    SizeTooSmall(usize),

    #[error("the events of a conjunctive fork must be distinct")]
    IndistinctEvents,

    #[error("pair is not positively correlated (gamma = {0})")]
    NotCorrelated(String),

    #[error(
        "strictly correlated pair: quadrant {quadrant} has probability 0, but interior \
         admissible* bounds force every quadrant to be positive for a realizable set"
    )]
    StrictCorrelationUnsupported { quadrant: String },

    #[error("no feasible parameters after {retries} retries")]
    NoFeasibleParameters { retries: u32 },

    #[error("invalid construction schedule: {0}")]
    InvalidSchedule(String),

    #[error("degenerate tail: leading cells already have total measure {0}")]
    DegenerateTail(String),

    #[error("singular joint constraint: affine coefficient is zero")]
    SingularSolve,

    #[error("set is not admissible*: {0}")]
    NotAdmissible(String),

    #[error("set targets do not match the space: {0}")]
    TargetMismatch(String),

    #[error("set is not realizable: joint sum {joint_sum} differs from p(A and B) = {p_ab}")]
    NotRealizable { joint_sum: String, p_ab: String },

    #[error("quadrant {quadrant} has probability 0 but its split weights are required")]
    ZeroQuadrantMismatch { quadrant: String },

    #[error("search budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Variant name, used as the error kind in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse(_) => "ParseError",
            Error::InvalidSpace(_) => "InvalidSpace",
            Error::ForeignEvent => "ForeignEvent",
            Error::UnknownName(_) => "UnknownName",
            Error::ZeroMeasureCondition(_) => "ZeroMeasureCondition",
            Error::NotAPartition { .. } => "NotAPartition",
            Error::SizeTooSmall(_) => "SizeTooSmall",
            Error::IndistinctEvents => "IndistinctEvents",
            Error::NotCorrelated(_) => "NotCorrelated",
            Error::StrictCorrelationUnsupported { .. } => "StrictCorrelationUnsupported",
            Error::NoFeasibleParameters { .. } => "NoFeasibleParameters",
            Error::InvalidSchedule(_) => "InvalidSchedule",
            Error::DegenerateTail(_) => "DegenerateTail",
            Error::SingularSolve => "SingularSolve",
            Error::NotAdmissible(_) => "NotAdmissible",
            Error::TargetMismatch(_) => "TargetMismatch",
            Error::NotRealizable { .. } => "NotRealizable",
            Error::ZeroQuadrantMismatch { .. } => "ZeroQuadrantMismatch",
            Error::BudgetExceeded(_) => "BudgetExceeded",
            Error::VerificationFailed(_) => "VerificationFailed",
            Error::InvalidInput(_) => "InvalidInput",
            Error::Io(_) => "IoError",
        }
    }

    /// Errors caused by malformed input rather than by the mathematics.
    pub fn is_parse(&self) -> bool {
        matches!(
            self,
            Error::Parse(_) | Error::InvalidSpace(_) | Error::UnknownName(_) | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
