use thiserror::Error;

/// Errors raised while reading an instance file or a committee literal.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: malformed header (expected `m n k`): {reason}")]
    Header { line: usize, reason: String },
    #[error("line {line}: invalid candidate token `{token}`")]
    Token { line: usize, token: String },
    #[error("line {line}: candidate {candidate} out of range 1..={num_candidates}")]
    CandidateOutOfRange {
        line: usize,
        candidate: usize,
        num_candidates: usize,
    },
    #[error("line {line}: candidate {candidate} listed twice")]
    DuplicateCandidate { line: usize, candidate: usize },
    #[error("line {line}: committee size k={k} exceeds number of candidates m={m}")]
    CommitteeTooLarge { line: usize, k: usize, m: usize },
    #[error("line {line}: expected {expected} voter lines, found {found}")]
    MissingVoters {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: unexpected content after the last voter line")]
    TrailingContent { line: usize },
    #[error("invalid committee literal `{0}`")]
    Committee(String),
}

impl ParseError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::Header { line, .. }
            | ParseError::Token { line, .. }
            | ParseError::CandidateOutOfRange { line, .. }
            | ParseError::DuplicateCandidate { line, .. }
            | ParseError::CommitteeTooLarge { line, .. }
            | ParseError::MissingVoters { line, .. }
            | ParseError::TrailingContent { line } => Some(*line),
            ParseError::Committee(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("candidate index {candidate} out of range (m = {num_candidates})")]
    CandidateOutOfRange {
        candidate: usize,
        num_candidates: usize,
    },
    #[error("voter index {voter} out of range (n = {num_voters})")]
    VoterOutOfRange { voter: usize, num_voters: usize },
    #[error("committee has {size} members but k = {k}")]
    CommitteeTooLarge { size: usize, k: usize },
    #[error("voter set must be nonempty")]
    EmptyVoterSet,
    #[error("{what}: search budget of {budget} nodes exceeded")]
    BudgetExceeded { what: &'static str, budget: u64 },
    #[error("linear program dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("instance is not laminar")]
    NotLaminar,
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
}

pub type Result<T> = std::result::Result<T, Error>;
