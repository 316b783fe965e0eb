use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownVariable { name: String, pos: usize },
    #[error("exponent at byte {pos} is not a nonnegative integer literal")]
    InvalidExponent { pos: usize },
    #[error("variable index {index} out of range for {nvars} variables")]
    VariableOutOfRange { index: usize, nvars: usize },
    #[error("polynomial has {got} variables, expected {expected}")]
    VariableCountMismatch { expected: usize, got: usize },
    #[error("resultant undefined: both inputs are constant in the variable")]
    BothConstant,
    #[error("zero polynomial passed where a nonzero polynomial is required")]
    ZeroPolynomial,
    #[error("discriminant needs degree at least 2 in the variable, got {degree}")]
    DegreeTooLow { degree: u32 },

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("unknown heuristic or feature alias `{0}`")]
    UnknownHeuristic(String),
    #[error("empty heuristic name")]
    EmptyHeuristic,
    #[error("duplicate feature `{0}`")]
    DuplicateFeature(String),
    #[error("{what} needs at least {min} items, got {got}")]
    TooFew { what: &'static str, min: usize, got: usize },
    #[error("enumerating all orderings of {nvars} variables exceeds the guard of {guard}")]
    GuardExceeded { nvars: usize, guard: usize },

    #[error("no SHAP records for model `{0}`")]
    EmptyRecords(String),
    #[error("rankings are not over the same feature set: {0}")]
    UniverseMismatch(String),
    #[error("requested top {k} of only {len} entries")]
    KTooLarge { k: usize, len: usize },

    #[error("negative time: {0}")]
    NegativeTime(f64),
    #[error("malformed row {line}: {msg}")]
    MalformedRow { line: usize, msg: String },
    #[error("unknown ordering column `{0}`")]
    UnknownColumn(String),
    #[error("missing or invalid header: {0}")]
    MissingHeader(String),
    #[error("problem `{0}` appears in the timings but not in the problem set")]
    IdMismatch(String),
    #[error("no problems to evaluate")]
    NoProblems,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// True for errors that indicate a bug rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }
}
