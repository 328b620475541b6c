use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Every failure the core library can report.
///
/// Variants are grouped by how a caller is expected to react: input
/// validation problems, budget problems (the computation was well posed but
/// too large or too unlucky), and invariant violations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),

    #[error("invalid architecture: {0}")]
    InvalidArch(String),

    #[error("invalid activation: leaky slope {0} must be finite and not 0 or 1")]
    InvalidActivation(f64),

    #[error("shape mismatch at layer {layer} ({what}): expected {expected}, got {actual}")]
    Shape { what: &'static str, layer: usize, expected: usize, actual: usize },

    #[error("architecture flavor mismatch: expected {expected}, got {actual}")]
    Flavor { expected: &'static str, actual: &'static str },

    #[error("missing scale vector for layer {layer}")]
    MissingScales { layer: usize },

    #[error("spatial length collapses at conv layer {layer}: input length {input}, kernel {kernel}")]
    SpatialCollapse { layer: usize, input: usize, kernel: usize },

    #[error("parameter {value} at flat position {index} is not a grid level")]
    OffGrid { index: usize, value: f64 },

    #[error("teacher width {teacher} exceeds student width {student} at layer {layer}")]
    WidthViolation { layer: usize, teacher: usize, student: usize },

    #[error("kernel size mismatch at layer {layer}: teacher {teacher}, student {student}")]
    KernelMismatch { layer: usize, teacher: usize, student: usize },

    #[error("degenerate teacher after {attempts} draws: last probe had {positives} of {probe} positive labels")]
    DegenerateTeacher { attempts: usize, positives: usize, probe: usize },

    #[error("labeled set is empty")]
    EmptySet,

    #[error("input dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid input domain: {0}")]
    InvalidDomain(String),

    #[error("the {0} domain is not enumerable")]
    NotEnumerable(&'static str),

    #[error("enumerating {configs} configurations exceeds the budget of {budget}")]
    BudgetExceeded { configs: u128, budget: u64 },

    #[error("no acceptable draw within {draws} draws")]
    BudgetExhausted { draws: u64 },

    #[error("{bound}: {param} = {value} is outside {range}")]
    OutOfRange { bound: &'static str, param: &'static str, value: f64, range: &'static str },

    #[error("margin ordering violated: alpha = {alpha} must be strictly below beta = {beta}")]
    MarginOrdering { alpha: f64, beta: f64 },

    #[error("input point {index} has zero norm")]
    ZeroNorm { index: usize },

    #[error("{what} {index} has norm {norm}, expected a unit vector")]
    NotUnit { what: &'static str, index: usize, norm: f64 },

    #[error("no teacher scale in (0, 1] fits the sample budget ({0})")]
    NoTeacherScale(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// Whether the error is a budget problem rather than bad input.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. } | Error::BudgetExhausted { .. })
    }

    pub fn is_invariant(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }
}

pub(crate) fn check_open(
    bound: &'static str,
    param: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    range: &'static str,
) -> Result<()> {
    if value > lo && value < hi {
        Ok(())
    } else {
        Err(Error::OutOfRange { bound, param, value, range })
    }
}
