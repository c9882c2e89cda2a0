use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("variable context mismatch: [{left}] vs [{right}]")]
    ContextMismatch { left: String, right: String },
    #[error("variable index {index} out of range for {len} variables")]
    VariableOutOfRange { index: usize, len: usize },
}

/// Syntax error with a 1-based position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}column {column}: {message}", .line.map(|l| format!("line {l}, ")).unwrap_or_default())]
pub struct ParseError {
    pub line: Option<usize>,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn at(column: usize, message: impl Into<String>) -> Self {
        ParseError { line: None, column, message: message.into() }
    }

    pub fn on_line(mut self, line: usize) -> Self {
        self.line = Some(line);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdealError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("S-pair budget of {budget} exhausted")]
    PairBudgetExceeded { budget: usize },
    #[error("colon by the zero polynomial is the whole ring")]
    ColonByZero,
    #[error("annihilator chain needs n_max >= 1")]
    EmptyChain,
}

/// Structural problems in presentations, truncations and complexes.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error("zero polynomial in generator list (its Koszul generator would be a free cycle)")]
    ZeroGenerator,
    #[error("tower map needs N >= n >= 1, got N={big}, n={small}")]
    TowerOrder { big: u32, small: u32 },
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("generator `{0}` declared twice")]
    DuplicateGenerator(String),
    #[error("generator `{0}` has no differential")]
    MissingDifferential(String),
    #[error("differential of `{generator}` has degree {found}, expected {expected}")]
    DifferentialDegree { generator: String, expected: i32, found: i32 },
    #[error("differential lowers weight on generator `{generator}` (weight {weight}, term weight {term_weight})")]
    WeightDecreasing { generator: String, weight: u32, term_weight: u32 },
    #[error("generator `{0}` has weight 0 and even parity; truncation would be infinite")]
    ZeroWeight(String),
    #[error("ambient relation `{0}` is not homogeneous")]
    InhomogeneousRelation(String),
    #[error("ambient relations are only supported for internal-differential complexes")]
    RelationsUnsupported,
    #[error("differentials compose to a nonzero map at degree {degree}")]
    NotAComplex { degree: i32 },
    #[error("morphism does not preserve weight on `{0}`")]
    MorphismWeight(String),
    #[error("presentation mismatch: {0}")]
    Mismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReiffenError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("f must be nonzero")]
    ZeroPolynomial,
    #[error("f is a unit at the origin (min degree 0); the equation is trivially solvable")]
    UnitPolynomial,
    #[error("scan needs degree >= p_max + 3 (got degree {degree}, p_max {p_max})")]
    ScanDegree { degree: u32, p_max: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WitnessError {
    #[error("precision must be at least 64 bits (got {0})")]
    Precision(usize),
    #[error("grid must be positive")]
    Grid,
    #[error("interval [{a}, {b}] must satisfy 0 <= a < b")]
    Interval { a: String, b: String },
    #[error("n_max must be at least 1")]
    Count,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Reiffen(#[from] ReiffenError),
    #[error(transparent)]
    Witness(#[from] WitnessError),
}
