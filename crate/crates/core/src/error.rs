use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("coordinate {value} is outside the side length {side}")]
    CoordinateOutOfRange { value: u64, side: u64 },

    #[error("grid with side {m} in {d} dimensions exceeds the element limit")]
    GridTooLarge { m: u64, d: usize },

    #[error("elements {0} and {1} share the same coordinate vector")]
    DuplicatePoint(usize, usize),

    #[error("tie-break would change the comparability of elements {0} and {1}")]
    TieBreak(usize, usize),

    #[error("poset is not canonical: coordinate {value} repeats in dimension {dim}")]
    NotCanonical { dim: usize, value: u32 },

    #[error("prefix index {i} is out of range for bit length {ell}")]
    PrefixIndex { i: u32, ell: u32 },

    #[error("value {t} does not fit in {ell} bits")]
    PrefixValue { t: u64, ell: u32 },

    #[error("points agree in dimension {dim}; the relay point needs distinct coordinates")]
    EqualCoordinate { dim: usize },

    #[error("{0} and {1} are not strictly ordered")]
    NotOrdered(usize, usize),

    #[error("{0} is not dominated by {1}")]
    NotDominated(String, String),

    #[error("vertex {0} does not exist")]
    UnknownVertex(usize),

    #[error("spanner does not match poset: {0}")]
    IdMismatch(String),

    #[error("invalid spanner: {0}")]
    InvalidSpanner(String),

    #[error("edge ({0}, {1}) is missing from the spanner")]
    MissingEdge(usize, usize),

    #[error("bipartite example needs an even size of at least 2, got {0}")]
    OddSize(usize),

    #[error("guard exceeded: {0}")]
    GuardExceeded(String),

    #[error("search budget of {budget} nodes exhausted before the optimum was proven")]
    BudgetExhausted { budget: u64 },

    #[error("{0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("no crossing edge on the path for jump ({0}, {1})")]
    NoCrossingEdge(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("format error: {0}")]
    Format(String),
}
