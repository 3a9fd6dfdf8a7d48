use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// `column` is 1-based.
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },

    #[error("unknown identifier `{name}` at column {column}")]
    UnknownIdentifier { name: String, column: usize },

    #[error("arity mismatch for `{name}` at column {column}: expected {expected} argument(s), found {found}")]
    Arity {
        name: String,
        column: usize,
        expected: usize,
        found: usize,
    },

    /// `total` is set when the whole argument range lies outside the domain,
    /// so the expression is undefined everywhere on the evaluated set.
    #[error("domain violation in {op}: argument {arg} outside {domain}")]
    Domain {
        op: String,
        arg: String,
        domain: String,
        total: bool,
    },

    #[error("variable index {index} out of range for a point of dimension {dim}")]
    Dimension { index: usize, dim: usize },

    #[error("recursion cap {cap} exceeded while reducing {x} to the fundamental domain")]
    RecursionCap { cap: usize, x: f64 },

    #[error("abel construction failed: achieved residual {achieved:e} exceeds tolerance {tol:e}")]
    AbelBuild { achieved: f64, tol: f64 },

    #[error("inverse out of representable range for {0}")]
    InverseRange(f64),

    #[error("growth analysis failed: {0}")]
    Growth(String),

    #[error("system is not square: {equations} equation(s) in {unknowns} unknown(s)")]
    NonSquare { equations: usize, unknowns: usize },

    #[error("parameter {name} = {value} outside [-1, 1]")]
    ParamRange { name: String, value: f64 },

    #[error("zero-width box cannot be subdivided")]
    ZeroWidth,

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("attempt budget exhausted after {0} attempt(s)")]
    Budget(usize),

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("grid of {cells} cells exceeds cap {cap}")]
    GridCap { cells: u128, cap: u128 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(op: &str, arg: impl std::fmt::Display, domain: &str, total: bool) -> Self {
        Error::Domain {
            op: op.to_string(),
            arg: arg.to_string(),
            domain: domain.to_string(),
            total,
        }
    }

    /// True for a domain error covering the entire evaluated set.
    pub fn is_total_domain(&self) -> bool {
        matches!(self, Error::Domain { total: true, .. })
    }
}
