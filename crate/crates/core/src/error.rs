use alloc::string::String;
use core::fmt;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// The input matrix is not symmetric.
    NonSymmetric,
    /// The input matrix is not positive definite.
    NonPositiveDefinite,
    /// An operation needing a primitive lattice got a non-primitive one.
    NotPrimitive,
    /// An operation needing a stable lattice got an unstable one.
    NotStable,
    /// A closed form for `p` was requested but the lattice is unstable there.
    NotStableAtPrime { p: u64 },
    /// An argument is outside the supported domain.
    InvalidArgument(String),
    /// The counting oracle needed `p^r` above the configured cap.
    DepthLimitExceeded { p: u64, n: u64, cap: u128 },
    /// Direct enumeration would exceed the configured budget.
    BudgetExceeded { needed: u128, budget: u128 },
    /// The coprime formula was called with `n` outside its hypothesis.
    CoprimalityViolated { p: u64, n: u64 },
    /// A construction hypothesis does not hold.
    HypothesisViolated(String),
    /// Reduction to a stable lattice did not terminate within the guard.
    NonTermination,
    /// Recursive evaluation exceeded the guard depth.
    RecursionDepthExceeded,
    /// A synthesized formula disagreed with direct evaluation.
    VerificationFailed { n: u64, expected: String, got: String },
    /// Intermediate integer arithmetic overflowed the native width.
    Overflow,
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable identifier.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonSymmetric => "NonSymmetric",
            Error::NonPositiveDefinite => "NonPositiveDefinite",
            Error::NotPrimitive => "NotPrimitive",
            Error::NotStable => "NotStable",
            Error::NotStableAtPrime { .. } => "NotStableAtPrime",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::DepthLimitExceeded { .. } => "DepthLimitExceeded",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::CoprimalityViolated { .. } => "CoprimalityViolated",
            Error::HypothesisViolated(_) => "HypothesisViolated",
            Error::NonTermination => "NonTermination",
            Error::RecursionDepthExceeded => "RecursionDepthExceeded",
            Error::VerificationFailed { .. } => "VerificationFailed",
            Error::Overflow => "Overflow",
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonSymmetric => write!(f, "Gram matrix is not symmetric"),
            Error::NonPositiveDefinite => write!(f, "Gram matrix is not positive definite"),
            Error::NotPrimitive => write!(f, "lattice is not primitive"),
            Error::NotStable => write!(f, "lattice is not stable"),
            Error::NotStableAtPrime { p } => write!(f, "lattice is not stable at p = {p}"),
            Error::InvalidArgument(m) => write!(f, "invalid argument: {m}"),
            Error::DepthLimitExceeded { p, n, cap } => {
                write!(f, "local density at p = {p}, n = {n} needs p^r above cap {cap}")
            }
            Error::BudgetExceeded { needed, budget } => {
                write!(f, "enumeration needs {needed} cells, budget is {budget}")
            }
            Error::CoprimalityViolated { p, n } => {
                write!(f, "n = {n} is not in N*Z_p^x at p = {p}")
            }
            Error::HypothesisViolated(m) => write!(f, "hypothesis violated: {m}"),
            Error::NonTermination => write!(f, "reduction to a stable lattice did not terminate"),
            Error::RecursionDepthExceeded => write!(f, "recursion depth exceeded"),
            Error::VerificationFailed { n, expected, got } => {
                write!(f, "formula check failed at n = {n}: expected {expected}, got {got}")
            }
            Error::Overflow => write!(f, "integer overflow"),
        }
    }
}

impl core::error::Error for Error {}
