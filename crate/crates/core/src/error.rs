use thiserror::Error;

/// Hypotheses on the forms and the region that a computation may require.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Hypothesis {
    /// Bounded open convex region.
    H1,
    /// Linear forms not proportional, quadratic form irreducible over Q.
    H2,
    /// All three forms positive on the region.
    H3,
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Hypothesis::H1 => "H1",
            Hypothesis::H2 => "H2",
            Hypothesis::H3 => "H3",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("hypothesis {hypothesis} violated: {reason}")]
    Hypothesis {
        hypothesis: Hypothesis,
        reason: String,
    },
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("forms are not primitive; reduce with rho_nonprimitive_reduce first")]
    NonPrimitive,
    #[error("degenerate region: {0}")]
    DegenerateRegion(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn h2(reason: impl Into<String>) -> Self {
        Error::Hypothesis {
            hypothesis: Hypothesis::H2,
            reason: reason.into(),
        }
    }

    pub(crate) fn invalid(reason: impl Into<String>) -> Self {
        Error::InvalidArgument(reason.into())
    }
}
