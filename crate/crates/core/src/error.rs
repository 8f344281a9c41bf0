use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at position {pos}: {message} (found {token:?})")]
    Syntax {
        pos: usize,
        token: String,
        message: String,
    },

    #[error("zero denominator at position {pos}")]
    ZeroDenominator { pos: usize },

    #[error("liouville base must be at least 2, got {base} at position {pos}")]
    LiouvilleBase { base: u64, pos: usize },

    /// The value sits so close to an integer that no precision up to the
    /// ceiling separated it, and symbolic rational folding did not apply.
    #[error("floor undecided{} after {precision} bits", at_str(.at))]
    FloorUndecided { at: Option<i64>, precision: u32 },

    /// A sign or comparison could not be certified below the precision ceiling.
    #[error("precision ceiling of {precision} bits exhausted while {context}")]
    PrecisionExhausted { precision: u32, context: String },

    #[error("divisor explosion: {primes} primes below z give 2^{primes} squarefree moduli (cap {cap})")]
    DivisorExplosion { primes: usize, cap: u64 },

    #[error("polynomial degree {degree} exceeds the supported maximum {max}")]
    DegreeTooLarge { degree: usize, max: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn at_str(at: &Option<i64>) -> String {
    match at {
        Some(x) => format!(" at x = {x}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn syntax(pos: usize, token: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Syntax {
            pos,
            token: token.into(),
            message: message.into(),
        }
    }

    /// Attaches the offending integer argument to a floor failure.
    pub fn at_point(self, x: i64) -> Self {
        match self {
            Self::FloorUndecided { precision, .. } => Self::FloorUndecided {
                at: Some(x),
                precision,
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
