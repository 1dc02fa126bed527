use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A dither period that is zero, negative or not finite.
    InvalidPeriod(f64),
    /// A parameter outside its admissible range.
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    /// A time span that is not an integer multiple of the required step.
    NotAMultiple {
        what: &'static str,
        value: f64,
        step: f64,
    },
    /// The state left the overflow guard (or became NaN) at `time`.
    Diverged { time: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidPeriod(t) => write!(f, "dither period must be positive and finite, got {t}"),
            Error::InvalidParameter { name, reason } => write!(f, "invalid {name}: {reason}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NotAMultiple { what, value, step } => {
                write!(f, "{what} {value} is not an integer multiple of {step}")
            }
            Error::Diverged { time } => write!(f, "trajectory diverged at t = {time}"),
        }
    }
}

impl core::error::Error for Error {}
