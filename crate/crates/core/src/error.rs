use core::fmt;

/// Errors produced by the evaluation core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Buffer length disagrees with the declared shape, or a dimension is zero.
    InvalidShape { height: usize, width: usize, len: usize },
    /// A score lies outside `[0, 1]` (or is NaN).
    ScoreOutOfRange { index: usize, value: f64 },
    /// Two masks or regions that must share a shape do not.
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    /// A configuration value is outside its valid range.
    InvalidConfig(&'static str),
    /// An aggregation was asked to fold zero samples.
    EmptyInput,
    /// A perturbation needs at least this many targets.
    NotEnoughTargets { required: usize, found: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidShape { height, width, len } => write!(
                f,
                "invalid mask shape {height}x{width} for buffer of length {len}"
            ),
            Error::ScoreOutOfRange { index, value } => {
                write!(f, "score {value} at index {index} is outside [0, 1]")
            }
            Error::ShapeMismatch { expected, found } => write!(
                f,
                "shape mismatch: expected {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Error::InvalidConfig(what) => write!(f, "invalid configuration: {what}"),
            Error::EmptyInput => f.write_str("no samples to aggregate"),
            Error::NotEnoughTargets { required, found } => write!(
                f,
                "perturbation requires at least {required} target(s), mask has {found}"
            ),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T, E = Error> = core::result::Result<T, E>;
