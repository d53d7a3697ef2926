use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("degenerate trajectory: every segment has zero length")]
    DegenerateLabel,
    #[error("{} point(s) outside the grid: indices {indices:?}", indices.len())]
    OutOfBounds { indices: Vec<usize> },
    #[error("position ({x}, {y}) is outside the grid hull")]
    OutOfHull { x: f64, y: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("estimator not fitted: {0}")]
    Unfit(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Wraps the error with the name of the pipeline stage that produced it.
    pub fn at(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
