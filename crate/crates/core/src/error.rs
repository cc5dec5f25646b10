use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("netpbm parse error at byte {offset}: {reason}")]
    Parse { offset: usize, reason: String },

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("image {width}x{height} is too small, need at least {min}x{min}")]
    ImageTooSmall { width: usize, height: usize, min: usize },

    #[error("pyramid of {requested} levels is infeasible, at most {max_levels} keep the top level >= 8x8")]
    PyramidDepth { requested: usize, max_levels: usize },

    #[error("no edge points survived extraction (max gradient magnitude {max_magnitude})")]
    EmptyModel { max_magnitude: f64 },

    #[error("edge model extraction failed at pyramid level {level}: {source}")]
    LevelModel { level: usize, source: Box<Error> },

    #[error("pose index {index} out of range for grid of {size} poses")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("invalid pose grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("score map needs {required} entries but the budget allows {allowed}")]
    ScoreMapTooLarge { required: usize, allowed: usize },

    #[error("unknown template shape {0:?}")]
    UnknownTemplate(String),

    #[error("scene geometry: {0}")]
    Geometry(String),
}
