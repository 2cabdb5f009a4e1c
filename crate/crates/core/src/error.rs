use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Shapes, indices or required structure do not fit together.
    #[error("structural error: {0}")]
    Structural(String),

    /// Non-finite or otherwise unusable numeric input.
    #[error("invalid data: {0}")]
    Data(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("stencil of node {node} is not unisolvent for the polynomial space")]
    DeficientStencil { node: usize },

    #[error("system is overdetermined: {rows} rows, {cols} columns")]
    Overdetermined { rows: usize, cols: usize },

    #[error("stencil size {stencil} exceeds the {available} available discretization nodes")]
    StencilTooLarge { stencil: usize, available: usize },

    #[error("constraint needs the {0} measure, which the domain does not provide")]
    UnknownMeasure(&'static str),

    #[error("requested accuracy not reached, best estimate {estimate:e} with error {error:e}")]
    Accuracy { estimate: f64, error: f64 },

    #[error("geometry: {0}")]
    Geometry(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }
}
