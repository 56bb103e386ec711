use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate element {element}: jacobian determinant {det:e} at gauss point {point}")]
    DegenerateElement { element: usize, point: usize, det: f64 },

    #[error("singular stiffness matrix: pivot {pivot:e} at equation {equation} (insufficient constraints?)")]
    Singular { equation: usize, pivot: f64 },

    #[error("static solve did not reach tolerance: relative residual {residual:e}")]
    NotConverged { residual: f64 },

    #[error("{} grid point(s) outside the sampled domain, first: {:?}", points.len(), points.first())]
    OutOfDomain { points: Vec<[f64; 2]> },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("forward model failed for design {design:?}: {source}")]
    Cost {
        design: Vec<f64>,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures of the numerical machinery (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::DegenerateElement { .. } | Error::Singular { .. } | Error::NotConverged { .. } => true,
            Error::Cost { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
