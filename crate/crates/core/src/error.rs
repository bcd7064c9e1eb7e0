use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point outside the working region of {family}: |z| = {norm:.6} > {limit}")]
    Region {
        family: &'static str,
        norm: f64,
        limit: f64,
    },
    #[error("{what} did not converge (residual {residual:.3e})")]
    Convergence { what: &'static str, residual: f64 },
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("point is not strictly inside the unit ball (|z| = {0})")]
    OutsideBall(f64),
    #[error("boundary distance {delta:.3e} is below the floor {floor:.0e}")]
    DeltaFloor { delta: f64, floor: f64 },
    #[error("automorphism denominator {0:.3e} vanishes")]
    Singularity(f64),
    #[error("ray leaves the domain before T = {requested}; largest admissible T is {max_admissible}")]
    Range { requested: f64, max_admissible: f64 },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("sampling: {0}")]
    Sampling(String),
    #[error("backend `{backend}` cannot provide {what}")]
    Capability { backend: String, what: String },
    #[error("bracket violation: lower {lower} exceeds upper {upper}")]
    Bracket { lower: f64, upper: f64 },
    #[error("under-resolved: {0}")]
    Resolution(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of a numerical routine rather than of the input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Convergence { .. } | Error::Resolution(_) | Error::Bracket { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
