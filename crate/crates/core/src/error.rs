use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "band isolation failed at lambda={lambda}, level {level}: \
         {edges} band edges and {bands} bands found, {expected} bands expected"
    )]
    BandIsolation {
        lambda: f64,
        level: usize,
        edges: usize,
        bands: usize,
        expected: usize,
    },

    #[error("cannot separate eigenvalue {index} to tol {tol}: cluster [{lo}, {hi}] at float resolution")]
    EigenSeparation {
        index: usize,
        lo: f64,
        hi: f64,
        tol: f64,
    },

    #[error("size cap exceeded: {what} needs {requested} entries, cap is {cap}")]
    SizeCap {
        what: &'static str,
        requested: u128,
        cap: u128,
    },

    #[error("point is not periodic within {n_max} iterates (tol {tol})")]
    NotPeriodic { n_max: usize, tol: f64 },

    #[error("gradient of the invariant vanishes at ({x}, {y}, {z}); no tangent plane")]
    SingularPoint { x: f64, y: f64, z: f64 },

    #[error("first-level images {0} and {1} overlap; open set condition fails")]
    OverlappingMaps(usize, usize),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonFinite(_) | Error::InvalidArgument(_) | Error::OverlappingMaps(..) => 1,
            Error::BandIsolation { .. }
            | Error::EigenSeparation { .. }
            | Error::NotPeriodic { .. }
            | Error::SingularPoint { .. } => 2,
            Error::SizeCap { .. } => 3,
        }
    }
}

pub(crate) fn ensure_finite(v: f64, what: &'static str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(what))
    }
}
