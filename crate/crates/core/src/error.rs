use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("singular kernel evaluation at ({dx1}, {dx2})")]
    Singular { dx1: f64, dx2: f64 },

    #[error("degenerate segment of length {length:e} in contour {contour}")]
    DegenerateSegment { contour: usize, length: f64 },

    #[error("degenerate polygon with area {area:e}")]
    DegeneratePolygon { area: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("point below the wall: x1 = {x1:e}")]
    BelowWall { x1: f64 },

    #[error("velocity blow-up: |u| = {speed} at t = {t}")]
    BlowUp { speed: f64, t: f64 },

    #[error("remesh changed contour {contour} area by {relative:e} (relative)")]
    AreaDistortion { contour: usize, relative: f64 },

    #[error("self-intersection between segments {first} and {second} at t = {t}")]
    SelfIntersection { first: usize, second: usize, t: f64 },

    #[error("parse error in {what}: {msg}")]
    Parse { what: String, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(what: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Parse {
            what: what.into(),
            msg: msg.into(),
        }
    }

    /// Errors raised by the integrator rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular { .. }
                | Error::DegenerateSegment { .. }
                | Error::DegeneratePolygon { .. }
                | Error::BelowWall { .. }
                | Error::BlowUp { .. }
                | Error::AreaDistortion { .. }
                | Error::SelfIntersection { .. }
        )
    }
}
