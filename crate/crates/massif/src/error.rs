use std::path::PathBuf;

use crate::wireframe::Diagnostic;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid coordinate: {0}")]
    InvalidCoordinate(String),

    /// ENU conversions are only valid near the frame origin; see
    /// [`crate::geo::MAX_FRAME_RANGE`].
    #[error("point is {distance_m:.0} m from the frame origin, beyond the {limit_m:.0} m tangent-plane range")]
    OutOfFrame { distance_m: f64, limit_m: f64 },

    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    #[error("inverted interval: lo {lo} must be below hi {hi}")]
    InvertedInterval { lo: f64, hi: f64 },

    #[error("subdivision is invalid:{}", diagnostics.iter().map(|d| format!("\n  {d}")).collect::<String>())]
    SubdivisionInvalid { diagnostics: Vec<Diagnostic> },

    #[error("plane mismatch: {0}")]
    PlaneMismatch(String),

    #[error("mesh is not watertight: {0}")]
    OpenMesh(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("KML parse error at line {line}: {message}")]
    KmlParse { line: u32, message: String },

    #[error("placemark '{placemark}': {message}")]
    Placemark { placemark: String, message: String },

    #[error("project file: {0}")]
    Project(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
