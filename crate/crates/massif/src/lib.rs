//! Watertight 3D rock-mass models from two planar map views.
//!
//! The input is a pair of wireframe subdivisions traced over imagery: a plan
//! view splitting the footprint into rock masses in (x, y), and a profile view
//! splitting the elevation range into layers in (x, z). Each view is extruded
//! along the axis it cannot see (plan along +z, profile along +y) and the two
//! prism families are intersected, producing one watertight triangle mesh per
//! (rock mass, layer) pair. A local East-North-Up frame anchored at a geodetic
//! origin ties the metric model back to the globe for KML/COLLADA export.
//!
//! The `examples/` directory walks the pipeline end to end: frame setup and
//! scale derivation (`geodesy`), input checking (`validate_traces`), single
//! prisms (`extrude_region`), the crossed-view intersection (`crossed_prisms`),
//! and the bundled full scene (`haut_barr`).

pub mod error;
pub mod geo;
pub mod kml_io;
pub mod mesh;
pub mod project;
pub mod solids;
pub mod wireframe;

pub use error::{Error, Result};

/// Geometric tolerance in metres (and m^2 for areas): coordinates closer than
/// this are the same point, and membership tests treat this band around a
/// surface as the boundary.
pub const EPS_GEOM: f64 = 1e-9;

/// Where a point sits relative to a closed region.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Containment {
    Inside,
    Outside,
    OnBoundary,
}
