//! Geodetic points, ruler distances, and the local east-north-up frame.
//!
//! Two earth models coexist on purpose. Ruler-style distances use a sphere of
//! mean radius [`MEAN_RADIUS`], which reproduces what a map ruler reports and
//! is where the model's scale comes from. ENU placement uses the full WGS84
//! ellipsoid so exported models land on the real datum. Keep both; "fixing"
//! one to match the other moves every exported model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::Point3;

/// IUGG mean earth radius rounded to 0.1 m, metres.
pub const MEAN_RADIUS: f64 = 6_371_008.8;
/// WGS84 semi-major axis, metres.
pub const WGS84_A: f64 = 6_378_137.0;
/// WGS84 flattening.
pub const WGS84_F: f64 = 1.0 / 298.257_223_563;
/// WGS84 first eccentricity squared, `f * (2 - f)`.
pub const WGS84_E2: f64 = WGS84_F * (2.0 - WGS84_F);
/// Tangent-plane validity bound for ENU conversions, metres.
pub const MAX_FRAME_RANGE: f64 = 100_000.0;

/// Geodetic coordinate: latitude/longitude in degrees on WGS84, altitude in
/// metres above the ellipsoid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
    pub alt: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64, alt: f64) -> Result<Self> {
        let p = GeoPoint { lat, lon, alt };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lat.is_finite() && self.lon.is_finite() && self.alt.is_finite()) {
            return Err(Error::InvalidCoordinate(format!(
                "non-finite component in ({}, {}, {})",
                self.lat, self.lon, self.alt
            )));
        }
        if !(-90.0..=90.0).contains(&self.lat) {
            return Err(Error::InvalidCoordinate(format!("latitude {} outside [-90, 90]", self.lat)));
        }
        if !(-180.0..=180.0).contains(&self.lon) {
            return Err(Error::InvalidCoordinate(format!("longitude {} outside [-180, 180]", self.lon)));
        }
        Ok(())
    }
}

/// Distance in metres.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Distance(pub f64);

impl Distance {
    pub fn meters(self) -> f64 {
        self.0
    }
}

/// A local ENU (east-north-up) frame tangent to the WGS84 ellipsoid at
/// `origin`. Right-handed: x = east, y = north, z = up.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalFrame {
    pub origin: GeoPoint,
}

impl LocalFrame {
    pub fn new(origin: GeoPoint) -> Result<Self> {
        origin.validate()?;
        Ok(LocalFrame { origin })
    }
}

/// Great-circle distance by the haversine formula on the [`MEAN_RADIUS`]
/// sphere, ignoring altitude. Symmetric; exactly zero for identical lat/lon.
pub fn geodesic_distance(a: &GeoPoint, b: &GeoPoint) -> Result<Distance> {
    a.validate()?;
    b.validate()?;
    let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
    let dp = p2 - p1;
    let dl = (b.lon - a.lon).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    let c = 2.0 * h.sqrt().atan2((1.0 - h).sqrt());
    Ok(Distance(MEAN_RADIUS * c))
}

fn geodetic_to_ecef(p: &GeoPoint) -> Point3 {
    let (phi, lam) = (p.lat.to_radians(), p.lon.to_radians());
    let n = WGS84_A / (1.0 - WGS84_E2 * phi.sin() * phi.sin()).sqrt();
    Point3::new(
        (n + p.alt) * phi.cos() * lam.cos(),
        (n + p.alt) * phi.cos() * lam.sin(),
        (n * (1.0 - WGS84_E2) + p.alt) * phi.sin(),
    )
}

fn ecef_to_geodetic(p: Point3) -> GeoPoint {
    let lam = p.y.atan2(p.x);
    let rho = (p.x * p.x + p.y * p.y).sqrt();
    let mut phi = p.z.atan2(rho * (1.0 - WGS84_E2));
    // fixed-point iteration on latitude; converges to f64 precision in a
    // handful of rounds anywhere near the surface
    for _ in 0..20 {
        let n = WGS84_A / (1.0 - WGS84_E2 * phi.sin() * phi.sin()).sqrt();
        let next = (p.z + WGS84_E2 * n * phi.sin()).atan2(rho);
        if (next - phi).abs() < 1e-15 {
            phi = next;
            break;
        }
        phi = next;
    }
    let n = WGS84_A / (1.0 - WGS84_E2 * phi.sin() * phi.sin()).sqrt();
    let alt = if phi.cos().abs() > 1e-6 {
        rho / phi.cos() - n
    } else {
        p.z / phi.sin() - n * (1.0 - WGS84_E2)
    };
    GeoPoint { lat: phi.to_degrees(), lon: lam.to_degrees(), alt }
}

/// East/north/up unit vectors of the frame, in ECEF coordinates.
fn enu_axes(origin: &GeoPoint) -> (Point3, Point3, Point3) {
    let (phi, lam) = (origin.lat.to_radians(), origin.lon.to_radians());
    let east = Point3::new(-lam.sin(), lam.cos(), 0.0);
    let north = Point3::new(-phi.sin() * lam.cos(), -phi.sin() * lam.sin(), phi.cos());
    let up = Point3::new(phi.cos() * lam.cos(), phi.cos() * lam.sin(), phi.sin());
    (east, north, up)
}

/// Convert a geodetic point to local ENU metres. Errors if the point is more
/// than [`MAX_FRAME_RANGE`] from the origin, where the tangent plane stops
/// being a useful approximation.
pub fn geodetic_to_enu(p: &GeoPoint, frame: &LocalFrame) -> Result<Point3> {
    p.validate()?;
    let d = geodetic_to_ecef(p) - geodetic_to_ecef(&frame.origin);
    let (e, n, u) = enu_axes(&frame.origin);
    let local = Point3::new(d.dot(e), d.dot(n), d.dot(u));
    if local.norm() > MAX_FRAME_RANGE {
        return Err(Error::OutOfFrame { distance_m: local.norm(), limit_m: MAX_FRAME_RANGE });
    }
    Ok(local)
}

/// Convert local ENU metres back to a geodetic point (inverse of
/// [`geodetic_to_enu`] to well under a micron inside the frame range).
pub fn enu_to_geodetic(p: Point3, frame: &LocalFrame) -> Result<GeoPoint> {
    if !p.is_finite() {
        return Err(Error::InvalidCoordinate(format!("non-finite ENU point {p:?}")));
    }
    if p.norm() > MAX_FRAME_RANGE {
        return Err(Error::OutOfFrame { distance_m: p.norm(), limit_m: MAX_FRAME_RANGE });
    }
    let (e, n, u) = enu_axes(&frame.origin);
    let ecef = geodetic_to_ecef(&frame.origin) + e * p.x + n * p.y + u * p.z;
    Ok(ecef_to_geodetic(ecef))
}
