//! Planar wireframe subdivisions: labeled simple polygons sharing one plane.
//!
//! A subdivision is the 2D half of the modeling input: the plan view carries
//! rock-mass footprints in (x, y), the profile view carries layer bands in
//! (x, z). Both use [`Point2`] with `u` along the shared x axis and `v` along
//! the plane's second axis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{Containment, EPS_GEOM};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point2 {
    pub u: f64,
    pub v: f64,
}

impl Point2 {
    pub const fn new(u: f64, v: f64) -> Self {
        Point2 { u, v }
    }

    pub fn dist(self, o: Point2) -> f64 {
        ((self.u - o.u).powi(2) + (self.v - o.v).powi(2)).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.u.is_finite() && self.v.is_finite()
    }
}

/// Cross product of (b - a) and (c - a); positive when `c` lies left of a->b.
pub fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b.u - a.u) * (c.v - a.v) - (b.v - a.v) * (c.u - a.u)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Plane {
    /// Top view; (u, v) = (x, y), swept along +z.
    PlanXY,
    /// Side view; (u, v) = (x, z), swept along +y.
    ProfileXZ,
}

impl Plane {
    pub fn axis_names(self) -> (&'static str, &'static str) {
        match self {
            Plane::PlanXY => ("x", "y"),
            Plane::ProfileXZ => ("x", "z"),
        }
    }
}

/// One labeled region: a simple counter-clockwise vertex ring (no repeated
/// closing vertex) plus an optional per-unit sweep interval override.
#[derive(Clone, Debug)]
pub struct UnitRegion {
    pub id: u32,
    pub name: String,
    pub polygon: Vec<Point2>,
    /// Overrides the subdivision-wide sweep interval when set; `(lo, hi)` in
    /// metres along the extrusion axis.
    pub sweep_interval: Option<(f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct PlanarSubdivision {
    pub plane: Plane,
    pub units: Vec<UnitRegion>,
}

/// Model extents in metres: x, y, z.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub length: f64,
    pub width: f64,
    pub height: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagnosticKind {
    EmptySubdivision,
    DuplicateId,
    TooFewVertices,
    NonFinite,
    ShortEdge,
    CollinearVertex,
    SelfIntersection,
    ZeroArea,
    Clockwise,
    InvalidInterval,
    InteriorOverlap,
}

/// One validation finding. `auto_fixable` findings (orientation, collinear
/// vertices) are repaired by the ingest paths and only warn; everything else
/// blocks a build.
#[derive(Clone, Debug)]
pub struct Diagnostic {
    pub unit_id: Option<u32>,
    pub kind: DiagnosticKind,
    pub message: String,
    pub auto_fixable: bool,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.unit_id {
            Some(id) => write!(f, "unit {id}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

fn diag(unit_id: Option<u32>, kind: DiagnosticKind, message: String) -> Diagnostic {
    let auto_fixable = matches!(kind, DiagnosticKind::Clockwise | DiagnosticKind::CollinearVertex);
    Diagnostic { unit_id, kind, message, auto_fixable }
}

/// Twice the signed area via the shoelace sum; positive for CCW rings.
pub fn signed_area(ring: &[Point2]) -> f64 {
    let mut s = 0.0;
    for (a, b) in ring_edges(ring) {
        s += a.u * b.v - b.u * a.v;
    }
    s / 2.0
}

fn ring_edges(ring: &[Point2]) -> impl Iterator<Item = (Point2, Point2)> + '_ {
    (0..ring.len()).map(|i| (ring[i], ring[(i + 1) % ring.len()]))
}

pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let (du, dv) = (b.u - a.u, b.v - a.v);
    let len2 = du * du + dv * dv;
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (((p.u - a.u) * du + (p.v - a.v) * dv) / len2).clamp(0.0, 1.0);
    p.dist(Point2::new(a.u + t * du, a.v + t * dv))
}

/// True when segments touch or cross anywhere, with an [`EPS_GEOM`] contact
/// band around endpoints.
fn segments_touch(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    point_segment_distance(p1, q1, q2) <= EPS_GEOM
        || point_segment_distance(p2, q1, q2) <= EPS_GEOM
        || point_segment_distance(q1, p1, p2) <= EPS_GEOM
        || point_segment_distance(q2, p1, p2) <= EPS_GEOM
}

/// True when segments cross at a point interior to both (not a shared
/// endpoint contact).
fn segments_cross_properly(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    // require clear sign changes on both segments; eps-grazing contacts are
    // boundary touches, not interior crossings
    let scale = (p1.dist(p2) * q1.dist(q2)).max(1e-300);
    let strict = |x: f64| x.abs() > EPS_GEOM * scale;
    strict(d1) && strict(d2) && strict(d3) && strict(d4) && (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0)
}

fn ring_is_simple(ring: &[Point2]) -> std::result::Result<(), String> {
    let n = ring.len();
    for i in 0..n {
        let (a1, a2) = (ring[i], ring[(i + 1) % n]);
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            let (b1, b2) = (ring[j], ring[(j + 1) % n]);
            if segments_touch(a1, a2, b1, b2) {
                return Err(format!("edges {i} and {j} intersect"));
            }
        }
    }
    // reversal spikes between adjacent edges
    for i in 0..n {
        let p = ring[(i + n - 1) % n];
        let q = ring[i];
        let r = ring[(i + 1) % n];
        if point_segment_distance(r, p, q) <= EPS_GEOM || point_segment_distance(p, q, r) <= EPS_GEOM {
            return Err(format!("spike at vertex {i}"));
        }
    }
    Ok(())
}

/// Area of a simple polygon, `|shoelace| / 2`. Errors on self-intersecting
/// or degenerate (near-zero area) rings.
pub fn polygon_area(ring: &[Point2]) -> Result<f64> {
    if ring.len() < 3 {
        return Err(Error::InvalidPolygon(format!("{} vertices, need at least 3", ring.len())));
    }
    if let Some(p) = ring.iter().find(|p| !p.is_finite()) {
        return Err(Error::InvalidPolygon(format!("non-finite vertex ({}, {})", p.u, p.v)));
    }
    if let Err(msg) = ring_is_simple(ring) {
        return Err(Error::InvalidPolygon(msg));
    }
    let area = signed_area(ring).abs();
    if area <= EPS_GEOM {
        return Err(Error::InvalidPolygon("zero area".into()));
    }
    Ok(area)
}

/// Even-odd classification with an `eps` boundary band: points within `eps`
/// of any edge are `OnBoundary`, everything else is decided by ray-crossing
/// parity (half-open edge rule, so vertex-grazing rays count once).
pub fn point_in_polygon_eps(p: Point2, ring: &[Point2], eps: f64) -> Containment {
    for (a, b) in ring_edges(ring) {
        if point_segment_distance(p, a, b) <= eps {
            return Containment::OnBoundary;
        }
    }
    let mut inside = false;
    for (a, b) in ring_edges(ring) {
        if (a.v > p.v) != (b.v > p.v) {
            let cross_u = a.u + (p.v - a.v) / (b.v - a.v) * (b.u - a.u);
            if p.u < cross_u {
                inside = !inside;
            }
        }
    }
    if inside {
        Containment::Inside
    } else {
        Containment::Outside
    }
}

pub fn point_in_polygon(p: Point2, ring: &[Point2]) -> Containment {
    point_in_polygon_eps(p, ring, EPS_GEOM)
}

/// Fan-free ear-clipping triangulation of a simple CCW ring. Returns indices
/// into `ring`; exactly `n - 2` triangles.
pub fn triangulate(ring: &[Point2]) -> Result<Vec<[usize; 3]>> {
    let n = ring.len();
    if n < 3 {
        return Err(Error::InvalidPolygon("cannot triangulate fewer than 3 vertices".into()));
    }
    if signed_area(ring) <= 0.0 {
        return Err(Error::InvalidPolygon("triangulation expects a CCW ring".into()));
    }
    let mut avail: Vec<usize> = (0..n).collect();
    let mut tris = Vec::with_capacity(n - 2);
    let mut i = 0usize;
    let mut spins = 0usize;
    while avail.len() > 3 {
        spins += 1;
        if spins > 3 * n * n {
            return Err(Error::InvalidPolygon("triangulation stalled; ring is not simple".into()));
        }
        let m = avail.len();
        let (ip, ic, inx) = (avail[(i + m - 1) % m], avail[i % m], avail[(i + 1) % m]);
        let (p, c, nx) = (ring[ip], ring[ic], ring[inx]);
        if orient(p, c, nx) > 0.0 {
            let blocked = avail.iter().any(|&k| {
                k != ip && k != ic && k != inx && point_in_triangle_strict(ring[k], p, c, nx)
            });
            if !blocked {
                tris.push([ip, ic, inx]);
                avail.remove(i % m);
                i = 0;
                continue;
            }
        }
        i += 1;
    }
    tris.push([avail[0], avail[1], avail[2]]);
    Ok(tris)
}

fn point_in_triangle_strict(p: Point2, a: Point2, b: Point2, c: Point2) -> bool {
    orient(a, b, p) > 0.0 && orient(b, c, p) > 0.0 && orient(c, a, p) > 0.0
}

/// Ring cleanup shared by every ingest path: drops consecutive near-duplicate
/// vertices and exactly-collinear middles, then normalizes to CCW.
pub struct NormalizedRing {
    pub ring: Vec<Point2>,
    pub reversed: bool,
    pub dropped: usize,
}

pub fn normalize_ring(mut ring: Vec<Point2>) -> NormalizedRing {
    let before = ring.len();
    // consecutive duplicates (including a repeated closing vertex)
    let mut out: Vec<Point2> = Vec::with_capacity(ring.len());
    for p in ring.drain(..) {
        if out.last().is_none_or(|q| q.dist(p) > EPS_GEOM) {
            out.push(p);
        }
    }
    while out.len() >= 2 && out[0].dist(*out.last().unwrap()) <= EPS_GEOM {
        out.pop();
    }
    // exactly-collinear middles would yield zero-area cap triangles downstream
    loop {
        let n = out.len();
        if n < 3 {
            break;
        }
        let Some(k) = (0..n).find(|&k| {
            orient(out[(k + n - 1) % n], out[k], out[(k + 1) % n]) == 0.0
        }) else {
            break;
        };
        out.remove(k);
    }
    let mut reversed = false;
    if out.len() >= 3 && signed_area(&out) < 0.0 {
        out.reverse();
        reversed = true;
    }
    NormalizedRing { dropped: before - out.len(), ring: out, reversed }
}

fn validate_unit(unit: &UnitRegion, out: &mut Vec<Diagnostic>) -> bool {
    let id = Some(unit.id);
    let ring = &unit.polygon;
    if ring.len() < 3 {
        out.push(diag(id, DiagnosticKind::TooFewVertices, format!("{} vertices, need at least 3", ring.len())));
        return false;
    }
    if let Some((k, p)) = ring.iter().enumerate().find(|(_, p)| !p.is_finite()) {
        out.push(diag(id, DiagnosticKind::NonFinite, format!("vertex {k} is non-finite ({}, {})", p.u, p.v)));
        return false;
    }
    let mut clean = true;
    let n = ring.len();
    for i in 0..n {
        if ring[i].dist(ring[(i + 1) % n]) <= EPS_GEOM {
            out.push(diag(id, DiagnosticKind::ShortEdge, format!("edge {i} is shorter than {EPS_GEOM} m")));
            clean = false;
        }
    }
    if !clean {
        return false;
    }
    if let Err(msg) = ring_is_simple(ring) {
        out.push(diag(id, DiagnosticKind::SelfIntersection, msg));
        return false;
    }
    let area = signed_area(ring);
    if area.abs() <= EPS_GEOM {
        out.push(diag(id, DiagnosticKind::ZeroArea, "polygon area is zero".into()));
        return false;
    }
    if area < 0.0 {
        out.push(diag(id, DiagnosticKind::Clockwise, "ring is clockwise (will be reversed)".into()));
    }
    for i in 0..n {
        if orient(ring[(i + n - 1) % n], ring[i], ring[(i + 1) % n]) == 0.0 {
            out.push(diag(id, DiagnosticKind::CollinearVertex, format!("vertex {i} is collinear (will be dropped)")));
        }
    }
    if let Some((lo, hi)) = unit.sweep_interval {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            out.push(diag(id, DiagnosticKind::InvalidInterval, format!("sweep interval [{lo}, {hi}] is not an increasing finite pair")));
            return false;
        }
    }
    true
}

/// A point strictly inside a valid simple CCW ring (centroid of the first ear).
fn interior_point(ring: &[Point2]) -> Option<Point2> {
    let tris = triangulate(ring).ok()?;
    let [a, b, c] = tris[0];
    Some(Point2::new(
        (ring[a].u + ring[b].u + ring[c].u) / 3.0,
        (ring[a].v + ring[b].v + ring[c].v) / 3.0,
    ))
}

/// Check every unit and every unit pair. Returns an empty list for a valid
/// subdivision; findings marked `auto_fixable` do not block a build.
///
/// Units may share boundary edges (a subdivision is a tiling, not a set of
/// disjoint blobs); only interior overlap is flagged.
pub fn validate_subdivision(s: &PlanarSubdivision) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if s.units.is_empty() {
        out.push(diag(None, DiagnosticKind::EmptySubdivision, "subdivision has no units".into()));
        return out;
    }
    let mut seen = std::collections::BTreeMap::new();
    for unit in &s.units {
        if let Some(prev) = seen.insert(unit.id, &unit.name) {
            out.push(diag(Some(unit.id), DiagnosticKind::DuplicateId, format!("id also used by '{prev}'")));
        }
    }
    let mut locally_valid = Vec::new();
    for unit in &s.units {
        if validate_unit(unit, &mut out) {
            locally_valid.push(unit);
        }
    }
    for (ai, a) in locally_valid.iter().enumerate() {
        for b in locally_valid.iter().skip(ai + 1) {
            if units_overlap(a, b) {
                out.push(diag(
                    Some(a.id),
                    DiagnosticKind::InteriorOverlap,
                    format!("interior overlaps unit {} ('{}')", b.id, b.name),
                ));
            }
        }
    }
    out
}

fn units_overlap(a: &UnitRegion, b: &UnitRegion) -> bool {
    let (ra, rb) = (&a.polygon, &b.polygon);
    let na = ra.len();
    let nb = rb.len();
    for i in 0..na {
        for j in 0..nb {
            if segments_cross_properly(ra[i], ra[(i + 1) % na], rb[j], rb[(j + 1) % nb]) {
                return true;
            }
        }
    }
    // no proper crossings: overlap can only be containment of one in the other
    for (ring_a, ring_b) in [(ra, rb), (rb, ra)] {
        if let Some(p) = interior_point(ring_a) {
            if point_in_polygon(p, ring_b) == Containment::Inside {
                return true;
            }
        }
    }
    false
}

/// Model height in metres: visible height `max_alt - terrain_alt` plus the
/// below-terrain padding.
pub fn derive_height(max_alt: f64, terrain_alt: f64, underground_pad: f64) -> Result<f64> {
    for v in [max_alt, terrain_alt, underground_pad] {
        if !v.is_finite() {
            return Err(Error::InvalidCoordinate(format!("non-finite altitude argument {v}")));
        }
    }
    if max_alt <= terrain_alt {
        return Err(Error::InvertedInterval { lo: terrain_alt, hi: max_alt });
    }
    if underground_pad < 0.0 {
        return Err(Error::InvalidCoordinate(format!(
            "underground padding must be non-negative, got {underground_pad}"
        )));
    }
    Ok((max_alt - terrain_alt) + underground_pad)
}

fn extent<I: Iterator<Item = f64>>(values: I) -> Option<(f64, f64)> {
    values.fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

/// Model extents from the two views: length spans the union of both views'
/// x ranges, width comes from the plan's y range, height from the profile's
/// z range.
pub fn bounding_box(plan: &PlanarSubdivision, profile: &PlanarSubdivision) -> Result<BoundingBox> {
    if plan.plane != Plane::PlanXY || profile.plane != Plane::ProfileXZ {
        return Err(Error::PlaneMismatch(
            "bounding box needs a PlanXY subdivision and a ProfileXZ subdivision".into(),
        ));
    }
    let xs = plan
        .units
        .iter()
        .chain(&profile.units)
        .flat_map(|u| u.polygon.iter().map(|p| p.u));
    let ys = plan.units.iter().flat_map(|u| u.polygon.iter().map(|p| p.v));
    let zs = profile.units.iter().flat_map(|u| u.polygon.iter().map(|p| p.v));
    let (x, y, z) = (extent(xs), extent(ys), extent(zs));
    match (x, y, z) {
        (Some(x), Some(y), Some(z)) => Ok(BoundingBox {
            length: x.1 - x.0,
            width: y.1 - y.0,
            height: z.1 - z.0,
        }),
        _ => Err(Error::InvalidPolygon("bounding box of an empty subdivision".into())),
    }
}
