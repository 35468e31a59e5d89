//! Triangle meshes and the checks the rest of the pipeline leans on:
//! watertightness, signed volume, point containment, OBJ export.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::ops::{Add, Mul, Sub};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{Containment, EPS_GEOM};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn dot(self, o: Point3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Point3) -> Point3 {
        Point3 {
            x: self.y * o.z - self.z * o.y,
            y: self.z * o.x - self.x * o.z,
            z: self.x * o.y - self.y * o.x,
        }
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dist(self, o: Point3) -> f64 {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Indexed triangle mesh. Triangles are wound counter-clockwise seen from
/// outside, so face normals point outward and the signed volume is positive.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct TriMesh {
    pub vertices: Vec<Point3>,
    pub triangles: Vec<[usize; 3]>,
    /// (rock-mass id, layer id) for intersection cells; `None` for raw prisms.
    pub tag: Option<(u32, u32)>,
}

impl TriMesh {
    pub fn new() -> Self {
        TriMesh::default()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Flip every triangle's winding in place.
    pub fn flip(&mut self) {
        for t in &mut self.triangles {
            t.swap(1, 2);
        }
    }

    fn tri_points(&self, t: [usize; 3]) -> (Point3, Point3, Point3) {
        (self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]])
    }
}

/// Outcome of the edge-pairing check. `watertight` is true iff every
/// undirected edge is used by exactly two triangles in opposite directions.
#[derive(Clone, Debug, Default)]
pub struct WatertightReport {
    pub watertight: bool,
    /// Edges used by exactly one triangle.
    pub boundary_edges: Vec<(usize, usize)>,
    /// Edges used by more than two triangles.
    pub nonmanifold_edges: Vec<(usize, usize)>,
    /// Edges used twice but with the same direction (inconsistent winding).
    pub misoriented_edges: Vec<(usize, usize)>,
}

pub fn is_watertight(mesh: &TriMesh) -> WatertightReport {
    // forward/backward use counts per undirected edge
    let mut edges: HashMap<(usize, usize), (u32, u32)> = HashMap::new();
    for t in &mesh.triangles {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            assert!(a < mesh.vertices.len() && b < mesh.vertices.len(), "triangle index out of range");
            let (key, fwd) = if a < b { ((a, b), true) } else { ((b, a), false) };
            let e = edges.entry(key).or_insert((0, 0));
            if fwd {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
        }
    }
    let mut report = WatertightReport { watertight: true, ..Default::default() };
    for (edge, (f, b)) in edges {
        match (f, b) {
            (1, 1) => {}
            (1, 0) | (0, 1) => report.boundary_edges.push(edge),
            (2, 0) | (0, 2) => report.misoriented_edges.push(edge),
            _ => report.nonmanifold_edges.push(edge),
        }
    }
    report.boundary_edges.sort_unstable();
    report.nonmanifold_edges.sort_unstable();
    report.misoriented_edges.sort_unstable();
    report.watertight = report.boundary_edges.is_empty()
        && report.nonmanifold_edges.is_empty()
        && report.misoriented_edges.is_empty();
    report
}

fn open_mesh_error(report: &WatertightReport) -> Error {
    Error::OpenMesh(format!(
        "{} boundary, {} non-manifold, {} misoriented edges",
        report.boundary_edges.len(),
        report.nonmanifold_edges.len(),
        report.misoriented_edges.len()
    ))
}

/// Signed volume by the divergence theorem: one sixth of the sum of
/// `v0 . (v1 x v2)` over all triangles. Positive for outward winding,
/// negative for an inside-out mesh. Errors if the mesh is not watertight.
///
/// Summing tetrahedra against the origin is translation-invariant only for
/// closed meshes, which is exactly what the watertight precondition buys.
pub fn mesh_volume(mesh: &TriMesh) -> Result<f64> {
    let report = is_watertight(mesh);
    if !report.watertight {
        return Err(open_mesh_error(&report));
    }
    let mut six_v = 0.0;
    for &t in &mesh.triangles {
        let (a, b, c) = mesh.tri_points(t);
        six_v += a.dot(b.cross(c));
    }
    Ok(six_v / 6.0)
}

/// Distance from `p` to the closest point of triangle `(a, b, c)`.
pub fn point_triangle_distance(p: Point3, a: Point3, b: Point3, c: Point3) -> f64 {
    // Ericson, Real-Time Collision Detection: closest point via barycentric regions.
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return p.dist(a);
    }
    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= 0.0 && d4 <= d3 {
        return p.dist(b);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let t = d1 / (d1 - d3);
        return p.dist(a + ab * t);
    }
    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= 0.0 && d5 <= d6 {
        return p.dist(c);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let t = d2 / (d2 - d6);
        return p.dist(a + ac * t);
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return p.dist(b + (c - b) * t);
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    p.dist(a + ab * v + ac * w)
}

/// Distance from `p` to the mesh surface (minimum over all triangles).
pub fn point_surface_distance(mesh: &TriMesh, p: Point3) -> f64 {
    mesh.triangles
        .iter()
        .map(|&t| {
            let (a, b, c) = mesh.tri_points(t);
            point_triangle_distance(p, a, b, c)
        })
        .fold(f64::INFINITY, f64::min)
}

enum RayHit {
    Miss,
    Hit,
    /// Grazing contact (edge/vertex/near-parallel); the whole cast must be
    /// retried with a different direction.
    Degenerate,
}

fn ray_triangle(orig: Point3, dir: Point3, a: Point3, b: Point3, c: Point3) -> RayHit {
    // Moller-Trumbore with paranoid margins: anything near an edge or the
    // plane of the ray is reported as degenerate rather than guessed.
    let e1 = b - a;
    let e2 = c - a;
    let pvec = dir.cross(e2);
    let det = e1.dot(pvec);
    let scale = e1.norm() * e2.norm();
    if det.abs() <= 1e-12 * scale.max(1e-300) {
        return RayHit::Degenerate;
    }
    let inv = 1.0 / det;
    let tvec = orig - a;
    let u = tvec.dot(pvec) * inv;
    let qvec = tvec.cross(e1);
    let v = dir.dot(qvec) * inv;
    let t = e2.dot(qvec) * inv;
    let eps = 1e-10;
    if u < -eps || v < -eps || u + v > 1.0 + eps {
        return RayHit::Miss;
    }
    if u < eps || v < eps || u + v > 1.0 - eps {
        return RayHit::Degenerate;
    }
    if t <= 0.0 {
        return RayHit::Miss;
    }
    if t < eps {
        return RayHit::Degenerate;
    }
    RayHit::Hit
}

/// Classify a point against a watertight mesh by ray-crossing parity.
///
/// Points within [`EPS_GEOM`] of the surface are `OnBoundary`. The ray
/// direction is pseudo-random from a fixed seed; grazing hits retry with the
/// next direction, so the result is deterministic for given inputs.
pub fn point_in_mesh(mesh: &TriMesh, p: Point3) -> Result<Containment> {
    point_in_mesh_seeded(mesh, p, 0)
}

/// [`point_in_mesh`] with an explicit direction seed; any seed must produce
/// the same classification, which the property tests lean on.
pub fn point_in_mesh_seeded(mesh: &TriMesh, p: Point3, seed: u64) -> Result<Containment> {
    let report = is_watertight(mesh);
    if !report.watertight {
        return Err(open_mesh_error(&report));
    }
    if mesh.is_empty() {
        return Ok(Containment::Outside);
    }
    if point_surface_distance(mesh, p) <= EPS_GEOM {
        return Ok(Containment::OnBoundary);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    'retry: for _ in 0..64 {
        let dir = loop {
            let d = Point3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let n = d.norm();
            if n > 0.1 {
                break d * (1.0 / n);
            }
        };
        let mut crossings = 0u64;
        for &t in &mesh.triangles {
            let (a, b, c) = mesh.tri_points(t);
            match ray_triangle(p, dir, a, b, c) {
                RayHit::Miss => {}
                RayHit::Hit => crossings += 1,
                RayHit::Degenerate => continue 'retry,
            }
        }
        return Ok(if crossings % 2 == 1 { Containment::Inside } else { Containment::Outside });
    }
    Err(Error::ResourceLimit(
        "no non-degenerate ray direction found in 64 attempts".into(),
    ))
}

/// Serialize meshes as Wavefront OBJ: one `o` object per mesh, vertices in
/// metres with 9 decimals (round-trips to 1e-9 m), 1-indexed faces, LF line
/// ends, ASCII only.
pub fn export_obj(meshes: &[TriMesh]) -> String {
    let mut out = String::new();
    let mut base = 1usize;
    for (k, mesh) in meshes.iter().enumerate() {
        match mesh.tag {
            Some((mass, layer)) => {
                let _ = writeln!(out, "o mass{mass}_layer{layer}");
            }
            None => {
                let _ = writeln!(out, "o mesh{k}");
            }
        }
        for v in &mesh.vertices {
            let _ = writeln!(out, "v {:.9} {:.9} {:.9}", v.x, v.y, v.z);
        }
        for t in &mesh.triangles {
            let _ = writeln!(out, "f {} {} {}", base + t[0], base + t[1], base + t[2]);
        }
        base += mesh.vertices.len();
    }
    out
}

/// Incremental mesh assembly with exact-coordinate vertex welding, so faces
/// built from the same numeric values share vertices bit-for-bit.
#[derive(Default)]
pub struct MeshBuilder {
    index: HashMap<[u64; 3], usize>,
    mesh: TriMesh,
}

fn weld_key(p: Point3) -> [u64; 3] {
    // collapse -0.0 onto 0.0 so both spell the same vertex
    let norm = |v: f64| if v == 0.0 { 0.0f64 } else { v };
    [norm(p.x).to_bits(), norm(p.y).to_bits(), norm(p.z).to_bits()]
}

impl MeshBuilder {
    pub fn new() -> Self {
        MeshBuilder::default()
    }

    pub fn vertex(&mut self, p: Point3) -> usize {
        debug_assert!(p.is_finite());
        *self.index.entry(weld_key(p)).or_insert_with(|| {
            self.mesh.vertices.push(p);
            self.mesh.vertices.len() - 1
        })
    }

    /// Add a triangle, dropping it if two corners weld to the same vertex or
    /// the corners are collinear (zero area contributes nothing).
    pub fn triangle(&mut self, a: Point3, b: Point3, c: Point3) {
        let (ia, ib, ic) = (self.vertex(a), self.vertex(b), self.vertex(c));
        if ia == ib || ib == ic || ia == ic {
            return;
        }
        if (b - a).cross(c - a).norm() <= EPS_GEOM * EPS_GEOM {
            return;
        }
        self.mesh.triangles.push([ia, ib, ic]);
    }

    pub fn finish(self, tag: Option<(u32, u32)>) -> TriMesh {
        let mut mesh = self.mesh;
        mesh.tag = tag;
        mesh
    }
}
