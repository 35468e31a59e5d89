//! Prisms from planar regions, and the crossed-view intersection that turns a
//! plan subdivision and a profile subdivision into watertight cell meshes.
//!
//! The two views share the x axis, so a plan prism (footprint swept along +z)
//! and a profile prism (elevation band swept along +y) intersect in a shape
//! that is simple to sweep: cut space at every x where either outline has a
//! vertex, and between consecutive cuts both outlines are single line
//! segments. Each slab cross-section is then a product of y intervals and
//! z intervals, which meshes as a box with two axis-aligned ends and four
//! ruled but planar sides (a boundary edge `v = p + q*x` swept across the
//! slab stays in one plane). Coincident end rectangles of neighbouring slabs
//! are cancelled rather than emitted, which keeps interior walls out of the
//! mesh and watertightness exact.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::LocalFrame;
use crate::mesh::{is_watertight, mesh_volume, point_in_mesh_seeded, MeshBuilder, Point3, TriMesh};
use crate::wireframe::{
    bounding_box, normalize_ring, point_in_polygon_eps, polygon_area, signed_area, triangulate,
    validate_subdivision, BoundingBox, PlanarSubdivision, Plane, Point2, UnitRegion,
};
use crate::{Containment, EPS_GEOM};

/// A planar region swept along the axis missing from its plane: +z for plan
/// regions, +y for profile regions. The base ring is normalized to CCW on
/// construction.
#[derive(Clone, Debug)]
pub struct ExtrudedSolid {
    pub base: UnitRegion,
    pub plane: Plane,
    /// Sweep range in metres along the extrusion axis.
    pub interval: (f64, f64),
}

impl ExtrudedSolid {
    /// Wrap a unit region as a solid. The unit's own `sweep_interval` wins
    /// over `default_interval` when present.
    pub fn new(base: UnitRegion, plane: Plane, default_interval: (f64, f64)) -> Result<Self> {
        let interval = base.sweep_interval.unwrap_or(default_interval);
        check_interval(interval)?;
        let norm = normalize_ring(base.polygon);
        polygon_area(&norm.ring)?;
        Ok(ExtrudedSolid {
            base: UnitRegion { polygon: norm.ring, ..base },
            plane,
            interval,
        })
    }

    fn to_world(&self, u: f64, v: f64, w: f64) -> Point3 {
        match self.plane {
            Plane::PlanXY => Point3::new(u, v, w),
            Plane::ProfileXZ => Point3::new(u, w, v),
        }
    }

    fn sweep_coords(&self, p: Point3) -> (f64, f64, f64) {
        match self.plane {
            Plane::PlanXY => (p.x, p.y, p.z),
            Plane::ProfileXZ => (p.x, p.z, p.y),
        }
    }

    /// Watertight prism mesh: triangulated caps at both ends of the sweep,
    /// one side quad per base edge.
    pub fn mesh(&self) -> Result<TriMesh> {
        let ring = &self.base.polygon;
        let caps = triangulate(ring)?;
        let (lo, hi) = self.interval;
        // the profile mapping (u, v, w) -> (u, w, v) mirrors space, so its
        // windings must flip to keep normals outward
        let flip = self.plane == Plane::ProfileXZ;
        let mut b = MeshBuilder::new();
        let mut tri = |p: Point3, q: Point3, r: Point3| {
            if flip {
                b.triangle(p, r, q);
            } else {
                b.triangle(p, q, r);
            }
        };
        for &[i, j, k] in &caps {
            let (pi, pj, pk) = (ring[i], ring[j], ring[k]);
            tri(self.to_world(pi.u, pi.v, lo), self.to_world(pk.u, pk.v, lo), self.to_world(pj.u, pj.v, lo));
            tri(self.to_world(pi.u, pi.v, hi), self.to_world(pj.u, pj.v, hi), self.to_world(pk.u, pk.v, hi));
        }
        let n = ring.len();
        for i in 0..n {
            let (a, c) = (ring[i], ring[(i + 1) % n]);
            // outward for a CCW base ring swept along +w
            let quad = [
                self.to_world(a.u, a.v, lo),
                self.to_world(c.u, c.v, lo),
                self.to_world(c.u, c.v, hi),
                self.to_world(a.u, a.v, hi),
            ];
            tri(quad[0], quad[1], quad[2]);
            tri(quad[0], quad[2], quad[3]);
        }
        Ok(b.finish(None))
    }

    /// Classify a world-space point against the solid with the default
    /// [`EPS_GEOM`] boundary band.
    pub fn membership(&self, p: Point3) -> Containment {
        self.membership_with_tolerance(p, EPS_GEOM)
    }

    /// Classify with an explicit boundary band in metres. This is analytic
    /// (interval test plus polygon test), independent of any mesh.
    pub fn membership_with_tolerance(&self, p: Point3, eps: f64) -> Containment {
        let (u, v, w) = self.sweep_coords(p);
        let (lo, hi) = self.interval;
        if w < lo - eps || w > hi + eps {
            return Containment::Outside;
        }
        let pip = point_in_polygon_eps(Point2::new(u, v), &self.base.polygon, eps);
        if pip == Containment::Outside {
            return Containment::Outside;
        }
        if (w - lo).abs() <= eps || (w - hi).abs() <= eps {
            return Containment::OnBoundary;
        }
        pip
    }
}

fn check_interval(interval: (f64, f64)) -> Result<()> {
    let (lo, hi) = interval;
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidCoordinate(format!("non-finite sweep interval [{lo}, {hi}]")));
    }
    if lo >= hi {
        return Err(Error::InvertedInterval { lo, hi });
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    In,
    On,
    Out,
}

fn line_crossing(a: Point2, b: Point2, c: f64) -> Point2 {
    let t = (c - a.v) / (b.v - a.v);
    Point2::new(a.u + t * (b.u - a.u), c)
}

/// Split a simple CCW ring by the horizontal line `v = c`, keeping one side.
/// Returns disjoint simple CCW pieces; kept vertices within [`EPS_GEOM`] of
/// the line are snapped exactly onto it.
fn clip_ring_halfplane(ring: &[Point2], c: f64, keep_above: bool) -> Result<Vec<Vec<Point2>>> {
    let snapped: Vec<Point2> = ring
        .iter()
        .map(|p| if (p.v - c).abs() <= EPS_GEOM { Point2::new(p.u, c) } else { *p })
        .collect();
    let side = |p: Point2| {
        if p.v == c {
            Side::On
        } else if (p.v > c) == keep_above {
            Side::In
        } else {
            Side::Out
        }
    };
    let n = snapped.len();
    let Some(start) = (0..n).find(|&i| side(snapped[i]) == Side::Out) else {
        if snapped.iter().all(|p| p.v == c) {
            return Ok(vec![]);
        }
        return Ok(vec![snapped]);
    };

    // collect maximal kept chains; every chain starts and ends exactly on the line
    let mut chains: Vec<Vec<Point2>> = Vec::new();
    let mut cur: Option<Vec<Point2>> = None;
    for k in 0..n {
        let a = snapped[(start + k) % n];
        let b = snapped[(start + k + 1) % n];
        match (side(a), side(b)) {
            (Side::Out, Side::Out) => {}
            (Side::Out, sb) => {
                let entry = if sb == Side::On { b } else { line_crossing(a, b, c) };
                let mut ch = vec![entry];
                if sb == Side::In {
                    ch.push(b);
                }
                cur = Some(ch);
            }
            (sa, Side::Out) => {
                let mut ch = cur.take().expect("kept chain must be open here");
                let exit = if sa == Side::On { a } else { line_crossing(a, b, c) };
                if ch.last() != Some(&exit) {
                    ch.push(exit);
                }
                chains.push(ch);
            }
            _ => {
                if let Some(ch) = &mut cur {
                    ch.push(b);
                }
            }
        }
    }
    debug_assert!(cur.is_none());
    // grazing contacts that never leave the line enclose nothing
    chains.retain(|ch| ch.iter().any(|p| p.v != c));
    if chains.is_empty() {
        return Ok(vec![]);
    }

    // Stitch chains along the line. With the interior on the kept side of a
    // CCW ring, on-line boundary runs toward +u when keeping above and -u
    // when keeping below, so sorted endpoints alternate exit, entry, ...
    // and each exit bridges to the entry right after it.
    struct End {
        u: f64,
        chain: usize,
        is_entry: bool,
    }
    let mut ends: Vec<End> = chains
        .iter()
        .enumerate()
        .flat_map(|(i, ch)| {
            [
                End { u: ch[0].u, chain: i, is_entry: true },
                End { u: ch.last().unwrap().u, chain: i, is_entry: false },
            ]
        })
        .collect();
    ends.sort_by(|l, r| {
        let ord = l.u.total_cmp(&r.u);
        let ord = if keep_above { ord } else { ord.reverse() };
        // a pinch puts an exit and an entry at one u; bridge them immediately
        ord.then_with(|| l.is_entry.cmp(&r.is_entry))
    });
    let mut next_chain = vec![usize::MAX; chains.len()];
    for pair in ends.chunks(2) {
        match pair {
            [exit, entry] if !exit.is_entry && entry.is_entry => {
                next_chain[exit.chain] = entry.chain;
            }
            _ => {
                return Err(Error::InvalidPolygon(
                    "clip stitching failed; ring is not simple".into(),
                ))
            }
        }
    }

    let mut visited = vec![false; chains.len()];
    let mut pieces = Vec::new();
    for s in 0..chains.len() {
        if visited[s] {
            continue;
        }
        let mut ring_out: Vec<Point2> = Vec::new();
        let mut i = s;
        loop {
            visited[i] = true;
            ring_out.extend(chains[i].iter().copied());
            i = next_chain[i];
            if i == s {
                break;
            }
        }
        // junction points can coincide exactly at a pinch
        ring_out.dedup_by(|b, a| a.dist(*b) <= EPS_GEOM);
        while ring_out.len() >= 2 && ring_out[0].dist(*ring_out.last().unwrap()) <= EPS_GEOM {
            ring_out.pop();
        }
        for mut piece in split_pinched(ring_out) {
            if piece.len() < 3 || signed_area(&piece).abs() <= EPS_GEOM {
                continue;
            }
            if signed_area(&piece) < 0.0 {
                debug_assert!(false, "clip produced a clockwise piece");
                piece.reverse();
            }
            pieces.push(piece);
        }
    }
    Ok(pieces)
}

/// A ring that revisits a vertex encloses two loops joined at a point; split
/// them apart so every output ring is simple.
fn split_pinched(ring: Vec<Point2>) -> Vec<Vec<Point2>> {
    let n = ring.len();
    for i in 0..n {
        for j in (i + 1)..n {
            if ring[i].u == ring[j].u && ring[i].v == ring[j].v {
                let first: Vec<Point2> = ring[i..j].to_vec();
                let mut second: Vec<Point2> = ring[j..].to_vec();
                second.extend_from_slice(&ring[..i]);
                let mut out = split_pinched(first);
                out.extend(split_pinched(second));
                return out;
            }
        }
    }
    vec![ring]
}

/// Intersect a simple ring with the band `lo <= v <= hi`. The result is a
/// set of disjoint simple CCW pieces (possibly empty).
pub fn clip_ring_strip(ring: &[Point2], lo: f64, hi: f64) -> Result<Vec<Vec<Point2>>> {
    check_interval((lo, hi))?;
    if hi - lo <= 2.0 * EPS_GEOM {
        return Ok(vec![]);
    }
    let mut out = Vec::new();
    for piece in clip_ring_halfplane(ring, lo, true)? {
        out.extend(clip_ring_halfplane(&piece, hi, false)?);
    }
    Ok(out)
}

/// Clip every unit of a subdivision to the band `lo <= v <= hi`. Units that
/// fall entirely outside are dropped with a warning; a unit that would split
/// into several pieces is an error, since one region cannot keep one identity
/// across a split.
pub fn clip_subdivision_to_strip(
    s: &PlanarSubdivision,
    lo: f64,
    hi: f64,
) -> Result<(PlanarSubdivision, Vec<String>)> {
    let mut warnings = Vec::new();
    let mut units = Vec::new();
    for unit in &s.units {
        let norm = normalize_ring(unit.polygon.clone());
        let mut pieces = clip_ring_strip(&norm.ring, lo, hi)?;
        match pieces.len() {
            0 => warnings.push(format!(
                "unit {} ('{}') lies outside [{lo}, {hi}] and was dropped",
                unit.id, unit.name
            )),
            1 => units.push(UnitRegion { polygon: pieces.pop().unwrap(), ..unit.clone() }),
            k => {
                return Err(Error::InvalidPolygon(format!(
                    "unit {} ('{}') splits into {k} pieces when clipped to [{lo}, {hi}]; \
                     split it into separate units first",
                    unit.id, unit.name
                )))
            }
        }
    }
    Ok((PlanarSubdivision { plane: s.plane, units }, warnings))
}

/// A non-vertical outline edge ordered by u, evaluated along the sweep.
#[derive(Clone, Copy)]
struct SpanEdge {
    p: Point2,
    q: Point2,
}

impl SpanEdge {
    /// v at the given x. Endpoints snap exactly so neighbouring slabs agree
    /// bit-for-bit at shared cut planes.
    fn eval(&self, x: f64) -> f64 {
        if (x - self.p.u).abs() <= EPS_GEOM {
            return self.p.v;
        }
        if (x - self.q.u).abs() <= EPS_GEOM {
            return self.q.v;
        }
        self.p.v + (x - self.p.u) * (self.q.v - self.p.v) / (self.q.u - self.p.u)
    }
}

/// The v intervals covered by a set of disjoint rings on the vertical line
/// `u = xm`, as (lower edge, upper edge) pairs sorted upward. `xm` must not
/// be a vertex abscissa (the sweep always samples slab midpoints).
fn intervals_at(pieces: &[Vec<Point2>], xm: f64) -> Result<Vec<(SpanEdge, SpanEdge)>> {
    let mut spans: Vec<(f64, SpanEdge)> = Vec::new();
    for piece in pieces {
        let n = piece.len();
        for i in 0..n {
            let (a, b) = (piece[i], piece[(i + 1) % n]);
            if a.u == b.u {
                continue;
            }
            let e = if a.u < b.u { SpanEdge { p: a, q: b } } else { SpanEdge { p: b, q: a } };
            if e.p.u <= xm && xm <= e.q.u {
                spans.push((e.eval(xm), e));
            }
        }
    }
    spans.sort_by(|l, r| l.0.total_cmp(&r.0));
    if !spans.len().is_multiple_of(2) {
        return Err(Error::InvalidPolygon(format!(
            "sweep crossed a boundary an odd number of times at x = {xm}"
        )));
    }
    Ok(spans.chunks(2).map(|c| (c[0].1, c[1].1)).collect())
}

/// An axis-aligned rectangle in a cut plane, oriented along +x or -x.
struct PlaneRect {
    y0: f64,
    y1: f64,
    z0: f64,
    z1: f64,
    sign: i8,
}

fn lex_min(q: &[Point3; 4]) -> usize {
    let key = |p: Point3| (p.x, p.y, p.z);
    (0..4).min_by(|&a, &b| key(q[a]).partial_cmp(&key(q[b])).unwrap()).unwrap()
}

/// Two triangles along the diagonal out of the lexicographically smallest
/// corner, so the same four points always split the same way.
fn split_quad(b: &mut MeshBuilder, q: &[Point3; 4]) {
    let s = lex_min(q);
    b.triangle(q[s], q[(s + 1) % 4], q[(s + 2) % 4]);
    b.triangle(q[s], q[(s + 2) % 4], q[(s + 3) % 4]);
}

/// Emit a quad wound so its normal points away from `inside`.
fn emit_quad(b: &mut MeshBuilder, mut q: [Point3; 4], inside: Point3) {
    let n = (q[1] - q[0]).cross(q[2] - q[0]) + (q[2] - q[0]).cross(q[3] - q[0]);
    let fc = (q[0] + q[1] + q[2] + q[3]) * 0.25;
    if n.dot(fc - inside) < 0.0 {
        q.reverse();
    }
    split_quad(b, &q);
}

/// One slab fragment: the product of a y interval and a z interval swept from
/// `xa` to `xb`. Side walls go straight into the mesh; the end rectangles are
/// pooled per cut plane so interior walls can cancel.
#[allow(clippy::too_many_arguments)]
fn emit_fragment(
    b: &mut MeshBuilder,
    plane_rects: &mut [Vec<PlaneRect>],
    slab: usize,
    xa: f64,
    xb: f64,
    ylo: SpanEdge,
    yhi: SpanEdge,
    zlo: SpanEdge,
    zhi: SpanEdge,
) {
    let (ya0, ya1) = (ylo.eval(xa), yhi.eval(xa));
    let (yb0, yb1) = (ylo.eval(xb), yhi.eval(xb));
    let (za0, za1) = (zlo.eval(xa), zhi.eval(xa));
    let (zb0, zb1) = (zlo.eval(xb), zhi.eval(xb));
    let center = Point3::new(
        0.5 * (xa + xb),
        0.25 * (ya0 + ya1 + yb0 + yb1),
        0.25 * (za0 + za1 + zb0 + zb1),
    );
    // four ruled side walls; each lies in the plane of its generating edge
    emit_quad(
        b,
        [
            Point3::new(xa, ya0, za0),
            Point3::new(xb, yb0, zb0),
            Point3::new(xb, yb0, zb1),
            Point3::new(xa, ya0, za1),
        ],
        center,
    );
    emit_quad(
        b,
        [
            Point3::new(xa, ya1, za0),
            Point3::new(xb, yb1, zb0),
            Point3::new(xb, yb1, zb1),
            Point3::new(xa, ya1, za1),
        ],
        center,
    );
    emit_quad(
        b,
        [
            Point3::new(xa, ya0, za0),
            Point3::new(xb, yb0, zb0),
            Point3::new(xb, yb1, zb0),
            Point3::new(xa, ya1, za0),
        ],
        center,
    );
    emit_quad(
        b,
        [
            Point3::new(xa, ya0, za1),
            Point3::new(xb, yb0, zb1),
            Point3::new(xb, yb1, zb1),
            Point3::new(xa, ya1, za1),
        ],
        center,
    );
    plane_rects[slab].push(PlaneRect { y0: ya0, y1: ya1, z0: za0, z1: za1, sign: -1 });
    plane_rects[slab + 1].push(PlaneRect { y0: yb0, y1: yb1, z0: zb0, z1: zb1, sign: 1 });
}

/// Cancel coincident end rectangles in one cut plane and mesh whatever
/// survives. Rect corners subdivide each other, so the net area is covered
/// by grid cells whose signed cover is +-1.
fn emit_plane_rects(b: &mut MeshBuilder, x: f64, rects: &[PlaneRect]) -> Result<()> {
    if rects.is_empty() {
        return Ok(());
    }
    let grid = |vals: Vec<f64>| {
        let mut g = vals;
        g.sort_by(f64::total_cmp);
        g.dedup_by(|b, a| *b == *a);
        g
    };
    let ys = grid(rects.iter().flat_map(|r| [r.y0 + 0.0, r.y1 + 0.0]).collect());
    let zs = grid(rects.iter().flat_map(|r| [r.z0 + 0.0, r.z1 + 0.0]).collect());
    let idx = |g: &[f64], v: f64| g.binary_search_by(|e| e.total_cmp(&(v + 0.0))).expect("grid value");
    let mut net: BTreeMap<(usize, usize), i32> = BTreeMap::new();
    for r in rects {
        for i in idx(&ys, r.y0)..idx(&ys, r.y1) {
            for j in idx(&zs, r.z0)..idx(&zs, r.z1) {
                *net.entry((i, j)).or_insert(0) += i32::from(r.sign);
            }
        }
    }
    for ((i, j), s) in net {
        if s == 0 {
            continue;
        }
        if s.abs() != 1 {
            return Err(Error::InvalidPolygon(
                "sweep cross-sections overlap; input rings are not disjoint".into(),
            ));
        }
        let (y0, y1, z0, z1) = (ys[i], ys[i + 1], zs[j], zs[j + 1]);
        let q = if s < 0 {
            [
                Point3::new(x, y0, z0),
                Point3::new(x, y0, z1),
                Point3::new(x, y1, z1),
                Point3::new(x, y1, z0),
            ]
        } else {
            [
                Point3::new(x, y0, z0),
                Point3::new(x, y1, z0),
                Point3::new(x, y1, z1),
                Point3::new(x, y0, z1),
            ]
        };
        split_quad(b, &q);
    }
    Ok(())
}

fn on_segment_yz(a: Point3, b: Point3, c: Point3) -> bool {
    let (eu, ev) = (b.y - a.y, b.z - a.z);
    let (cu, cv) = (c.y - a.y, c.z - a.z);
    let len2 = eu * eu + ev * ev;
    if len2 == 0.0 {
        return false;
    }
    let len = len2.sqrt();
    if (eu * cv - ev * cu).abs() > EPS_GEOM * len {
        return false;
    }
    let dot = eu * cu + ev * cv;
    dot > EPS_GEOM * len && dot < len2 - EPS_GEOM * len
}

/// Partial rectangle cancellation leaves T junctions in the cut planes:
/// a wall's edge may pass straight through a vertex of a finer neighbour.
/// Split such triangles at the offending vertex until every in-plane edge
/// ends where its neighbours end. Cut planes are the only places this can
/// happen; everywhere else neighbouring faces share whole edges by
/// construction.
fn split_plane_junctions(mesh: &mut TriMesh, planes: &[f64]) {
    for &x in planes {
        let vids: Vec<usize> =
            (0..mesh.vertices.len()).filter(|&i| mesh.vertices[i].x == x).collect();
        if vids.len() < 3 {
            continue;
        }
        let mut t = 0;
        while t < mesh.triangles.len() {
            let tri = mesh.triangles[t];
            let mut split = None;
            'edges: for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                if mesh.vertices[a].x != x || mesh.vertices[b].x != x {
                    continue;
                }
                for &c in &vids {
                    if c == tri[0] || c == tri[1] || c == tri[2] {
                        continue;
                    }
                    if on_segment_yz(mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]) {
                        split = Some((e, c));
                        break 'edges;
                    }
                }
            }
            match split {
                Some((e, c)) => {
                    let (a, b, o) = (tri[e], tri[(e + 1) % 3], tri[(e + 2) % 3]);
                    mesh.triangles[t] = [a, c, o];
                    mesh.triangles.push([c, b, o]);
                    // re-check the same slot; the shortened edge may still
                    // pass through further vertices
                }
                None => t += 1,
            }
        }
    }
}

/// Intersect a plan prism with a profile prism into one watertight mesh.
/// Returns `Ok(None)` when the solids do not overlap in any volume (disjoint
/// or touching only at faces).
///
/// The mesh is exact up to floating-point rounding: every face of the
/// intersection is planar, so no approximation is involved.
pub fn intersect_ortho(plan: &ExtrudedSolid, profile: &ExtrudedSolid) -> Result<Option<TriMesh>> {
    if plan.plane != Plane::PlanXY || profile.plane != Plane::ProfileXZ {
        return Err(Error::PlaneMismatch(
            "intersection takes a PlanXY solid and a ProfileXZ solid".into(),
        ));
    }
    // each outline only matters where the other solid's sweep reaches
    let plan_pieces = clip_ring_strip(&plan.base.polygon, profile.interval.0, profile.interval.1)?;
    let profile_pieces = clip_ring_strip(&profile.base.polygon, plan.interval.0, plan.interval.1)?;
    if plan_pieces.is_empty() || profile_pieces.is_empty() {
        return Ok(None);
    }

    // cut at every vertex abscissa of either outline
    let mut bps: Vec<f64> = plan_pieces
        .iter()
        .chain(&profile_pieces)
        .flatten()
        .map(|p| p.u + 0.0)
        .collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup_by(|b, a| *b - *a <= EPS_GEOM);

    let mut builder = MeshBuilder::new();
    let mut plane_rects: Vec<Vec<PlaneRect>> = (0..bps.len()).map(|_| Vec::new()).collect();
    for s in 0..bps.len().saturating_sub(1) {
        let (xa, xb) = (bps[s], bps[s + 1]);
        let xm = 0.5 * (xa + xb);
        let yints = intervals_at(&plan_pieces, xm)?;
        if yints.is_empty() {
            continue;
        }
        let zints = intervals_at(&profile_pieces, xm)?;
        for &(ylo, yhi) in &yints {
            for &(zlo, zhi) in &zints {
                emit_fragment(&mut builder, &mut plane_rects, s, xa, xb, ylo, yhi, zlo, zhi);
            }
        }
    }
    for (k, rects) in plane_rects.iter().enumerate() {
        emit_plane_rects(&mut builder, bps[k], rects)?;
    }
    let mut mesh = builder.finish(Some((plan.base.id, profile.base.id)));
    if mesh.is_empty() {
        return Ok(None);
    }
    split_plane_junctions(&mut mesh, &bps);
    let report = is_watertight(&mesh);
    if !report.watertight {
        return Err(Error::OpenMesh(format!(
            "intersection of units {} and {}: {} boundary, {} non-manifold, {} misoriented edges",
            plan.base.id,
            profile.base.id,
            report.boundary_edges.len(),
            report.nonmanifold_edges.len(),
            report.misoriented_edges.len()
        )));
    }
    Ok(Some(mesh))
}

enum ColumnHit {
    Miss,
    Clear(f64),
    Grazing,
}

fn orient_xy(a: Point3, b: Point3, px: f64, py: f64) -> f64 {
    (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x)
}

/// Where a vertical line through (cx, cy) pierces the triangle: the z of a
/// clear interior crossing, a grazing verdict near edges or for near-vertical
/// triangles, or a miss.
fn column_hit(cx: f64, cy: f64, a: Point3, b: Point3, c: Point3) -> ColumnHit {
    let d1 = orient_xy(a, b, cx, cy);
    let d2 = orient_xy(b, c, cx, cy);
    let d3 = orient_xy(c, a, cx, cy);
    let area = d1 + d2 + d3;
    if area == 0.0 {
        // the triangle is vertical; the column can only graze it
        let p = Point2::new(cx, cy);
        let near = crate::wireframe::point_segment_distance(p, Point2::new(a.x, a.y), Point2::new(b.x, b.y))
            <= EPS_GEOM
            || crate::wireframe::point_segment_distance(p, Point2::new(b.x, b.y), Point2::new(c.x, c.y))
                <= EPS_GEOM
            || crate::wireframe::point_segment_distance(p, Point2::new(c.x, c.y), Point2::new(a.x, a.y))
                <= EPS_GEOM;
        return if near { ColumnHit::Grazing } else { ColumnHit::Miss };
    }
    let margin = 1e-9 * area.abs();
    let (s1, s2, s3) = if area > 0.0 { (d1, d2, d3) } else { (-d1, -d2, -d3) };
    if s1 > margin && s2 > margin && s3 > margin {
        let n = (b - a).cross(c - a);
        ColumnHit::Clear(a.z - (n.x * (cx - a.x) + n.y * (cy - a.y)) / n.z)
    } else if s1 >= -margin && s2 >= -margin && s3 >= -margin {
        ColumnHit::Grazing
    } else {
        ColumnHit::Miss
    }
}

fn column_crossings(mesh: &TriMesh, cx: f64, cy: f64) -> Option<Vec<f64>> {
    let mut zs = Vec::new();
    for &t in &mesh.triangles {
        let (a, b, c) =
            (mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
        match column_hit(cx, cy, a, b, c) {
            ColumnHit::Miss => {}
            ColumnHit::Clear(z) => zs.push(z),
            ColumnHit::Grazing => return None,
        }
    }
    zs.sort_by(f64::total_cmp);
    Some(zs)
}

/// Monte-Carlo-free volume check: sample the mesh on a regular grid of cubes
/// with edge `resolution` and count centres that land inside. Centres within
/// [`EPS_GEOM`] of a surface crossing are left out. Refuses grids beyond
/// 100 million cells.
///
/// This deliberately shares no code with [`mesh_volume`]; the two are checked
/// against each other in the tests.
pub fn voxel_volume(mesh: &TriMesh, resolution: f64) -> Result<f64> {
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(Error::InvalidCoordinate(format!(
            "voxel resolution must be a positive length, got {resolution}"
        )));
    }
    let report = is_watertight(mesh);
    if !report.watertight {
        return Err(Error::OpenMesh(format!(
            "{} boundary, {} non-manifold, {} misoriented edges",
            report.boundary_edges.len(),
            report.nonmanifold_edges.len(),
            report.misoriented_edges.len()
        )));
    }
    if mesh.is_empty() {
        return Ok(0.0);
    }
    let mut lo = mesh.vertices[0];
    let mut hi = mesh.vertices[0];
    for v in &mesh.vertices {
        lo = Point3::new(lo.x.min(v.x), lo.y.min(v.y), lo.z.min(v.z));
        hi = Point3::new(hi.x.max(v.x), hi.y.max(v.y), hi.z.max(v.z));
    }
    let steps = |a: f64, b: f64| (((b - a) / resolution).ceil() as u64).max(1);
    let (nx, ny, nz) = (steps(lo.x, hi.x), steps(lo.y, hi.y), steps(lo.z, hi.z));
    let total = nx as u128 * ny as u128 * nz as u128;
    const MAX_CELLS: u128 = 100_000_000;
    if total > MAX_CELLS {
        return Err(Error::ResourceLimit(format!(
            "voxel grid of {total} cells exceeds the {MAX_CELLS} cell limit; coarsen the resolution"
        )));
    }
    let mut inside: u64 = 0;
    for i in 0..nx {
        let cx = lo.x + resolution * (i as f64 + 0.5);
        for j in 0..ny {
            let cy = lo.y + resolution * (j as f64 + 0.5);
            match column_crossings(mesh, cx, cy) {
                Some(zs) => {
                    for k in 0..nz {
                        let cz = lo.z + resolution * (k as f64 + 0.5);
                        let mut below = 0u64;
                        let mut boundary = false;
                        for &z in &zs {
                            if (z - cz).abs() <= EPS_GEOM {
                                boundary = true;
                                break;
                            }
                            if z < cz {
                                below += 1;
                            }
                        }
                        if !boundary && below % 2 == 1 {
                            inside += 1;
                        }
                    }
                }
                None => {
                    // the column grazes an edge or a vertical face; classify
                    // its centres one by one instead
                    for k in 0..nz {
                        let cz = lo.z + resolution * (k as f64 + 0.5);
                        if point_in_mesh_seeded(mesh, Point3::new(cx, cy, cz), 11)?
                            == Containment::Inside
                        {
                            inside += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(inside as f64 * resolution.powi(3))
}

/// A finished model: the local frame it lives in, its extents, and one
/// watertight mesh per (rock mass, layer) cell, sorted by tag.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeoModel {
    pub frame: LocalFrame,
    pub bounds: BoundingBox,
    pub cells: Vec<TriMesh>,
}

fn sanitize(s: &PlanarSubdivision, warnings: &mut Vec<String>) -> Result<PlanarSubdivision> {
    let blocking: Vec<_> =
        validate_subdivision(s).into_iter().filter(|d| !d.auto_fixable).collect();
    if !blocking.is_empty() {
        return Err(Error::SubdivisionInvalid { diagnostics: blocking });
    }
    let mut units = Vec::with_capacity(s.units.len());
    for u in &s.units {
        let norm = normalize_ring(u.polygon.clone());
        if norm.reversed {
            warnings.push(format!("unit {} ('{}'): reversed a clockwise ring", u.id, u.name));
        }
        if norm.dropped > 0 {
            warnings.push(format!(
                "unit {} ('{}'): dropped {} redundant vertices",
                u.id, u.name, norm.dropped
            ));
        }
        units.push(UnitRegion {
            id: u.id,
            name: u.name.clone(),
            polygon: norm.ring,
            sweep_interval: u.sweep_interval,
        });
    }
    Ok(PlanarSubdivision { plane: s.plane, units })
}

/// Cross every plan unit with every profile unit and keep the non-empty
/// intersections. `plan_interval` is the z range plan prisms sweep,
/// `profile_interval` the y range profile prisms sweep. Returns the model
/// plus human-readable warnings for everything that was repaired or skipped.
pub fn build_model(
    frame: LocalFrame,
    plan: &PlanarSubdivision,
    profile: &PlanarSubdivision,
    plan_interval: (f64, f64),
    profile_interval: (f64, f64),
) -> Result<(GeoModel, Vec<String>)> {
    if plan.plane != Plane::PlanXY || profile.plane != Plane::ProfileXZ {
        return Err(Error::PlaneMismatch(
            "build takes the plan subdivision first and the profile subdivision second".into(),
        ));
    }
    check_interval(plan_interval)?;
    check_interval(profile_interval)?;
    let mut warnings = Vec::new();
    let plan_s = sanitize(plan, &mut warnings)?;
    let profile_s = sanitize(profile, &mut warnings)?;
    let bounds = bounding_box(&plan_s, &profile_s)?;
    let profile_solids: Vec<ExtrudedSolid> = profile_s
        .units
        .iter()
        .map(|u| ExtrudedSolid::new(u.clone(), Plane::ProfileXZ, profile_interval))
        .collect::<Result<_>>()?;
    let mut cells = Vec::new();
    for pu in &plan_s.units {
        let plan_solid = ExtrudedSolid::new(pu.clone(), Plane::PlanXY, plan_interval)?;
        for profile_solid in &profile_solids {
            if let Some(mut mesh) = intersect_ortho(&plan_solid, profile_solid)? {
                let volume = mesh_volume(&mesh)?;
                if volume < 0.0 {
                    warnings.push(format!(
                        "cell ({}, {}): flipped an inside-out mesh",
                        pu.id, profile_solid.base.id
                    ));
                    mesh.flip();
                }
                cells.push(mesh);
            }
        }
    }
    cells.sort_by_key(|c| c.tag);
    if cells.is_empty() {
        warnings.push("the two views do not overlap anywhere; the model is empty".into());
    }
    Ok((GeoModel { frame, bounds, cells }, warnings))
}
