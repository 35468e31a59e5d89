//! KML ingest: traced placemark rings in, planar subdivisions out.
//!
//! The input files are whatever a tracing session produces: a KML document
//! with one placemark per region, each a closed LineString (a traced path) or
//! a Polygon. Coordinates are geodetic; projection through a [`LocalFrame`]
//! turns them into plane coordinates in metres.

mod collada;
mod writer;

pub use collada::{write_collada, Rgba, EXPORT_TIMESTAMP};
pub use writer::{write_kml_extruded, write_kml_model};

use crate::error::{Error, Result};
use crate::geo::{geodetic_to_enu, GeoPoint, LocalFrame};
use crate::wireframe::{PlanarSubdivision, Plane, Point2, UnitRegion};

/// Traced rings may fail to close exactly (a hand-placed last vertex); gaps
/// up to this many metres are treated as closure.
pub const RING_CLOSE_TOL: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KmlGeometry {
    LineString,
    Polygon,
}

/// One placemark with ring coordinates. Placemarks with other geometry
/// (points, models) are skipped by the parser.
#[derive(Clone, Debug)]
pub struct KmlPlacemark {
    pub name: String,
    pub geometry: KmlGeometry,
    pub coords: Vec<GeoPoint>,
}

fn kml_err(line: u32, message: impl Into<String>) -> Error {
    Error::KmlParse { line, message: message.into() }
}

fn placemark_err(placemark: &str, message: impl Into<String>) -> Error {
    Error::Placemark { placemark: placemark.into(), message: message.into() }
}

/// Parse a KML document and collect every placemark that carries a
/// LineString or a Polygon (outer boundary only). Folder nesting is
/// flattened in document order. Coordinates are `lon,lat[,alt]` per the KML
/// convention; a missing altitude reads as 0.
pub fn parse_kml(text: &str) -> Result<Vec<KmlPlacemark>> {
    let doc = roxmltree::Document::parse(text)
        .map_err(|e| kml_err(e.pos().row, e.to_string()))?;
    let mut out = Vec::new();
    for node in doc.descendants().filter(|n| n.has_tag_name("Placemark")) {
        let name = node
            .children()
            .find(|c| c.has_tag_name("name"))
            .and_then(|c| c.text())
            .map(|t| t.trim().to_string())
            .filter(|t| !t.is_empty())
            .unwrap_or_else(|| "unnamed".to_string());
        let (geometry, ring_holder) = if let Some(poly) =
            node.descendants().find(|c| c.has_tag_name("Polygon"))
        {
            let outer = poly
                .children()
                .find(|c| c.has_tag_name("outerBoundaryIs"))
                .ok_or_else(|| {
                    kml_err(
                        doc.text_pos_at(poly.range().start).row,
                        format!("Polygon in '{name}' has no outerBoundaryIs"),
                    )
                })?;
            (KmlGeometry::Polygon, outer)
        } else if let Some(ls) = node.descendants().find(|c| c.has_tag_name("LineString")) {
            (KmlGeometry::LineString, ls)
        } else {
            continue;
        };
        let coords_node = ring_holder
            .descendants()
            .find(|c| c.has_tag_name("coordinates"))
            .ok_or_else(|| {
                kml_err(
                    doc.text_pos_at(ring_holder.range().start).row,
                    format!("geometry in '{name}' has no coordinates"),
                )
            })?;
        let Some(text_node) = coords_node.first_child() else {
            return Err(kml_err(
                doc.text_pos_at(coords_node.range().start).row,
                format!("empty coordinates in '{name}'"),
            ));
        };
        let raw = text_node.text().unwrap_or("");
        let base = text_node.range().start;
        let coords = parse_coordinates(raw, |off| doc.text_pos_at(base + off).row)?;
        if coords.is_empty() {
            return Err(kml_err(
                doc.text_pos_at(coords_node.range().start).row,
                format!("empty coordinates in '{name}'"),
            ));
        }
        out.push(KmlPlacemark { name, geometry, coords });
    }
    Ok(out)
}

/// `lon,lat[,alt]` tokens separated by whitespace. `line_of` maps a byte
/// offset inside `raw` to a document line for error reporting.
fn parse_coordinates(raw: &str, line_of: impl Fn(usize) -> u32) -> Result<Vec<GeoPoint>> {
    let mut out = Vec::new();
    let mut search_from = 0usize;
    for token in raw.split_whitespace() {
        let off = raw[search_from..]
            .find(token)
            .expect("token comes from this string")
            + search_from;
        search_from = off + token.len();
        let line = line_of(off);
        let parts: Vec<&str> = token.split(',').collect();
        if parts.len() < 2 || parts.len() > 3 {
            return Err(kml_err(
                line,
                format!("coordinate '{token}' must be lon,lat or lon,lat,alt"),
            ));
        }
        let mut nums = [0.0f64; 3];
        for (slot, part) in nums.iter_mut().zip(&parts) {
            *slot = part
                .parse()
                .map_err(|_| kml_err(line, format!("'{part}' is not a number in '{token}'")))?;
        }
        let (lon, lat, alt) = (nums[0], nums[1], nums[2]);
        let point = GeoPoint::new(lat, lon, alt)
            .map_err(|e| kml_err(line, format!("coordinate '{token}': {e}")))?;
        out.push(point);
    }
    Ok(out)
}

/// Project a placemark ring into plane coordinates: plan rings keep
/// (east, north), profile rings keep (east, up). The repeated closing vertex
/// is removed; a LineString whose ends are more than [`RING_CLOSE_TOL`]
/// apart never was a ring and is rejected.
pub fn placemark_to_unit(
    p: &KmlPlacemark,
    frame: &LocalFrame,
    plane: Plane,
    id: u32,
) -> Result<UnitRegion> {
    // drop accidental double-clicks: consecutive vertices closer than any
    // feature a trace could carry
    const DUP_TOL: f64 = 1e-6;
    let mut ring: Vec<Point2> = Vec::with_capacity(p.coords.len());
    for gp in &p.coords {
        let enu = geodetic_to_enu(gp, frame)
            .map_err(|e| placemark_err(&p.name, e.to_string()))?;
        let (u, v) = match plane {
            Plane::PlanXY => (enu.x, enu.y),
            Plane::ProfileXZ => (enu.x, enu.z),
        };
        let pt = Point2::new(u, v);
        if ring.last().is_none_or(|prev| prev.dist(pt) > DUP_TOL) {
            ring.push(pt);
        }
    }
    if ring.len() >= 2 {
        let gap = ring[0].dist(*ring.last().unwrap());
        if gap <= RING_CLOSE_TOL {
            ring.pop();
        } else if p.geometry == KmlGeometry::LineString {
            return Err(placemark_err(
                &p.name,
                format!("ring does not close: first and last vertices are {gap:.2} m apart"),
            ));
        }
        // a Polygon outer boundary is closed by definition even when the
        // closing vertex was not repeated
    }
    if ring.len() < 3 {
        return Err(placemark_err(
            &p.name,
            format!("only {} distinct vertices; a region needs at least 3", ring.len()),
        ));
    }
    Ok(UnitRegion { id, name: p.name.clone(), polygon: ring, sweep_interval: None })
}

/// Parse a KML document into a subdivision for the given plane. Units are
/// numbered 1.. in document order.
pub fn subdivision_from_kml(
    text: &str,
    frame: &LocalFrame,
    plane: Plane,
) -> Result<PlanarSubdivision> {
    let placemarks = parse_kml(text)?;
    let units = placemarks
        .iter()
        .enumerate()
        .map(|(i, p)| placemark_to_unit(p, frame, plane, i as u32 + 1))
        .collect::<Result<Vec<_>>>()?;
    Ok(PlanarSubdivision { plane, units })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::enu_to_geodetic;
    use crate::mesh::Point3;
    use crate::wireframe::signed_area;

    fn frame() -> LocalFrame {
        LocalFrame::new(GeoPoint::new(48.7408, 7.3318, 425.0).unwrap()).unwrap()
    }

    const FIXTURE: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<kml xmlns="http://www.opengis.net/kml/2.2">
  <Document>
    <name>fixture</name>
    <Folder>
      <name>traces</name>
      <Placemark>
        <name>ring one</name>
        <LineString>
          <tessellate>1</tessellate>
          <coordinates>
            7.0,48.0,10 7.001,48.0,10
            7.001,48.001,10 7.0,48.001,10 7.0,48.0,10
          </coordinates>
        </LineString>
      </Placemark>
      <Placemark>
        <name>area two</name>
        <Polygon>
          <outerBoundaryIs>
            <LinearRing>
              <coordinates>7.01,48.0 7.011,48.0 7.011,48.001 7.01,48.0</coordinates>
            </LinearRing>
          </outerBoundaryIs>
        </Polygon>
      </Placemark>
      <Placemark>
        <name>just a pin</name>
        <Point><coordinates>7.0,48.0,0</coordinates></Point>
      </Placemark>
    </Folder>
  </Document>
</kml>
"#;

    #[test]
    fn parses_linestrings_and_polygons_skipping_points() {
        let pms = parse_kml(FIXTURE).unwrap();
        assert_eq!(pms.len(), 2);
        assert_eq!(pms[0].name, "ring one");
        assert_eq!(pms[0].geometry, KmlGeometry::LineString);
        assert_eq!(pms[0].coords.len(), 5);
        assert_eq!(pms[0].coords[1].lon, 7.001);
        assert_eq!(pms[0].coords[1].lat, 48.0);
        assert_eq!(pms[0].coords[1].alt, 10.0);
        assert_eq!(pms[1].name, "area two");
        assert_eq!(pms[1].geometry, KmlGeometry::Polygon);
        // missing altitude reads as zero
        assert_eq!(pms[1].coords[0].alt, 0.0);
    }

    #[test]
    fn coordinate_errors_carry_the_document_line() {
        let broken = FIXTURE.replace("7.001,48.001,10", "7.001,not-a-number,10");
        let err = parse_kml(&broken).unwrap_err();
        match err {
            Error::KmlParse { line, ref message } => {
                // the broken token sits on line 13 of the fixture
                assert_eq!(line, 13, "{message}");
                assert!(message.contains("not-a-number"));
            }
            other => panic!("expected KmlParse, got {other:?}"),
        }

        let out_of_range = FIXTURE.replace("7.01,48.0 ", "7.01,98.0 ");
        assert!(matches!(parse_kml(&out_of_range), Err(Error::KmlParse { .. })));

        let unclosed_tag = FIXTURE.replace("</Folder>", "");
        assert!(matches!(parse_kml(&unclosed_tag), Err(Error::KmlParse { .. })));
    }

    #[test]
    fn polygon_without_outer_boundary_is_rejected() {
        let broken = FIXTURE
            .replace("<outerBoundaryIs>", "<innerBoundaryIs>")
            .replace("</outerBoundaryIs>", "</innerBoundaryIs>");
        let err = parse_kml(&broken).unwrap_err();
        assert!(matches!(err, Error::KmlParse { .. }), "{err:?}");
        assert!(err.to_string().contains("outerBoundaryIs"));
    }

    #[test]
    fn unit_projection_round_trips_through_the_frame() {
        let f = frame();
        // a 40 x 30 m rectangle expressed as geodetic coordinates
        let corners = [(0.0, 0.0), (40.0, 0.0), (40.0, 30.0), (0.0, 30.0)];
        let mut coords: Vec<GeoPoint> = corners
            .iter()
            .map(|&(e, n)| enu_to_geodetic(Point3::new(e, n, 5.0), &f).unwrap())
            .collect();
        coords.push(coords[0]);
        let pm = KmlPlacemark {
            name: "rect".into(),
            geometry: KmlGeometry::LineString,
            coords,
        };
        let unit = placemark_to_unit(&pm, &f, Plane::PlanXY, 3).unwrap();
        assert_eq!(unit.id, 3);
        assert_eq!(unit.polygon.len(), 4);
        for (p, &(e, n)) in unit.polygon.iter().zip(&corners) {
            assert!((p.u - e).abs() < 1e-6, "{} vs {e}", p.u);
            assert!((p.v - n).abs() < 1e-6, "{} vs {n}", p.v);
        }
        assert!((signed_area(&unit.polygon) - 1200.0).abs() < 1e-3);
    }

    #[test]
    fn profile_rings_keep_east_and_up() {
        let f = frame();
        let corners = [(0.0, -5.0), (20.0, -5.0), (20.0, 15.0), (0.0, 15.0)];
        let coords: Vec<GeoPoint> = corners
            .iter()
            .map(|&(e, up)| enu_to_geodetic(Point3::new(e, 0.0, up), &f).unwrap())
            .collect();
        let pm = KmlPlacemark { name: "band".into(), geometry: KmlGeometry::Polygon, coords };
        let unit = placemark_to_unit(&pm, &f, Plane::ProfileXZ, 1).unwrap();
        for (p, &(e, up)) in unit.polygon.iter().zip(&corners) {
            assert!((p.u - e).abs() < 1e-6);
            assert!((p.v - up).abs() < 1e-6);
        }
    }

    #[test]
    fn open_linestrings_are_rejected() {
        let f = frame();
        let coords: Vec<GeoPoint> = [(0.0, 0.0), (40.0, 0.0), (40.0, 30.0), (0.0, 25.0)]
            .iter()
            .map(|&(e, n)| enu_to_geodetic(Point3::new(e, n, 0.0), &f).unwrap())
            .collect();
        let pm = KmlPlacemark { name: "open".into(), geometry: KmlGeometry::LineString, coords };
        let err = placemark_to_unit(&pm, &f, Plane::PlanXY, 1).unwrap_err();
        assert!(matches!(err, Error::Placemark { .. }), "{err:?}");
        assert!(err.to_string().contains("does not close"));
    }

    #[test]
    fn bundled_sample_plan_parses_into_four_masses() {
        let f = frame();
        let s = subdivision_from_kml(include_str!("../../sample/plan.kml"), &f, Plane::PlanXY)
            .unwrap();
        assert_eq!(s.units.len(), 4);
        assert_eq!(s.units[0].name, "Markenfels");
        let us: Vec<f64> = s.units.iter().flat_map(|u| u.polygon.iter().map(|p| p.u)).collect();
        let vs: Vec<f64> = s.units.iter().flat_map(|u| u.polygon.iter().map(|p| p.v)).collect();
        let max = |xs: &[f64]| xs.iter().fold(f64::MIN, |a, &b| a.max(b));
        let min = |xs: &[f64]| xs.iter().fold(f64::MAX, |a, &b| a.min(b));
        assert!((min(&us) - 0.0).abs() < 1e-6);
        assert!((max(&us) - 255.0).abs() < 1e-6);
        assert!((min(&vs) - 0.0).abs() < 1e-6);
        assert!((max(&vs) - 70.0).abs() < 1e-6);
    }

    #[test]
    fn bundled_sample_profile_parses_into_three_layers() {
        let f = frame();
        let s = subdivision_from_kml(
            include_str!("../../sample/profile.kml"),
            &f,
            Plane::ProfileXZ,
        )
        .unwrap();
        assert_eq!(s.units.len(), 3);
        let vs: Vec<f64> = s.units.iter().flat_map(|u| u.polygon.iter().map(|p| p.v)).collect();
        let max = |xs: &[f64]| xs.iter().fold(f64::MIN, |a, &b| a.max(b));
        let min = |xs: &[f64]| xs.iter().fold(f64::MAX, |a, &b| a.min(b));
        assert!((min(&vs) + 5.0).abs() < 1e-6);
        assert!((max(&vs) - 45.0).abs() < 1e-6);
    }
}
