//! KML output: a Model placemark referencing a COLLADA file, and a
//! self-contained extruded-polygon document that needs no mesh at all.

use std::fmt::Write as _;

use crate::error::Result;
use crate::geo::{enu_to_geodetic, LocalFrame};
use crate::mesh::Point3;
use crate::solids::GeoModel;
use crate::wireframe::PlanarSubdivision;

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Geolocated wrapper for a mesh export: one Model placemark anchored at the
/// frame origin, pointing at a COLLADA file via `dae_href`. The mesh lives in
/// frame coordinates, so orientation is identity and scale is 1.
pub fn write_kml_model(model: &GeoModel, dae_href: &str) -> (String, Vec<String>) {
    let mut warnings = Vec::new();
    if model.cells.is_empty() {
        warnings.push("model has no cells; the exported document is an empty shell".to_string());
    }
    let o = model.frame.origin;
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str("<kml xmlns=\"http://www.opengis.net/kml/2.2\">\n");
    s.push_str("  <Document>\n");
    s.push_str("    <name>rock-mass model</name>\n");
    s.push_str("    <Placemark>\n");
    s.push_str("      <name>model</name>\n");
    s.push_str("      <Model>\n");
    s.push_str("        <altitudeMode>absolute</altitudeMode>\n");
    s.push_str("        <Location>\n");
    let _ = writeln!(s, "          <longitude>{:.9}</longitude>", o.lon);
    let _ = writeln!(s, "          <latitude>{:.9}</latitude>", o.lat);
    let _ = writeln!(s, "          <altitude>{:.9}</altitude>", o.alt);
    s.push_str("        </Location>\n");
    s.push_str("        <Orientation>\n");
    s.push_str("          <heading>0</heading>\n");
    s.push_str("          <tilt>0</tilt>\n");
    s.push_str("          <roll>0</roll>\n");
    s.push_str("        </Orientation>\n");
    s.push_str("        <Scale><x>1</x><y>1</y><z>1</z></Scale>\n");
    s.push_str("        <Link>\n");
    let _ = writeln!(s, "          <href>{}</href>", xml_escape(dae_href));
    s.push_str("        </Link>\n");
    s.push_str("      </Model>\n");
    s.push_str("    </Placemark>\n");
    s.push_str("  </Document>\n");
    s.push_str("</kml>\n");
    (s, warnings)
}

/// Self-contained preview: each plan unit becomes an extruded Polygon capped
/// at `top_alt` metres (absolute). KML extrusion always drops to the ground
/// surface, so only the cap altitude is encoded.
pub fn write_kml_extruded(
    plan: &PlanarSubdivision,
    frame: &LocalFrame,
    top_alt: f64,
) -> Result<String> {
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str("<kml xmlns=\"http://www.opengis.net/kml/2.2\">\n");
    s.push_str("  <Document>\n");
    s.push_str("    <name>extruded footprint</name>\n");
    s.push_str("    <Style id=\"mass\">\n");
    s.push_str("      <PolyStyle><color>a0ffaa55</color></PolyStyle>\n");
    s.push_str("    </Style>\n");
    for unit in &plan.units {
        s.push_str("    <Placemark>\n");
        let _ = writeln!(s, "      <name>{}</name>", xml_escape(&unit.name));
        s.push_str("      <styleUrl>#mass</styleUrl>\n");
        s.push_str("      <Polygon>\n");
        s.push_str("        <extrude>1</extrude>\n");
        s.push_str("        <altitudeMode>absolute</altitudeMode>\n");
        s.push_str("        <outerBoundaryIs>\n");
        s.push_str("          <LinearRing>\n");
        s.push_str("            <coordinates>\n");
        let mut ring = unit.polygon.clone();
        if let Some(&first) = ring.first() {
            ring.push(first);
        }
        for p in &ring {
            let gp = enu_to_geodetic(Point3::new(p.u, p.v, 0.0), frame)?;
            // altitude printed exactly so the cap height survives a re-parse
            let _ = writeln!(
                s,
                "              {:.9},{:.9},{}",
                gp.lon, gp.lat, top_alt
            );
        }
        s.push_str("            </coordinates>\n");
        s.push_str("          </LinearRing>\n");
        s.push_str("        </outerBoundaryIs>\n");
        s.push_str("      </Polygon>\n");
        s.push_str("    </Placemark>\n");
    }
    s.push_str("  </Document>\n");
    s.push_str("</kml>\n");
    Ok(s)
}
