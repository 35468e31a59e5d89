//! COLLADA 1.4.1 writer. One geometry per cell, one lambert material per
//! layer, Z up, metres. Output is deterministic: fixed timestamp, fixed float
//! formatting, cells in model order (already sorted by tag).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::solids::GeoModel;

/// Diffuse color, red green blue alpha in 0..=1.
pub type Rgba = [f64; 4];

/// Stamped into the asset block. Export output must not depend on the wall
/// clock, otherwise identical runs produce different bytes.
pub const EXPORT_TIMESTAMP: &str = "2024-01-01T00:00:00Z";

const FALLBACK_GRAY: Rgba = [0.7, 0.7, 0.7, 1.0];

fn material_name(layer: Option<u32>) -> String {
    match layer {
        Some(l) => format!("layer{l}"),
        None => "untagged".to_string(),
    }
}

fn cell_id(tag: Option<(u32, u32)>, idx: usize) -> String {
    match tag {
        Some((mass, layer)) => format!("mass{mass}_layer{layer}"),
        None => format!("cell{idx}"),
    }
}

/// Serialize the model's cells. `palette` maps layer id to diffuse color;
/// layers without an entry render gray and produce a warning.
pub fn write_collada(model: &GeoModel, palette: &BTreeMap<u32, Rgba>) -> (String, Vec<String>) {
    let mut warnings = Vec::new();
    if model.cells.is_empty() {
        warnings.push("model has no cells; the COLLADA scene is empty".to_string());
    }
    let layers: BTreeSet<Option<u32>> =
        model.cells.iter().map(|c| c.tag.map(|(_, l)| l)).collect();
    let mut colors: BTreeMap<Option<u32>, Rgba> = BTreeMap::new();
    for &layer in &layers {
        let color = layer.and_then(|l| palette.get(&l).copied());
        if color.is_none() {
            warnings.push(format!(
                "no color configured for {}; using gray",
                material_name(layer)
            ));
        }
        colors.insert(layer, color.unwrap_or(FALLBACK_GRAY));
    }

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str(
        "<COLLADA xmlns=\"http://www.collada.org/2005/11/COLLADASchema\" version=\"1.4.1\">\n",
    );
    s.push_str("  <asset>\n");
    let _ = writeln!(s, "    <created>{EXPORT_TIMESTAMP}</created>");
    let _ = writeln!(s, "    <modified>{EXPORT_TIMESTAMP}</modified>");
    s.push_str("    <unit name=\"meter\" meter=\"1\"/>\n");
    s.push_str("    <up_axis>Z_UP</up_axis>\n");
    s.push_str("  </asset>\n");

    s.push_str("  <library_effects>\n");
    for (&layer, color) in &colors {
        let name = material_name(layer);
        let _ = writeln!(s, "    <effect id=\"{name}-effect\">");
        s.push_str("      <profile_COMMON>\n");
        s.push_str("        <technique sid=\"common\">\n");
        s.push_str("          <lambert>\n");
        let _ = writeln!(
            s,
            "            <diffuse><color>{:.6} {:.6} {:.6} {:.6}</color></diffuse>",
            color[0], color[1], color[2], color[3]
        );
        s.push_str("          </lambert>\n");
        s.push_str("        </technique>\n");
        s.push_str("      </profile_COMMON>\n");
        s.push_str("    </effect>\n");
    }
    s.push_str("  </library_effects>\n");

    s.push_str("  <library_materials>\n");
    for &layer in colors.keys() {
        let name = material_name(layer);
        let _ = writeln!(s, "    <material id=\"{name}-material\" name=\"{name}\">");
        let _ = writeln!(s, "      <instance_effect url=\"#{name}-effect\"/>");
        s.push_str("    </material>\n");
    }
    s.push_str("  </library_materials>\n");

    s.push_str("  <library_geometries>\n");
    for (idx, cell) in model.cells.iter().enumerate() {
        let id = cell_id(cell.tag, idx);
        let material = material_name(cell.tag.map(|(_, l)| l));
        let _ = writeln!(s, "    <geometry id=\"{id}\" name=\"{id}\">");
        s.push_str("      <mesh>\n");
        let _ = writeln!(s, "        <source id=\"{id}-pos\">");
        let _ = write!(
            s,
            "          <float_array id=\"{id}-pos-array\" count=\"{}\">",
            cell.vertices.len() * 3
        );
        for (i, v) in cell.vertices.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{:.6} {:.6} {:.6}", v.x, v.y, v.z);
        }
        s.push_str("</float_array>\n");
        s.push_str("          <technique_common>\n");
        let _ = writeln!(
            s,
            "            <accessor source=\"#{id}-pos-array\" count=\"{}\" stride=\"3\">",
            cell.vertices.len()
        );
        s.push_str("              <param name=\"X\" type=\"float\"/>\n");
        s.push_str("              <param name=\"Y\" type=\"float\"/>\n");
        s.push_str("              <param name=\"Z\" type=\"float\"/>\n");
        s.push_str("            </accessor>\n");
        s.push_str("          </technique_common>\n");
        s.push_str("        </source>\n");
        let _ = writeln!(s, "        <vertices id=\"{id}-verts\">");
        let _ = writeln!(s, "          <input semantic=\"POSITION\" source=\"#{id}-pos\"/>");
        s.push_str("        </vertices>\n");
        let _ = writeln!(
            s,
            "        <triangles material=\"{material}\" count=\"{}\">",
            cell.triangles.len()
        );
        let _ = writeln!(s, "          <input semantic=\"VERTEX\" source=\"#{id}-verts\" offset=\"0\"/>");
        s.push_str("          <p>");
        for (i, t) in cell.triangles.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{} {} {}", t[0], t[1], t[2]);
        }
        s.push_str("</p>\n");
        s.push_str("        </triangles>\n");
        s.push_str("      </mesh>\n");
        s.push_str("    </geometry>\n");
    }
    s.push_str("  </library_geometries>\n");

    s.push_str("  <library_visual_scenes>\n");
    s.push_str("    <visual_scene id=\"scene\" name=\"scene\">\n");
    for (idx, cell) in model.cells.iter().enumerate() {
        let id = cell_id(cell.tag, idx);
        let material = material_name(cell.tag.map(|(_, l)| l));
        let _ = writeln!(s, "      <node id=\"{id}-node\" name=\"{id}\">");
        let _ = writeln!(s, "        <instance_geometry url=\"#{id}\">");
        s.push_str("          <bind_material>\n");
        s.push_str("            <technique_common>\n");
        let _ = writeln!(
            s,
            "              <instance_material symbol=\"{material}\" target=\"#{material}-material\"/>"
        );
        s.push_str("            </technique_common>\n");
        s.push_str("          </bind_material>\n");
        s.push_str("        </instance_geometry>\n");
        s.push_str("      </node>\n");
    }
    s.push_str("    </visual_scene>\n");
    s.push_str("  </library_visual_scenes>\n");
    s.push_str("  <scene><instance_visual_scene url=\"#scene\"/></scene>\n");
    s.push_str("</COLLADA>\n");
    (s, warnings)
}
