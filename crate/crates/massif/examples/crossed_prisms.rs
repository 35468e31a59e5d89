//! Intersect a plan view with a profile view and check the cell partition.
//!
//! Run with: cargo run --example crossed_prisms

use massif::geo::{GeoPoint, LocalFrame};
use massif::mesh::mesh_volume;
use massif::solids::build_model;
use massif::wireframe::{PlanarSubdivision, Plane, Point2, UnitRegion};

fn unit(id: u32, name: &str, ring: &[(f64, f64)]) -> UnitRegion {
    UnitRegion {
        id,
        name: name.into(),
        polygon: ring.iter().map(|&(u, v)| Point2::new(u, v)).collect(),
        sweep_interval: None,
    }
}

fn main() -> massif::Result<()> {
    // plan: two footprints side by side, a square and a triangle
    let plan = PlanarSubdivision {
        plane: Plane::PlanXY,
        units: vec![
            unit(1, "west mass", &[(0.0, 0.0), (60.0, 0.0), (60.0, 40.0), (0.0, 40.0)]),
            unit(2, "east mass", &[(60.0, 0.0), (110.0, 0.0), (60.0, 40.0)]),
        ],
    };
    // profile: a flat bed under a wedge-shaped cap
    let profile = PlanarSubdivision {
        plane: Plane::ProfileXZ,
        units: vec![
            unit(1, "bed", &[(0.0, 0.0), (110.0, 0.0), (110.0, 10.0), (0.0, 10.0)]),
            unit(2, "cap", &[(0.0, 10.0), (110.0, 10.0), (0.0, 30.0)]),
        ],
    };

    let frame = LocalFrame::new(GeoPoint::new(48.7408, 7.3318, 425.0)?)?;
    // plan prisms rise through the full elevation range; profile prisms sweep
    // across the plan's north extent
    let (model, warnings) = build_model(frame, &plan, &profile, (0.0, 30.0), (0.0, 40.0))?;
    for w in &warnings {
        println!("warning: {w}");
    }

    println!(
        "box: {:.1} x {:.1} x {:.1} m",
        model.bounds.length, model.bounds.width, model.bounds.height
    );
    let mut total = 0.0;
    for cell in &model.cells {
        let (mass, layer) = cell.tag.unwrap();
        let v = mesh_volume(cell)?;
        total += v;
        println!("  mass {mass} / layer {layer}: {v:.1} m3");
    }

    // the cells partition the merged solid: volumes must add up
    let merged_plan = 60.0 * 40.0 + 0.5 * 50.0 * 40.0;
    let merged_profile_height_west = 10.0 + 20.0; // bed + full cap at x=0
    println!("cell total: {total:.1} m3");
    println!(
        "(the plan covers {merged_plan:.0} m2; the profile tapers from \
         {merged_profile_height_west:.0} m of rock at x=0 to 10 m at x=110)"
    );
    Ok(())
}
