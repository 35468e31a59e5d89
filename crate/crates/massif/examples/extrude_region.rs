//! Sweep one traced region into a prism and interrogate the mesh.
//!
//! Run with: cargo run --example extrude_region

use massif::mesh::{mesh_volume, point_in_mesh, Point3};
use massif::solids::ExtrudedSolid;
use massif::wireframe::{Plane, Point2, UnitRegion};
use massif::Containment;

fn main() -> massif::Result<()> {
    // an L-shaped footprint, 8 m tall
    let ring = [(0.0, 0.0), (4.0, 0.0), (4.0, 2.0), (2.0, 2.0), (2.0, 5.0), (0.0, 5.0)];
    let region = UnitRegion {
        id: 1,
        name: "L block".into(),
        polygon: ring.iter().map(|&(u, v)| Point2::new(u, v)).collect(),
        sweep_interval: None,
    };

    let solid = ExtrudedSolid::new(region, Plane::PlanXY, (0.0, 8.0))?;
    let mesh = solid.mesh()?;
    println!(
        "prism mesh: {} vertices, {} triangles",
        mesh.vertices.len(),
        mesh.triangles.len()
    );
    println!("volume: {} m3 (footprint 14 m2 x 8 m)", mesh_volume(&mesh)?);

    // the analytic test and the mesh agree on where points are
    for (p, label) in [
        (Point3::new(1.0, 1.0, 4.0), "deep inside"),
        (Point3::new(3.0, 4.0, 4.0), "in the notch"),
        (Point3::new(2.0, 3.0, 4.0), "on the notch wall"),
        (Point3::new(1.0, 1.0, 9.0), "above the cap"),
    ] {
        let analytic = solid.membership(p);
        let by_ray = match analytic {
            Containment::OnBoundary => "(skipped: ray casting is for clear cases)".to_string(),
            _ => format!("ray cast agrees: {:?}", point_in_mesh(&mesh, p)?),
        };
        println!("  {label}: {analytic:?} {by_ray}");
    }
    Ok(())
}
