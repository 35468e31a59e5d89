//! Check traced rings before building, and see what gets repaired.
//!
//! Run with: cargo run --example validate_traces

use massif::wireframe::{
    normalize_ring, validate_subdivision, PlanarSubdivision, Plane, Point2, UnitRegion,
};

fn unit(id: u32, name: &str, ring: &[(f64, f64)]) -> UnitRegion {
    UnitRegion {
        id,
        name: name.into(),
        polygon: ring.iter().map(|&(u, v)| Point2::new(u, v)).collect(),
        sweep_interval: None,
    }
}

fn main() {
    // "field" is fine; "yard" was traced clockwise (auto-repairable);
    // "spill" overlaps "field" (needs a human)
    let s = PlanarSubdivision {
        plane: Plane::PlanXY,
        units: vec![
            unit(1, "field", &[(0.0, 0.0), (40.0, 0.0), (40.0, 30.0), (0.0, 30.0)]),
            unit(2, "yard", &[(40.0, 0.0), (40.0, 30.0), (70.0, 30.0), (70.0, 0.0)]),
            unit(3, "spill", &[(30.0, 10.0), (50.0, 10.0), (50.0, 20.0), (30.0, 20.0)]),
        ],
    };

    println!("diagnostics:");
    for d in validate_subdivision(&s) {
        let tail = if d.auto_fixable { " [auto-fixable]" } else { "" };
        println!("  {d}{tail}");
    }

    // the build path repairs what it can through ring normalization
    let fixed = normalize_ring(s.units[1].polygon.clone());
    println!(
        "\n'yard' normalized: reversed={}, dropped {} vertices",
        fixed.reversed, fixed.dropped
    );
}
