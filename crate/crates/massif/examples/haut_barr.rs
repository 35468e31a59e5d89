//! The bundled castle-rock scene, end to end: scaffold a project, build it,
//! export a geolocated KML + COLLADA pair.
//!
//! Run with: cargo run --example haut_barr

use massif::project::{cmd_build, cmd_export, cmd_init, render_report, ExportFormat, PROJECT_FILE};

fn main() -> massif::Result<()> {
    let dir = std::env::temp_dir().join("massif-haut-barr-example");
    if dir.exists() {
        std::fs::remove_dir_all(&dir).ok();
    }
    for path in cmd_init(&dir, false)? {
        println!("created {}", path.display());
    }

    let project = dir.join(PROJECT_FILE);
    let report = cmd_build(&project)?;
    println!("\n{}", render_report(&report));

    let (written, warnings) = cmd_export(&project, ExportFormat::Kml)?;
    for w in warnings {
        println!("warning: {w}");
    }
    for path in written {
        println!("wrote {}", path.display());
    }
    println!("\nopen the .kml in Google Earth; it loads the .dae next to it");
    Ok(())
}
