//! Anchor a metric frame on the globe and measure with it.
//!
//! Run with: cargo run --example geodesy

use massif::geo::{
    enu_to_geodetic, geodesic_distance, geodetic_to_enu, GeoPoint, LocalFrame,
};
use massif::mesh::Point3;

fn main() -> massif::Result<()> {
    // two points read off imagery: the ends of a castle terrace
    let west_end = GeoPoint::new(48.74080, 7.33180, 425.0)?;
    let east_end = GeoPoint::new(48.74080, 7.33527, 425.0)?;

    let span = geodesic_distance(&west_end, &east_end)?;
    println!("terrace span: {:.2} m", span.meters());

    // a frame at the west end turns geodetic coordinates into metres
    let frame = LocalFrame::new(west_end)?;
    let local = geodetic_to_enu(&east_end, &frame)?;
    println!(
        "east end in the local frame: east {:.2} m, north {:.2} m, up {:.2} m",
        local.x, local.y, local.z
    );

    // the projection is invertible well below tracing precision
    let summit = Point3::new(120.0, 35.0, 45.0);
    let on_globe = enu_to_geodetic(summit, &frame)?;
    let back = geodetic_to_enu(&on_globe, &frame)?;
    let err = ((back.x - summit.x).powi(2)
        + (back.y - summit.y).powi(2)
        + (back.z - summit.z).powi(2))
    .sqrt();
    println!(
        "summit maps to lat {:.7}, lon {:.7}, alt {:.2} m (round trip error {err:.2e} m)",
        on_globe.lat, on_globe.lon, on_globe.alt
    );
    Ok(())
}
