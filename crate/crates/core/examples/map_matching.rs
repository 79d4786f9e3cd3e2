//! Snap noisy GPS points to the nearest anchor and collapse repeats.

use trajlink::trace_model::{calibrate_trace, AnchorSet, DistanceMetric, RawPoint};

fn main() -> trajlink::Result<()> {
    // A 5x5 grid of intersections roughly 100 m apart.
    let coords: Vec<(f64, f64)> = (0..25)
        .map(|i| (116.30 + 0.001 * (i % 5) as f64, 39.90 + 0.001 * (i / 5) as f64))
        .collect();
    let anchors = AnchorSet::from_coords(&coords, DistanceMetric::Haversine)?;

    let raw = vec![
        RawPoint::new(116.3001, 39.9001, 0),
        RawPoint::new(116.3002, 39.8999, 30),
        RawPoint::new(116.3011, 39.9003, 60),
        RawPoint::new(116.3019, 39.9012, 90),
        RawPoint::new(116.3021, 39.9009, 120),
    ];
    let trace = calibrate_trace("car-7", &raw, &anchors)?;
    for p in &trace.points {
        let (lon, lat) = anchors.coords(p.anchor).unwrap();
        println!("t={:>3}  anchor {:>2} at ({lon:.3}, {lat:.3})", p.t, p.anchor);
    }
    println!("{} raw points became {} visits", raw.len(), trace.len());
    Ok(())
}
