//! CUT keeps the heaviest dimensions; the reduced signature covers a much
//! smaller rectangle. LSH sketches estimate cosine from bit agreement.

use trajlink::linking::{SignatureModel, SignatureSpec};
use trajlink::reduction::{cut_reduce, mbr_of, LshPlanes};
use trajlink::signatures::{similarity, UnknownDims};
use trajlink::trace_model::{generate_synthetic, LocalClock, SyntheticConfig};

fn main() -> trajlink::Result<()> {
    let data = generate_synthetic(&SyntheticConfig {
        n_objects: 100,
        points_per_object: 1000,
        seed: 2,
        ..Default::default()
    })?;
    let model = SignatureModel::fit(&data.traces, SignatureSpec::Spatial, &data.anchors, LocalClock::default())?;
    let sigs = model.signatures(&data.traces, UnknownDims::Error)?;
    let (id, full) = &sigs[0];

    let full_area = mbr_of(full, &data.anchors)?.area();
    println!("{id}: {} dims, mbr area {full_area:.4}", full.len());
    for m in [50, 10, 5] {
        let r = cut_reduce(full, m)?;
        let area = mbr_of(&r, &data.anchors)?.area();
        println!("  m={m:>2}: area {area:.6} ({:.2}% of full)", 100.0 * area / full_area);
    }

    let planes = LshPlanes::new(0, 256);
    let other = &sigs[1].1;
    let (a, b) = (planes.sketch(full), planes.sketch(other));
    println!(
        "cosine to {}: exact {:.3}, sketch estimate {:.3} ({} of 256 bits differ)",
        sigs[1].0,
        similarity(full, other),
        a.estimate_cosine(&b),
        a.hamming(&b)
    );
    Ok(())
}
