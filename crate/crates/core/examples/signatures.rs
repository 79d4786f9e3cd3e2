//! The three signature kinds on a toy corpus, plus the time-of-day EMD.

use trajlink::signatures::{
    build_corpus_stats, build_gram_corpus, build_sequential_signature, build_spatial_signature,
    build_temporal_histogram, emd_similarity, similarity,
};
use trajlink::linking::{SignatureModel, SignatureSpec};
use trajlink::signatures::UnknownDims;
use trajlink::trace_model::{AnchorSet, DistanceMetric, LocalClock, Trace};

fn main() -> trajlink::Result<()> {
    let coords: Vec<(f64, f64)> = (0..16).map(|i| ((i % 4) as f64, (i / 4) as f64)).collect();
    let anchors = AnchorSet::from_coords(&coords, DistanceMetric::Planar)?;
    let h = 3600;
    let traces = vec![
        Trace::from_pairs("alice", &[(0, 8 * h), (1, 9 * h), (5, 18 * h), (0, 32 * h), (1, 33 * h)]),
        Trace::from_pairs("bob", &[(10, 7 * h), (11, 8 * h), (15, 20 * h), (10, 31 * h)]),
        Trace::from_pairs("carol", &[(0, 22 * h), (1, 23 * h), (6, 46 * h), (10, 47 * h)]),
    ];

    let stats = build_corpus_stats(&traces);
    let spatial: Vec<_> = traces
        .iter()
        .map(|t| build_spatial_signature(t, &stats))
        .collect::<Result<_, _>>()?;
    println!("alice spatial: {:?}", spatial[0].iter().collect::<Vec<_>>());

    let grams = build_gram_corpus(&traces, 2)?;
    let seq: Vec<_> = traces
        .iter()
        .map(|t| build_sequential_signature(t, &grams))
        .collect::<Result<_, _>>()?;
    println!("{} distinct 2-grams", grams.vocab.len());

    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        println!(
            "{} ~ {}: spatial {:.3}  sequential {:.3}",
            traces[i].object_id,
            traces[j].object_id,
            similarity(&spatial[i], &spatial[j]),
            similarity(&seq[i], &seq[j]),
        );
    }

    let model = SignatureModel::fit(&traces, SignatureSpec::Spatiotemporal { grid: 2, dt_hours: 6.0 }, &anchors, LocalClock::new(0.0))?;
    let st = model.signatures(&traces, UnknownDims::Error)?;
    println!("spatiotemporal kind {}: alice has {} cells", model.kind(), st[0].1.len());

    let clock = LocalClock::new(0.0);
    let a = build_temporal_histogram(&traces[0], 6.0, clock)?;
    let c = build_temporal_histogram(&traces[2], 6.0, clock)?;
    println!("time-of-day similarity alice ~ carol: {:.3}", emd_similarity(&a, &c)?);
    Ok(())
}
