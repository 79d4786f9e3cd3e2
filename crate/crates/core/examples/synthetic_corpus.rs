//! Generate a small planted-identity corpus, split it by day and look at
//! the halves.

use trajlink::trace_model::{generate_synthetic, split_dataset, LocalClock, SplitStrategy, SyntheticConfig};

fn main() -> trajlink::Result<()> {
    let data = generate_synthetic(&SyntheticConfig {
        n_objects: 50,
        points_per_object: 400,
        seed: 1,
        ..Default::default()
    })?;
    println!("{} objects over {} anchors", data.traces.len(), data.anchors.len());

    for strategy in [
        SplitStrategy::Interleaved,
        SplitStrategy::Serial { q_days: 7 },
        SplitStrategy::Random { seed: 4, q_days: 15 },
        SplitStrategy::WeekdayWeekend,
    ] {
        let s = split_dataset(&data.traces, strategy, LocalClock::default())?;
        let q: usize = s.query.iter().map(|t| t.len()).sum();
        let d: usize = s.reference.iter().map(|t| t.len()).sum();
        println!("{strategy:?}: {q} query points, {d} reference points, {} warnings", s.warnings.len());
    }

    let t = &data.traces[0];
    println!("{} starts with {:?}", t.object_id, &t.points[..3]);
    Ok(())
}
