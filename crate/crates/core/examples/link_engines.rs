//! Link the two halves of a corpus with every engine and compare accuracy
//! and query time.

use trajlink::linking::{accuracy_curve, link_traces, Engine, LinkConfig};
use trajlink::trace_model::{generate_synthetic, split_dataset, LocalClock, SplitStrategy, SyntheticConfig};

fn main() -> trajlink::Result<()> {
    let data = generate_synthetic(&SyntheticConfig {
        n_objects: 1000,
        points_per_object: 1000,
        seed: 8,
        ..Default::default()
    })?;
    let split = split_dataset(&data.traces, SplitStrategy::Interleaved, LocalClock::default())?;
    let (query, reference) = split.for_linking();

    for engine in Engine::ALL {
        let cfg = LinkConfig { engine, k: 5, ..Default::default() };
        let run = link_traces(&query, &reference, &data.anchors, &cfg)?;
        let acc = accuracy_curve(&run, 5);
        println!(
            "{engine:>7}: acc@1 {:.3}  acc@5 {:.3}  link {:.4}s",
            acc[&1], acc[&5], run.timings.link_secs
        );
    }
    Ok(())
}
