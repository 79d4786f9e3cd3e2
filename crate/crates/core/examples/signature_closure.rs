//! Suppress each object's most identifying points round by round and watch
//! linkability fall while most of the data survives.

use trajlink::privacy::{signature_closure, ClosureConfig};
use trajlink::trace_model::{generate_synthetic, SyntheticConfig};

fn main() -> trajlink::Result<()> {
    let data = generate_synthetic(&SyntheticConfig {
        n_objects: 300,
        seed: 3,
        ..Default::default()
    })?;
    let cfg = ClosureConfig { rounds: 3, ..Default::default() };
    let (_, report) = signature_closure(&data.traces, &data.anchors, &cfg)?;
    println!("round  acc@1  data_remain  mbr_overlap  cover_423m  cover_85m");
    for r in &report.rounds {
        println!(
            "{:>5}  {:.3}  {:>11.3}  {:>11.3}  {:>10.3}  {:>9.3}",
            r.round,
            r.acc1(),
            r.utility.data_remain,
            r.utility.mbr_overlap,
            r.utility.grid_coverage_large,
            r.utility.grid_coverage_small
        );
    }
    let (id, rounds) = report.removed.iter().next().unwrap();
    println!("{id} lost anchors {:?} in round 1", rounds[0]);
    Ok(())
}
