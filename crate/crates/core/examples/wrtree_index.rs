//! Bulk-load a WR-tree, search it, grow it by insertion, and round-trip it
//! through the binary file format.

use trajlink::linking::{prepare_objects, SignatureModel, SignatureSpec};
use trajlink::signatures::UnknownDims;
use trajlink::trace_model::{generate_synthetic, LocalClock, SyntheticConfig};
use trajlink::wrtree::{bulk_load, knn_search_with_stats, linear_knn, read_index, validate, write_index};

fn main() -> trajlink::Result<()> {
    let data = generate_synthetic(&SyntheticConfig {
        n_objects: 2000,
        points_per_object: 300,
        seed: 5,
        ..Default::default()
    })?;
    let model = SignatureModel::fit(&data.traces, SignatureSpec::Spatial, &data.anchors, LocalClock::default())?;
    let sigs = model.signatures(&data.traces, UnknownDims::Error)?;
    let mut objects = prepare_objects(sigs, Some(10), true, &model.support())?.objects;

    let late = objects.split_off(1500);
    let mut tree = bulk_load(objects, 16)?;
    println!("bulk: {} objects, {} nodes, height {}", tree.len(), tree.node_count(), tree.height());
    for o in late.iter().cloned() {
        tree.insert(o)?;
    }
    let report = validate(&tree);
    println!("after inserts: {} objects, height {}, valid {}", report.objects, report.height, report.is_valid());

    let q = &late[0];
    let (hits, stats) = knn_search_with_stats(&tree, &q.signature, &q.mbr, 5);
    let oracle = linear_knn(tree.objects(), &q.signature, 5);
    assert_eq!(hits, oracle);
    println!("top-5 for {}: {:?}", q.id, hits.ids().collect::<Vec<_>>());
    println!(
        "expanded {} nodes, {} similarities, pruned {} by mbr and {} by bound",
        stats.nodes_expanded, stats.similarities_computed, stats.mbr_pruned, stats.bound_pruned
    );

    let mut buf = Vec::new();
    write_index(&tree, &mut buf)?;
    let back = read_index(&mut buf.as_slice())?;
    println!("{} bytes on disk, reloaded {} objects", buf.len(), back.len());
    Ok(())
}
