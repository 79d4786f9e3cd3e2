use std::collections::HashMap;

use super::run::LinkingRun;
use crate::error::{Error, Result};
use crate::signatures::{similarity, Signature};

/// Re-orders each query's candidates by similarity over larger signatures.
///
/// Candidate sets are unchanged; equal scores keep their original order.
pub fn rerank(
    run: &LinkingRun,
    query_sigs: &HashMap<String, Signature>,
    reference_sigs: &HashMap<String, Signature>,
) -> Result<LinkingRun> {
    let mut out = run.clone();
    for (q, result) in out.results.iter_mut() {
        if result.is_empty() {
            continue;
        }
        let qs = query_sigs.get(q).ok_or_else(|| Error::MissingObject(q.clone()))?;
        for n in result.neighbors.iter_mut() {
            let ds = reference_sigs
                .get(&n.id)
                .ok_or_else(|| Error::MissingObject(n.id.clone()))?;
            if ds.kind() != qs.kind() {
                return Err(Error::KindMismatch(qs.kind().to_string(), ds.kind().to_string()));
            }
            n.similarity = similarity(qs, ds);
        }
        result.neighbors.sort_by(|a, b| b.similarity.total_cmp(&a.similarity));
    }
    Ok(out)
}
