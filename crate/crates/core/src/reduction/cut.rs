use crate::error::{Error, Result};
use crate::signatures::Signature;

/// Keeps the `m` heaviest dims (ties at the cut go to the lower dim id) and
/// re-normalizes the survivors.
pub fn cut_reduce(sig: &Signature, m: usize) -> Result<Signature> {
    cut_reduce_with(sig, m, true)
}

/// As [`cut_reduce`]; with `renormalize == false` the surviving weights are
/// kept exactly as they were.
pub fn cut_reduce_with(sig: &Signature, m: usize, renormalize: bool) -> Result<Signature> {
    if m < 1 {
        return Err(Error::param("CUT size m must be at least 1"));
    }
    if sig.len() <= m {
        return Ok(sig.clone());
    }
    let mut order: Vec<usize> = (0..sig.len()).collect();
    let w = sig.weights();
    let d = sig.dims();
    order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(d[a].cmp(&d[b])));
    let kept = Signature::from_entries(sig.kind(), order[..m].iter().map(|&i| (d[i], w[i])));
    Ok(if renormalize { kept.normalized() } else { kept })
}
