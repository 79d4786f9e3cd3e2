use crate::error::{Error, Result};
use crate::signatures::{DimId, Signature};

/// Dim-wise maximum over signatures of one kind; never renormalized.
pub fn aggregate_signatures<'a>(sigs: impl IntoIterator<Item = &'a Signature>) -> Result<Signature> {
    let mut it = sigs.into_iter();
    let first = it.next().ok_or_else(|| Error::param("cannot aggregate an empty list"))?;
    let kind = first.kind();
    let mut acc: Vec<(DimId, f64)> = first.iter().collect();
    for s in it {
        if s.kind() != kind {
            return Err(Error::KindMismatch(kind.to_string(), s.kind().to_string()));
        }
        acc = max_merge(&acc, s);
    }
    let (dims, weights) = acc.into_iter().unzip();
    Ok(Signature::from_sorted_unchecked(kind, dims, weights, false))
}

fn max_merge(acc: &[(DimId, f64)], s: &Signature) -> Vec<(DimId, f64)> {
    let (d, w) = (s.dims(), s.weights());
    let mut out = Vec::with_capacity(acc.len() + d.len());
    let (mut i, mut j) = (0, 0);
    while i < acc.len() || j < d.len() {
        if j == d.len() || (i < acc.len() && acc[i].0 < d[j]) {
            out.push(acc[i]);
            i += 1;
        } else if i == acc.len() || d[j] < acc[i].0 {
            out.push((d[j], w[j]));
            j += 1;
        } else {
            out.push((d[j], acc[i].1.max(w[j])));
            i += 1;
            j += 1;
        }
    }
    out
}

/// Raises `agg` to cover `s`, in place.
pub(crate) fn absorb(agg: &mut Signature, s: &Signature) {
    let (kind, dims, weights, _) = std::mem::replace(agg, Signature::empty(s.kind())).into_parts();
    let acc: Vec<(DimId, f64)> = dims.into_iter().zip(weights).collect();
    let (dims, weights) = max_merge(&acc, s).into_iter().unzip();
    *agg = Signature::from_sorted_unchecked(kind, dims, weights, false);
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::signatures::{similarity, SignatureKind};

    fn sig(e: &[(u32, f64)]) -> Signature {
        Signature::from_entries(SignatureKind::Spatial, e.iter().copied())
    }

    #[test]
    fn single_is_itself() {
        let s = sig(&[(1, 0.6), (2, 0.8)]);
        let a = aggregate_signatures([&s]).unwrap();
        assert_eq!(a.dims(), s.dims());
        assert_eq!(a.weights(), s.weights());
    }

    #[test]
    fn shared_point_takes_max() {
        let o1 = sig(&[(8, 0.3), (1, 0.9)]);
        let o2 = sig(&[(8, 0.5), (4, 0.2)]);
        let a = aggregate_signatures([&o1, &o2]).unwrap();
        assert_eq!(a.get(8), Some(0.5));
        assert_eq!(a.dims(), &[1, 4, 8]);
        assert!(!a.is_normalized());
    }

    #[test]
    fn empty_and_mixed_rejected() {
        assert!(aggregate_signatures(std::iter::empty()).is_err());
        let s = sig(&[(1, 1.0)]);
        let t = Signature::from_entries(SignatureKind::Sequential { q: 2 }, [(1, 1.0)]);
        assert!(aggregate_signatures([&s, &t]).is_err());
    }

    #[test]
    fn absorb_matches_aggregate() {
        let a = sig(&[(1, 0.2), (5, 0.9)]);
        let b = sig(&[(0, 0.4), (5, 0.1), (9, 0.3)]);
        let mut agg = a.clone();
        absorb(&mut agg, &b);
        assert_eq!(agg, aggregate_signatures([&a, &b]).unwrap());
    }

    proptest! {
        #[test]
        fn aggregate_bounds_every_member(
            members in prop::collection::vec(prop::collection::vec((0u32..40, 0.01f64..1.0), 1..8), 1..6),
            query in prop::collection::vec((0u32..40, 0.01f64..1.0), 1..8),
        ) {
            let sigs: Vec<Signature> = members.iter().map(|m| sig(m).normalized()).collect();
            let q = sig(&query).normalized();
            let agg = aggregate_signatures(&sigs).unwrap();
            let bound = agg.dot(&q);
            for s in &sigs {
                prop_assert!(bound >= s.dot(&q));
                prop_assert!(bound >= similarity(s, &q));
            }
        }
    }
}
