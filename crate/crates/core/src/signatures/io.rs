//! JSON-lines signature files.
//!
//! One object per line:
//!
//! ```text
//! {"object_id":"o1","kind":{"type":"spatial"},"entries":[[12,0.8],[40,0.6]],"reduced_m":10}
//! ```
//!
//! `entries` holds `[dim, weight]` pairs in ascending dim order; weights are
//! written in shortest round-trip decimal form. `reduced_m` is present only
//! for CUT-reduced signatures.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::signature::{DimId, Signature, SignatureKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignatureRecord {
    pub object_id: String,
    pub kind: SignatureKind,
    pub entries: Vec<(DimId, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduced_m: Option<usize>,
}

impl SignatureRecord {
    pub fn new(object_id: impl Into<String>, sig: &Signature, reduced_m: Option<usize>) -> Self {
        SignatureRecord {
            object_id: object_id.into(),
            kind: sig.kind(),
            entries: sig.iter().collect(),
            reduced_m,
        }
    }

    /// Rebuilds the signature; stored weights are taken as final, and the
    /// normalized flag is restored when the vector has unit length.
    pub fn signature(&self) -> Signature {
        let s = Signature::from_entries(self.kind, self.entries.iter().copied());
        let norm = s.l2_norm();
        let (kind, dims, weights, _) = s.into_parts();
        let unit = !dims.is_empty() && (norm - 1.0).abs() <= super::signature::NORM_TOL;
        Signature::from_sorted_unchecked(kind, dims, weights, unit)
    }
}

pub fn write_signatures<W: Write>(mut w: W, records: &[SignatureRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_signatures<R: BufRead>(r: R) -> Result<Vec<SignatureRecord>> {
    let mut out = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SignatureRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Format(format!("signature line {}: {e}", n + 1)))?;
        out.push(rec);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(entries in prop::collection::vec((0u32..1000, 0.001f64..10.0), 1..30)) {
            let sig = Signature::from_entries(SignatureKind::Spatial, entries).normalized();
            let rec = SignatureRecord::new("x", &sig, Some(5));
            let mut buf = Vec::new();
            write_signatures(&mut buf, std::slice::from_ref(&rec)).unwrap();
            let back = read_signatures(buf.as_slice()).unwrap();
            prop_assert_eq!(&back[0], &rec);
            prop_assert_eq!(back[0].signature(), sig);
        }
    }

    #[test]
    fn reduced_m_is_optional() {
        let line = r#"{"object_id":"a","kind":{"type":"sequential","q":2},"entries":[[1,1.0]]}"#;
        let recs = read_signatures(line.as_bytes()).unwrap();
        assert_eq!(recs[0].reduced_m, None);
        assert_eq!(recs[0].kind, SignatureKind::Sequential { q: 2 });
        assert!(recs[0].signature().is_normalized());
    }

    #[test]
    fn bad_line_reports_position() {
        let err = read_signatures("\n{oops}\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }
}
