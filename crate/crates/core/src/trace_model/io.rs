//! CSV formats for raw traces, anchors and calibrated traces.
//!
//! All files carry a header row and are UTF-8:
//!
//! * raw traces: `object_id,lon,lat,timestamp`
//! * anchors: `anchor_id,lon,lat`
//! * calibrated traces: `object_id,anchor_id,timestamp`
//!
//! Timestamps are integer epoch seconds. Readers group rows by object in
//! order of first appearance.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::anchors::{Anchor, AnchorSet};
use super::geo::DistanceMetric;
use super::trace::{RawPoint, Trace, TracePoint};
use crate::error::Result;

#[derive(Debug, Serialize, Deserialize)]
struct RawRow {
    object_id: String,
    lon: f64,
    lat: f64,
    timestamp: i64,
}

#[derive(Debug, Serialize, Deserialize)]
struct CalibratedRow {
    object_id: String,
    anchor_id: u32,
    timestamp: i64,
}

fn group<T>(rows: impl Iterator<Item = Result<(String, T)>>) -> Result<Vec<(String, Vec<T>)>> {
    let mut order: Vec<(String, Vec<T>)> = Vec::new();
    let mut pos: HashMap<String, usize> = HashMap::new();
    for row in rows {
        let (id, item) = row?;
        match pos.get(&id) {
            Some(&i) => order[i].1.push(item),
            None => {
                pos.insert(id.clone(), order.len());
                order.push((id, vec![item]));
            }
        }
    }
    Ok(order)
}

pub fn read_raw_traces<R: Read>(reader: R) -> Result<Vec<(String, Vec<RawPoint>)>> {
    let mut rdr = csv::Reader::from_reader(reader);
    group(rdr.deserialize::<RawRow>().map(|r| {
        let r = r?;
        Ok((r.object_id, RawPoint::new(r.lon, r.lat, r.timestamp)))
    }))
}

pub fn write_raw_traces<W: Write>(writer: W, traces: &[(String, Vec<RawPoint>)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for (id, points) in traces {
        for p in points {
            w.serialize(RawRow {
                object_id: id.clone(),
                lon: p.lon,
                lat: p.lat,
                timestamp: p.t,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_anchors<R: Read>(reader: R, metric: DistanceMetric) -> Result<AnchorSet> {
    let mut rdr = csv::Reader::from_reader(reader);
    let anchors = rdr
        .deserialize::<Anchor>()
        .collect::<std::result::Result<Vec<_>, _>>()?;
    AnchorSet::with_metric(anchors, metric)
}

pub fn write_anchors<W: Write>(writer: W, anchors: &AnchorSet) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for a in anchors.anchors() {
        w.serialize(a)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads calibrated traces; points within an object are sorted by time.
pub fn read_calibrated<R: Read>(reader: R) -> Result<Vec<Trace>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let grouped = group(rdr.deserialize::<CalibratedRow>().map(|r| {
        let r = r?;
        Ok((
            r.object_id,
            TracePoint {
                anchor: r.anchor_id,
                t: r.timestamp,
            },
        ))
    }))?;
    Ok(grouped
        .into_iter()
        .map(|(id, mut points)| {
            points.sort_by_key(|p| p.t);
            Trace::new(id, points)
        })
        .collect())
}

pub fn write_calibrated<W: Write>(writer: W, traces: &[Trace]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    // Keep the header even when there are no rows.
    w.write_record(["object_id", "anchor_id", "timestamp"])?;
    for t in traces {
        for p in &t.points {
            w.write_record([
                t.object_id.clone(),
                p.anchor.to_string(),
                p.t.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibrated_round_trip() {
        let traces = vec![
            Trace::from_pairs("b", &[(3, 10), (1, 20)]),
            Trace::from_pairs("a", &[(0, 5)]),
        ];
        let mut buf = Vec::new();
        write_calibrated(&mut buf, &traces).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("object_id,anchor_id,timestamp\n"));
        assert_eq!(read_calibrated(buf.as_slice()).unwrap(), traces);
    }

    #[test]
    fn raw_rows_group_by_first_appearance() {
        let text = "object_id,lon,lat,timestamp\nx,1.0,2.0,5\ny,1.5,2.5,6\nx,1.1,2.1,7\n";
        let got = read_raw_traces(text.as_bytes()).unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].0, "x");
        assert_eq!(got[0].1.len(), 2);
        assert_eq!(got[1].1[0], RawPoint::new(1.5, 2.5, 6));
    }

    #[test]
    fn anchors_round_trip() {
        let set = AnchorSet::from_coords(&[(1.0, 2.0), (3.0, 4.0)], DistanceMetric::Planar).unwrap();
        let mut buf = Vec::new();
        write_anchors(&mut buf, &set).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("anchor_id,lon,lat"));
        let back = read_anchors(buf.as_slice(), DistanceMetric::Planar).unwrap();
        assert_eq!(back.anchors(), set.anchors());
    }

    #[test]
    fn malformed_row_is_an_error() {
        let text = "object_id,anchor_id,timestamp\na,notanumber,3\n";
        assert!(read_calibrated(text.as_bytes()).is_err());
    }
}
