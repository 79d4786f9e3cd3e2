//! Binary index layout, all integers and floats little-endian:
//!
//! ```text
//! header:  magic "WRTREE\0\0" | version u32 | capacity u32 | n_objects u64
//!          | n_nodes u64 | kind tag u8 | kind param a u32 | kind param b u32
//! nodes:   post-order; each node is
//!          tag u8 (0 = holds objects, 1 = holds nodes) | child count u32
//!          | mbr 4 x f64 | aggregate signature
//!          then, for tag 0, each object: id (u32 len + utf-8) | mbr | signature
//! signature: normalized u8 | len u32 | len x (dim u32, weight f64)
//! ```
//!
//! A tag-1 node's children are the `count` most recently completed nodes.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use super::tree::{Children, IndexedObject, Node, NodeId, WrTree};
use crate::error::{Error, Result};
use crate::reduction::Mbr;
use crate::signatures::{Signature, SignatureKind};

pub const MAGIC: &[u8; 8] = b"WRTREE\0\0";
pub const VERSION: u32 = 1;

fn kind_parts(kind: SignatureKind) -> (u8, u32, u32) {
    match kind {
        SignatureKind::Spatial => (0, 0, 0),
        SignatureKind::Sequential { q } => (1, q, 0),
        SignatureKind::Spatiotemporal { grid, bins } => (2, grid, bins),
    }
}

fn kind_from(tag: u8, a: u32, b: u32) -> Result<SignatureKind> {
    match tag {
        0 => Ok(SignatureKind::Spatial),
        1 => Ok(SignatureKind::Sequential { q: a }),
        2 => Ok(SignatureKind::Spatiotemporal { grid: a, bins: b }),
        t => Err(Error::Format(format!("unknown signature kind tag {t}"))),
    }
}

fn write_mbr(w: &mut impl Write, m: &Mbr) -> Result<()> {
    for v in [m.min_lon, m.min_lat, m.max_lon, m.max_lat] {
        w.write_f64::<LE>(v)?;
    }
    Ok(())
}

fn read_mbr(r: &mut impl Read) -> Result<Mbr> {
    let mut v = [0.0; 4];
    for x in &mut v {
        *x = r.read_f64::<LE>()?;
    }
    Ok(Mbr::new(v[0], v[1], v[2], v[3]))
}

fn write_sig(w: &mut impl Write, s: &Signature) -> Result<()> {
    w.write_u8(s.is_normalized() as u8)?;
    w.write_u32::<LE>(s.len() as u32)?;
    for (d, x) in s.iter() {
        w.write_u32::<LE>(d)?;
        w.write_f64::<LE>(x)?;
    }
    Ok(())
}

fn read_sig(r: &mut impl Read, kind: SignatureKind) -> Result<Signature> {
    let normalized = r.read_u8()? != 0;
    let len = r.read_u32::<LE>()? as usize;
    let mut dims = Vec::with_capacity(len.min(1 << 20));
    let mut weights = Vec::with_capacity(len.min(1 << 20));
    for _ in 0..len {
        let d = r.read_u32::<LE>()?;
        if dims.last().is_some_and(|&p| p >= d) {
            return Err(Error::Format("signature dims out of order".into()));
        }
        dims.push(d);
        weights.push(r.read_f64::<LE>()?);
    }
    Ok(Signature::from_sorted_unchecked(kind, dims, weights, normalized))
}

pub fn write_index(tree: &WrTree, w: &mut impl Write) -> Result<()> {
    let kind = tree
        .objects
        .first()
        .map(|o| o.signature.kind())
        .unwrap_or(SignatureKind::Spatial);
    let (tag, a, b) = kind_parts(kind);
    w.write_all(MAGIC)?;
    w.write_u32::<LE>(VERSION)?;
    w.write_u32::<LE>(tree.capacity as u32)?;
    w.write_u64::<LE>(tree.objects.len() as u64)?;
    let order = post_order(tree);
    w.write_u64::<LE>(order.len() as u64)?;
    w.write_u8(tag)?;
    w.write_u32::<LE>(a)?;
    w.write_u32::<LE>(b)?;
    for n in order {
        let node = &tree.nodes[n];
        let tag = matches!(node.children, Children::Nodes(_)) as u8;
        w.write_u8(tag)?;
        w.write_u32::<LE>(node.children.len() as u32)?;
        write_mbr(w, &node.mbr)?;
        write_sig(w, &node.aggregate)?;
        if let Children::Objects(v) = &node.children {
            for &o in v {
                let obj = &tree.objects[o];
                w.write_u32::<LE>(obj.id.len() as u32)?;
                w.write_all(obj.id.as_bytes())?;
                write_mbr(w, &obj.mbr)?;
                write_sig(w, &obj.signature)?;
            }
        }
    }
    Ok(())
}

fn post_order(tree: &WrTree) -> Vec<NodeId> {
    let mut out = Vec::new();
    let mut stack: Vec<(NodeId, bool)> = tree.root.map(|r| (r, false)).into_iter().collect();
    while let Some((n, expanded)) = stack.pop() {
        if expanded {
            out.push(n);
            continue;
        }
        stack.push((n, true));
        if let Children::Nodes(v) = &tree.nodes[n].children {
            stack.extend(v.iter().rev().map(|&c| (c, false)));
        }
    }
    out
}

pub fn read_index(r: &mut impl Read) -> Result<WrTree> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a WR-tree index file".into()));
    }
    let version = r.read_u32::<LE>()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported index version {version}")));
    }
    let capacity = r.read_u32::<LE>()? as usize;
    let n_objects = r.read_u64::<LE>()? as usize;
    let n_nodes = r.read_u64::<LE>()? as usize;
    let kind = kind_from(r.read_u8()?, r.read_u32::<LE>()?, r.read_u32::<LE>()?)?;

    let mut tree = WrTree::empty(capacity)?;
    let mut done: Vec<NodeId> = Vec::new();
    for _ in 0..n_nodes {
        let tag = r.read_u8()?;
        let count = r.read_u32::<LE>()? as usize;
        let mbr = read_mbr(r)?;
        let aggregate = read_sig(r, kind)?;
        let children = match tag {
            0 => {
                let mut v = Vec::with_capacity(count);
                for _ in 0..count {
                    let len = r.read_u32::<LE>()? as usize;
                    let mut buf = vec![0u8; len];
                    r.read_exact(&mut buf)?;
                    let id = String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))?;
                    let mbr = read_mbr(r)?;
                    let signature = read_sig(r, kind)?;
                    let idx = tree.objects.len();
                    if tree.ids.insert(id.clone(), idx).is_some() {
                        return Err(Error::DuplicateId(id));
                    }
                    tree.objects.push(IndexedObject { id, signature, mbr });
                    v.push(idx);
                }
                Children::Objects(v)
            }
            1 => {
                if count > done.len() {
                    return Err(Error::Format("node stream references missing children".into()));
                }
                Children::Nodes(done.split_off(done.len() - count))
            }
            t => return Err(Error::Format(format!("unknown node tag {t}"))),
        };
        tree.nodes.push(Node {
            children,
            aggregate,
            mbr,
        });
        done.push(tree.nodes.len() - 1);
    }
    if done.len() > 1 || tree.objects.len() != n_objects {
        return Err(Error::Format("index stream is inconsistent with its header".into()));
    }
    tree.root = done.pop();
    Ok(tree)
}

pub fn save_index(tree: &WrTree, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_index(tree, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_index(path: impl AsRef<Path>) -> Result<WrTree> {
    read_index(&mut BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wrtree::{bulk_load, knn_search, validate};

    fn tree(n: u32) -> WrTree {
        let objs = (0..n)
            .map(|i| {
                let s = Signature::from_entries(SignatureKind::Sequential { q: 2 }, [(i, 1.0), (i / 4, 0.5)])
                    .normalized();
                IndexedObject::new(format!("obj-{i}"), s, Mbr::new(i as f64, 0.0, i as f64 + 2.0, 1.0))
            })
            .collect();
        bulk_load(objs, 4).unwrap()
    }

    #[test]
    fn round_trip_preserves_answers() {
        let t = tree(60);
        let mut buf = Vec::new();
        write_index(&t, &mut buf).unwrap();
        let back = read_index(&mut buf.as_slice()).unwrap();
        assert!(validate(&back).is_valid());
        assert_eq!(back.len(), 60);
        assert_eq!(back.height(), t.height());
        for o in t.objects() {
            assert_eq!(
                knn_search(&t, &o.signature, &o.mbr, 5),
                knn_search(&back, &o.signature, &o.mbr, 5)
            );
        }
    }

    #[test]
    fn empty_round_trip() {
        let t = WrTree::empty(8).unwrap();
        let mut buf = Vec::new();
        write_index(&t, &mut buf).unwrap();
        let back = read_index(&mut buf.as_slice()).unwrap();
        assert!(back.is_empty());
        assert_eq!(back.capacity(), 8);
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(read_index(&mut &b"NOTATREE0000"[..]), Err(Error::Format(_))));
        let mut buf = Vec::new();
        write_index(&tree(10), &mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(read_index(&mut buf.as_slice()).is_err());
    }
}
