//! Binary snapshot of a [`Graph`] and its label structures.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! header   "KGLB" | version: u16 | endian tag: u16 (0xFEFF)
//! section  id: u16 | length: u64 | payload[length]      (repeated)
//! ```
//!
//! Sections are written in a fixed order: dictionary, group rings, node
//! registry, node DLS, edge registry, edge DLS, node keys, edge array.
//! Strings are a `u32` byte length followed by UTF-8. Loaders skip section ids
//! they do not know.

use log::warn;

use crate::dictionary::{GroupRings, LabelDict};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::ids::{LabelId, TupleId, NIL};
use crate::label_store::{LabelStore, SingleDls};
use crate::tuple_registry::TupleRegistry;

pub const MAGIC: &[u8; 4] = b"KGLB";
pub const VERSION: u16 = 1;
pub const ENDIAN_TAG: u16 = 0xFEFF;

pub mod section {
    pub const DICTIONARY: u16 = 1;
    pub const GROUP_RINGS: u16 = 2;
    pub const NODE_REGISTRY: u16 = 3;
    pub const NODE_DLS: u16 = 4;
    pub const EDGE_REGISTRY: u16 = 5;
    pub const EDGE_DLS: u16 = 6;
    pub const NODE_KEYS: u16 = 7;
    pub const EDGES: u16 = 8;
}

const HEADER_LEN: usize = 8;

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u16(&mut self, v: u16) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn len32(&mut self, n: usize) {
        self.u32(u32::try_from(n).expect("length fits in u32"));
    }

    fn str(&mut self, s: &str) {
        self.len32(s.len());
        self.buf.extend_from_slice(s.as_bytes());
    }

    fn u32s(&mut self, v: &[u32]) {
        self.buf.reserve(v.len() * 4);
        for &x in v {
            self.u32(x);
        }
    }

    fn section(&mut self, id: u16, body: impl FnOnce(&mut Writer)) {
        self.u16(id);
        let len_at = self.buf.len();
        self.u64(0);
        body(self);
        let len = (self.buf.len() - len_at - 8) as u64;
        self.buf[len_at..len_at + 8].copy_from_slice(&len.to_le_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    section: u16,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8], section: u16) -> Self {
        Reader {
            buf,
            pos: 0,
            section,
        }
    }

    fn corrupt(&self, message: impl Into<String>) -> Error {
        Error::CorruptSnapshot {
            section: self.section,
            message: message.into(),
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(self.corrupt(format!(
                "truncated: need {n} bytes at offset {}, have {}",
                self.pos,
                self.buf.len() - self.pos
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// A count whose elements occupy at least `min_elem` bytes each; rejects
    /// counts the remaining payload cannot hold.
    fn count(&mut self, wide: bool, min_elem: usize) -> Result<usize> {
        let n = if wide {
            self.u64()?
        } else {
            self.u32()? as u64
        };
        let remaining = (self.buf.len() - self.pos) as u64;
        if min_elem > 0 && n.saturating_mul(min_elem as u64) > remaining {
            return Err(self.corrupt(format!("count {n} exceeds the section payload")));
        }
        Ok(n as usize)
    }

    fn string(&mut self) -> Result<String> {
        let n = self.count(false, 1)?;
        let bytes = self.take(n)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| self.corrupt("invalid UTF-8"))
    }

    fn u32s(&mut self, n: usize) -> Result<Vec<u32>> {
        let bytes = self.take(n.checked_mul(4).ok_or_else(|| self.corrupt("overflow"))?)?;
        Ok(bytes
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(self.corrupt(format!("{} trailing bytes", self.buf.len() - self.pos)));
        }
        Ok(())
    }
}

fn write_registry(w: &mut Writer, r: &TupleRegistry) {
    debug_assert_eq!(r.index2labels.len(), r.refcount.len());
    w.u32(r.maxid);
    w.len32(r.index2labels.len());
    for (set, &rc) in r.index2labels.iter().zip(&r.refcount) {
        w.u32(rc);
        w.len32(set.len());
        for l in set.iter() {
            w.u32(l.0);
        }
    }
    w.len32(r.recycle.len());
    for t in &r.recycle {
        w.u32(t.0);
    }
    w.len32(r.label2indices.len());
}

fn read_registry(r: &mut Reader, labels: usize) -> Result<TupleRegistry> {
    let maxid = r.u32()?;
    let n = r.count(false, 8)?;
    let mut index2labels = Vec::with_capacity(n);
    let mut refcount = Vec::with_capacity(n);
    for _ in 0..n {
        refcount.push(r.u32()?);
        let k = r.count(false, 4)?;
        let labels: Box<[LabelId]> = r.u32s(k)?.into_iter().map(LabelId).collect();
        index2labels.push(labels);
    }
    let k = r.count(false, 4)?;
    let recycle: Vec<TupleId> = r.u32s(k)?.into_iter().map(TupleId).collect();
    let label2indices_len = r.u32()? as usize;
    r.finish()?;
    // the per-label index grows by doubling, so it never exceeds twice the label count
    if label2indices_len > 2 * (labels + 1) {
        return Err(r.corrupt("label index longer than the dictionary allows"));
    }
    if index2labels.iter().flatten().any(|l| l.index() > labels) {
        return Err(r.corrupt("tuple references an unknown label"));
    }
    let section = r.section;
    let reg = TupleRegistry::from_parts(index2labels, refcount, recycle, maxid, label2indices_len)
        .map_err(|e| Error::CorruptSnapshot {
            section,
            message: e.to_string(),
        })?;
    let freed = reg
        .recycle
        .iter()
        .all(|&t| !t.is_null() && t.0 <= maxid && !reg.is_live(t));
    if !freed || reg.live_count() != reg.labels2index.len() {
        return Err(r.corrupt("recycle stack inconsistent with live tuples"));
    }
    Ok(reg)
}

fn write_dls(w: &mut Writer, d: &SingleDls) {
    w.u64(d.capacity() as u64);
    w.len32(d.head.len());
    w.u32s(&d.head);
    w.u32s(&d.slots);
}

fn read_dls(r: &mut Reader) -> Result<SingleDls> {
    let cap = r.count(true, 8)?;
    let heads = r.count(false, 4)?;
    let head = r.u32s(heads)?;
    let slots = r.u32s(cap * 2)?;
    r.finish()?;
    for (i, pair) in slots.chunks_exact(2).enumerate() {
        let next = pair[1];
        if next != NIL && next as usize >= cap {
            return Err(r.corrupt(format!("entity {i} links outside the slot array")));
        }
    }
    if head.iter().any(|&h| h != NIL && h as usize >= cap) {
        return Err(r.corrupt("ring head outside the slot array"));
    }
    Ok(SingleDls { head, slots })
}

/// Serializes `g`. Same state always yields the same bytes.
pub fn dump(g: &Graph) -> Vec<u8> {
    let mut w = Writer::default();
    w.buf.extend_from_slice(MAGIC);
    w.u16(VERSION);
    w.u16(ENDIAN_TAG);

    w.section(section::DICTIONARY, |w| {
        let strings = g.dict.strings();
        w.len32(strings.len());
        for s in strings {
            w.str(s);
        }
    });
    w.section(section::GROUP_RINGS, |w| {
        let gr = g.dict.groups();
        w.len32(gr.ring.len());
        w.u32s(&gr.ring);
        w.u32s(&gr.key_of);
        w.u32s(&gr.head);
    });
    w.section(section::NODE_REGISTRY, |w| {
        write_registry(w, &g.node_labels.registry)
    });
    w.section(section::NODE_DLS, |w| write_dls(w, &g.node_labels.dls));
    w.section(section::EDGE_REGISTRY, |w| {
        write_registry(w, &g.edge_labels.registry)
    });
    w.section(section::EDGE_DLS, |w| write_dls(w, &g.edge_labels.dls));
    w.section(section::NODE_KEYS, |w| {
        w.u64(g.node_keys.len() as u64);
        for k in &g.node_keys {
            w.str(k);
        }
    });
    w.section(section::EDGES, |w| {
        w.u64(g.edges.len() as u64);
        for &(s, t) in &g.edges {
            w.u32(s);
            w.u32(t);
        }
    });
    w.buf
}

#[derive(Default)]
struct Sections<'a> {
    found: [Option<&'a [u8]>; 9],
}

impl<'a> Sections<'a> {
    fn get(&self, id: u16) -> Result<Reader<'a>> {
        self.found[id as usize]
            .map(|b| Reader::new(b, id))
            .ok_or(Error::CorruptSnapshot {
                section: id,
                message: "missing section".into(),
            })
    }
}

pub fn load(bytes: &[u8]) -> Result<Graph> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(Error::NotASnapshot);
    }
    let mut head = Reader::new(bytes, 0);
    head.take(4)?;
    let version = head.u16()?;
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let tag = head.u16()?;
    if tag != ENDIAN_TAG {
        return Err(Error::CorruptSnapshot {
            section: 0,
            message: format!("unexpected endianness tag {tag:#06x}"),
        });
    }

    let mut sections = Sections::default();
    let mut outer = Reader::new(&bytes[HEADER_LEN..], 0);
    while outer.pos < outer.buf.len() {
        let id = outer.u16()?;
        outer.section = id;
        let len = outer.u64()?;
        let len = usize::try_from(len).map_err(|_| outer.corrupt("length overflow"))?;
        let payload = outer.take(len)?;
        match sections.found.get_mut(id as usize) {
            Some(slot) if id != 0 => {
                if slot.replace(payload).is_some() {
                    return Err(outer.corrupt("duplicate section"));
                }
            }
            _ => warn!("skipping unknown snapshot section {id} ({len} bytes)"),
        }
        outer.section = 0;
    }

    let mut r = sections.get(section::DICTIONARY)?;
    let n = r.count(false, 4)?;
    let strings = (0..n).map(|_| r.string()).collect::<Result<Vec<_>>>()?;
    r.finish()?;

    let mut r = sections.get(section::GROUP_RINGS)?;
    let len = r.count(false, 12)?;
    let groups = GroupRings {
        ring: r.u32s(len)?,
        key_of: r.u32s(len)?,
        head: r.u32s(len)?,
    };
    r.finish()?;
    if len > n + 1
        || groups
            .ring
            .iter()
            .chain(&groups.key_of)
            .chain(&groups.head)
            .any(|&x| x as usize > n)
    {
        return Err(r.corrupt("group ring references an unknown label"));
    }
    let dict = LabelDict::from_parts(strings, groups).map_err(|e| Error::CorruptSnapshot {
        section: section::DICTIONARY,
        message: e.to_string(),
    })?;

    let mut stores = Vec::with_capacity(2);
    for (reg_id, dls_id) in [
        (section::NODE_REGISTRY, section::NODE_DLS),
        (section::EDGE_REGISTRY, section::EDGE_DLS),
    ] {
        let registry = read_registry(&mut sections.get(reg_id)?, n)?;
        let dls = read_dls(&mut sections.get(dls_id)?)?;
        let store = LabelStore { registry, dls };
        store.validate().map_err(|message| Error::CorruptSnapshot {
            section: dls_id,
            message,
        })?;
        stores.push(store);
    }
    let edge_labels = stores.pop().unwrap();
    let node_labels = stores.pop().unwrap();

    let mut r = sections.get(section::NODE_KEYS)?;
    let n = r.count(true, 4)?;
    let node_keys = (0..n).map(|_| r.string()).collect::<Result<Vec<_>>>()?;
    r.finish()?;

    let mut r = sections.get(section::EDGES)?;
    let n = r.count(true, 8)?;
    let flat = r.u32s(n * 2)?;
    r.finish()?;
    let edges = flat.chunks_exact(2).map(|p| (p[0], p[1])).collect();

    Graph::from_parts(dict, node_keys, edges, node_labels, edge_labels)
}

pub fn dump_to_file(g: &Graph, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, dump(g)).map_err(|e| Error::io(path, e))
}

pub fn load_from_file(path: &std::path::Path) -> Result<Graph> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    load(&bytes)
}
