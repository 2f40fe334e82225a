//! Label dictionary: string <-> [`LabelId`] encoding plus the key/value
//! grouping rings.
//!
//! Keys (e.g. `Gender`) and values (e.g. `Male`) are interned into the same id
//! space. A value is attached to at most one key; the values of a key form a
//! singly linked list threaded through a dense array indexed by label id, so
//! grouping costs two `u32` per label regardless of how many groups exist.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::ids::LabelId;

/// Key/value label grouping stored in place.
///
/// `ring[v]` is the next value-label of the same key (0 ends the list),
/// `key_of[v]` the owning key (0 = ungrouped), `head[k]` the first value of key `k`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroupRings {
    pub(crate) ring: Vec<u32>,
    pub(crate) key_of: Vec<u32>,
    pub(crate) head: Vec<u32>,
}

impl GroupRings {
    fn ensure_len(&mut self, len: usize) {
        if self.ring.len() < len {
            self.ring.resize(len, 0);
            self.key_of.resize(len, 0);
            self.head.resize(len, 0);
        }
    }

    fn get(v: &[u32], i: LabelId) -> u32 {
        v.get(i.index()).copied().unwrap_or(0)
    }

    /// Key owning `value`, if grouped.
    pub fn key_of(&self, value: LabelId) -> Option<LabelId> {
        match Self::get(&self.key_of, value) {
            0 => None,
            k => Some(LabelId(k)),
        }
    }

    /// Iterate the values of `key` from the head of its ring.
    pub fn values(&self, key: LabelId) -> RingIter<'_> {
        RingIter {
            ring: &self.ring,
            cur: Self::get(&self.head, key),
        }
    }

    /// Number of grouped values over all keys.
    pub fn grouped_count(&self) -> usize {
        self.key_of.iter().filter(|&&k| k != 0).count()
    }

    pub fn heap_bytes(&self) -> usize {
        (self.ring.len() + self.key_of.len() + self.head.len()) * std::mem::size_of::<u32>()
    }
}

pub struct RingIter<'a> {
    ring: &'a [u32],
    cur: u32,
}

impl Iterator for RingIter<'_> {
    type Item = LabelId;

    fn next(&mut self) -> Option<LabelId> {
        if self.cur == 0 {
            return None;
        }
        let id = self.cur;
        self.cur = self.ring[id as usize];
        Some(LabelId(id))
    }
}

/// Append-only string dictionary. Id 0 is reserved and never handed out.
#[derive(Debug, Clone)]
pub struct LabelDict {
    strings: Vec<String>,
    lookup: HashMap<String, LabelId>,
    groups: GroupRings,
}

impl Default for LabelDict {
    fn default() -> Self {
        Self::new()
    }
}

impl PartialEq for LabelDict {
    fn eq(&self, other: &Self) -> bool {
        self.strings == other.strings && self.groups == other.groups
    }
}

impl LabelDict {
    pub fn new() -> Self {
        LabelDict {
            // slot 0 is the sentinel
            strings: vec![String::new()],
            lookup: HashMap::new(),
            groups: GroupRings::default(),
        }
    }

    /// Interns every label in order. Used to pin a known numbering.
    pub fn seeded<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut dict = Self::new();
        for l in labels {
            dict.intern(l.as_ref())?;
        }
        Ok(dict)
    }

    pub fn intern(&mut self, label: &str) -> Result<LabelId> {
        if label.is_empty() {
            return Err(Error::InvalidLabel(label.to_owned()));
        }
        if let Some(&id) = self.lookup.get(label) {
            return Ok(id);
        }
        let next = self.strings.len();
        if next >= u32::MAX as usize {
            return Err(Error::CapacityExceeded("label dictionary is full".into()));
        }
        let id = LabelId(next as u32);
        self.strings.push(label.to_owned());
        self.lookup.insert(label.to_owned(), id);
        Ok(id)
    }

    pub fn get(&self, label: &str) -> Option<LabelId> {
        self.lookup.get(label).copied()
    }

    pub fn resolve(&self, id: LabelId) -> Result<&str> {
        if id.is_null() {
            return Err(Error::UnknownLabelId(id));
        }
        self.strings
            .get(id.index())
            .map(String::as_str)
            .ok_or(Error::UnknownLabelId(id))
    }

    pub fn contains_id(&self, id: LabelId) -> bool {
        !id.is_null() && id.index() < self.strings.len()
    }

    /// Number of assigned labels (excludes the sentinel).
    pub fn len(&self) -> usize {
        self.strings.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The next id `intern` would assign.
    pub fn next_id(&self) -> LabelId {
        LabelId(self.strings.len() as u32)
    }

    /// Iterate `(id, string)` in id order.
    pub fn iter(&self) -> impl Iterator<Item = (LabelId, &str)> {
        self.strings
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, s)| (LabelId(i as u32), s.as_str()))
    }

    /// Puts `value` on the ring of `key`. Re-adding under the same key is a no-op.
    pub fn group_add(&mut self, key: LabelId, value: LabelId) -> Result<()> {
        for id in [key, value] {
            if !self.contains_id(id) {
                return Err(Error::UnknownLabelId(id));
            }
        }
        if let Some(existing) = self.groups.key_of(value) {
            if existing == key {
                return Ok(());
            }
            return Err(Error::AlreadyGrouped {
                value,
                existing,
                requested: key,
            });
        }
        let g = &mut self.groups;
        g.ensure_len(self.strings.len());
        g.ring[value.index()] = g.head[key.index()];
        g.head[key.index()] = value.0;
        g.key_of[value.index()] = key.0;
        Ok(())
    }

    pub fn values_of(&self, key: LabelId) -> Vec<LabelId> {
        self.groups.values(key).collect()
    }

    pub fn key_of(&self, value: LabelId) -> Option<LabelId> {
        self.groups.key_of(value)
    }

    pub fn groups(&self) -> &GroupRings {
        &self.groups
    }

    /// Counted bytes: string payloads, the id->string table, the lookup map and rings.
    pub fn heap_bytes(&self) -> usize {
        let payload: usize = self.strings.iter().map(|s| s.len()).sum();
        let table = self.strings.len() * std::mem::size_of::<String>();
        let map = crate::mem::hash_map_bytes::<String, LabelId>(self.lookup.capacity()) + payload;
        payload + table + map + self.groups.heap_bytes()
    }

    pub(crate) fn from_parts(strings: Vec<String>, groups: GroupRings) -> Result<Self> {
        let mut dict = Self::new();
        for s in strings {
            let expect = dict.next_id();
            if dict.intern(&s)? != expect {
                return Err(Error::InvalidLabel(format!(
                    "duplicate dictionary entry {s:?}"
                )));
            }
        }
        dict.groups = groups;
        Ok(dict)
    }

    pub(crate) fn strings(&self) -> &[String] {
        &self.strings[1..]
    }
}
