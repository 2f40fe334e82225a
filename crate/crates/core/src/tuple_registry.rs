//! Interning of sorted label sets as [`TupleId`]s, with id recycling.
//!
//! Three views are kept in sync:
//! - `labels2index`: sorted label set -> tuple id,
//! - `index2labels`: tuple id -> sorted label set,
//! - `label2indices`: label id -> strictly sorted list of tuples containing it.
//!
//! A tuple is freed when the last entity referencing it lets go. Freed ids go
//! onto a stack and are handed out again before `maxid` advances, which bounds
//! the id space by the peak number of simultaneously live tuples.

use std::collections::HashMap;
use std::mem::size_of;

use crate::error::{Error, Result};
use crate::ids::{LabelId, TupleId};
use crate::mem::hash_map_bytes;

#[derive(Debug, Clone, Default)]
pub struct TupleRegistry {
    pub(crate) labels2index: HashMap<Box<[LabelId]>, TupleId>,
    pub(crate) index2labels: Vec<Box<[LabelId]>>,
    pub(crate) label2indices: Vec<Vec<TupleId>>,
    pub(crate) recycle: Vec<TupleId>,
    pub(crate) maxid: u32,
    pub(crate) refcount: Vec<u32>,
    peak_live: u32,
}

impl PartialEq for TupleRegistry {
    fn eq(&self, other: &Self) -> bool {
        // labels2index is derived from index2labels
        self.index2labels == other.index2labels
            && self.label2indices == other.label2indices
            && self.recycle == other.recycle
            && self.maxid == other.maxid
            && self.refcount == other.refcount
    }
}

/// Byte breakdown of a registry.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct RegistryBytes {
    pub labels2index: usize,
    pub index2labels: usize,
    pub label2indices: usize,
    pub refcount: usize,
    pub recycle: usize,
}

impl RegistryBytes {
    pub fn total(&self) -> usize {
        self.labels2index + self.index2labels + self.label2indices + self.refcount + self.recycle
    }
}

fn check_sorted(set: &[LabelId]) -> Result<()> {
    if set.is_empty() {
        return Err(Error::InvalidLabelSet("empty label set".into()));
    }
    if set[0].is_null() {
        return Err(Error::InvalidLabelSet("label id 0 is reserved".into()));
    }
    if set.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidLabelSet(format!(
            "labels must be strictly sorted, got {:?}",
            set.iter().map(|l| l.0).collect::<Vec<_>>()
        )));
    }
    Ok(())
}

fn grow_to<T: Default + Clone>(v: &mut Vec<T>, index: usize) {
    if index >= v.len() {
        let len = (v.len() * 2).max(index + 1);
        v.resize(len, T::default());
    }
}

impl TupleRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Interns `newpair`, returning the existing id when the set is known.
    ///
    /// A freshly issued tuple has refcount 0 until [`acquire`](Self::acquire)d.
    pub fn intern_label_set(&mut self, newpair: &[LabelId]) -> Result<TupleId> {
        check_sorted(newpair)?;
        let next_index = match self.recycle.last() {
            Some(&t) => t,
            None => {
                if self.maxid == u32::MAX - 1 {
                    return Err(Error::CapacityExceeded("tuple id space exhausted".into()));
                }
                TupleId(self.maxid + 1)
            }
        };
        if let Some(&existing) = self.labels2index.get(newpair) {
            return Ok(existing);
        }
        let pair_index = next_index;
        self.labels2index.insert(newpair.into(), pair_index);
        if self.recycle.pop().is_none() {
            self.maxid += 1;
        }
        for &label in newpair {
            grow_to(&mut self.label2indices, label.index());
            let list = &mut self.label2indices[label.index()];
            let pos = list.partition_point(|&t| t <= pair_index);
            list.insert(pos, pair_index);
        }
        grow_to(&mut self.index2labels, pair_index.index());
        grow_to(&mut self.refcount, pair_index.index());
        self.index2labels[pair_index.index()] = newpair.into();
        self.refcount[pair_index.index()] = 0;
        self.peak_live = self.peak_live.max(self.live_count() as u32);
        Ok(pair_index)
    }

    pub fn is_live(&self, t: TupleId) -> bool {
        !t.is_null()
            && t.0 <= self.maxid
            && self
                .index2labels
                .get(t.index())
                .is_some_and(|s| !s.is_empty())
    }

    pub fn acquire(&mut self, t: TupleId) -> Result<()> {
        if !self.is_live(t) {
            return Err(Error::UnknownTuple(t));
        }
        self.refcount[t.index()] += 1;
        Ok(())
    }

    /// Drops one reference. Returns `true` when this freed the tuple.
    pub fn release(&mut self, t: TupleId) -> Result<bool> {
        if !self.is_live(t) {
            return Err(Error::UnknownTuple(t));
        }
        let rc = &mut self.refcount[t.index()];
        if *rc == 0 {
            return Err(Error::RefcountUnderflow(t));
        }
        *rc -= 1;
        if *rc > 0 {
            return Ok(false);
        }
        self.free(t);
        Ok(true)
    }

    fn free(&mut self, t: TupleId) {
        let labels = std::mem::take(&mut self.index2labels[t.index()]);
        self.labels2index.remove(&labels);
        for label in labels.iter() {
            let list = &mut self.label2indices[label.index()];
            if let Ok(pos) = list.binary_search(&t) {
                list.remove(pos);
            }
        }
        self.recycle.push(t);
    }

    pub fn labels_of_tuple(&self, t: TupleId) -> Result<&[LabelId]> {
        if t.is_null() {
            return Ok(&[]);
        }
        if !self.is_live(t) {
            return Err(Error::UnknownTuple(t));
        }
        Ok(&self.index2labels[t.index()])
    }

    pub fn tuples_with_label(&self, l: LabelId) -> &[TupleId] {
        self.label2indices
            .get(l.index())
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn lookup(&self, set: &[LabelId]) -> Option<TupleId> {
        self.labels2index.get(set).copied()
    }

    pub fn refcount(&self, t: TupleId) -> u32 {
        self.refcount.get(t.index()).copied().unwrap_or(0)
    }

    pub fn maxid(&self) -> u32 {
        self.maxid
    }

    pub fn recycle_depth(&self) -> usize {
        self.recycle.len()
    }

    /// The id the next brand-new label set will receive.
    pub fn next_index(&self) -> TupleId {
        self.recycle
            .last()
            .copied()
            .unwrap_or(TupleId(self.maxid + 1))
    }

    pub fn live_count(&self) -> usize {
        self.maxid as usize - self.recycle.len()
    }

    /// High-water mark of `live_count` since construction (or load).
    pub fn peak_live(&self) -> usize {
        self.peak_live as usize
    }

    pub fn live_tuples(&self) -> impl Iterator<Item = TupleId> + '_ {
        (1..=self.maxid)
            .map(TupleId)
            .filter(move |&t| self.is_live(t))
    }

    pub fn memory(&self) -> RegistryBytes {
        let set_bytes = |s: &[LabelId]| std::mem::size_of_val(s);
        let key_payload: usize = self.labels2index.keys().map(|k| set_bytes(k)).sum();
        RegistryBytes {
            labels2index: hash_map_bytes::<Box<[LabelId]>, TupleId>(self.labels2index.capacity())
                + key_payload,
            index2labels: self.index2labels.len() * size_of::<Box<[LabelId]>>()
                + self
                    .index2labels
                    .iter()
                    .map(|s| set_bytes(s))
                    .sum::<usize>(),
            label2indices: self.label2indices.len() * size_of::<Vec<TupleId>>()
                + self
                    .label2indices
                    .iter()
                    .map(|v| v.len() * size_of::<TupleId>())
                    .sum::<usize>(),
            refcount: self.refcount.len() * size_of::<u32>(),
            recycle: self.recycle.len() * size_of::<TupleId>(),
        }
    }

    /// Rebuilds the derived indexes from the dense arrays. Used by snapshot loading.
    pub(crate) fn from_parts(
        index2labels: Vec<Box<[LabelId]>>,
        refcount: Vec<u32>,
        recycle: Vec<TupleId>,
        maxid: u32,
        label2indices_len: usize,
    ) -> Result<Self> {
        let mut labels2index = HashMap::new();
        let mut label2indices: Vec<Vec<TupleId>> = vec![Vec::new(); label2indices_len];
        for (t, set) in index2labels.iter().enumerate() {
            if set.is_empty() {
                continue;
            }
            check_sorted(set)?;
            let tid = TupleId(t as u32);
            if t == 0 || t as u32 > maxid || labels2index.insert(set.clone(), tid).is_some() {
                return Err(Error::InvalidLabelSet(format!("inconsistent tuple {t}")));
            }
            for l in set.iter() {
                if l.index() >= label2indices.len() {
                    return Err(Error::InvalidLabelSet(format!("label {l} out of range")));
                }
                // tuples visited in increasing order keeps each list sorted
                label2indices[l.index()].push(tid);
            }
        }
        let reg = TupleRegistry {
            labels2index,
            index2labels,
            label2indices,
            recycle,
            maxid,
            refcount,
            peak_live: 0,
        };
        let mut reg = reg;
        reg.peak_live = reg.live_count() as u32;
        Ok(reg)
    }
}
