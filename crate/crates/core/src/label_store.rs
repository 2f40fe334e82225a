//! Entity <-> label-set association through an in-place singly linked list.
//!
//! Every entity owns exactly two `u32` slots: the tuple it belongs to and the
//! next entity on that tuple's ring. Each tuple caches one head entity. The
//! slot array is sized once from the entity capacity and never depends on how
//! many labels an entity carries; adding a label moves the entity from one
//! ring to another.

use std::mem::size_of;

use serde::Serialize;

use crate::dictionary::LabelDict;
use crate::error::{Error, Result};
use crate::ids::{EntityId, LabelId, TupleId, MAX_ENTITIES, NIL};
use crate::tuple_registry::{RegistryBytes, TupleRegistry};

/// `slots[2e]` = tuple of entity `e` (0 = unlabeled), `slots[2e + 1]` = next
/// entity on the same ring ([`NIL`] ends it). `head[t]` is the cached entry
/// entity of tuple `t` ([`NIL`] when the ring is empty).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SingleDls {
    pub(crate) head: Vec<u32>,
    pub(crate) slots: Vec<u32>,
}

impl SingleDls {
    pub fn with_capacity(entities: usize) -> Self {
        SingleDls {
            head: Vec::new(),
            slots: Self::fresh_slots(entities),
        }
    }

    fn fresh_slots(entities: usize) -> Vec<u32> {
        let mut slots = Vec::with_capacity(entities * 2);
        for _ in 0..entities {
            slots.push(0);
            slots.push(NIL);
        }
        slots
    }

    pub fn capacity(&self) -> usize {
        self.slots.len() / 2
    }

    /// Length of the slot array, always `2 * capacity`.
    pub fn slot_len(&self) -> usize {
        self.slots.len()
    }

    #[inline]
    pub fn tuple_of(&self, e: EntityId) -> TupleId {
        TupleId(self.slots[2 * e.index()])
    }

    #[inline]
    fn next_of(&self, e: u32) -> u32 {
        self.slots[2 * e as usize + 1]
    }

    pub fn head_of(&self, t: TupleId) -> Option<EntityId> {
        match self.head.get(t.index()).copied().unwrap_or(NIL) {
            NIL => None,
            e => Some(EntityId(e)),
        }
    }

    fn grow(&mut self, entities: usize) {
        let extra = entities.saturating_sub(self.capacity());
        self.slots.reserve(extra * 2);
        for _ in 0..extra {
            self.slots.push(0);
            self.slots.push(NIL);
        }
    }

    /// Push-front `e` onto the ring of `t`.
    fn link(&mut self, e: EntityId, t: TupleId) {
        if t.index() >= self.head.len() {
            let len = (self.head.len() * 2).max(t.index() + 1);
            self.head.resize(len, NIL);
        }
        let i = 2 * e.index();
        self.slots[i] = t.0;
        self.slots[i + 1] = self.head[t.index()];
        self.head[t.index()] = e.0;
    }

    /// Detach `e` from its current ring. Walks the ring to find the predecessor.
    fn unlink(&mut self, e: EntityId) {
        let t = self.tuple_of(e);
        if t.is_null() {
            return;
        }
        let after = self.next_of(e.0);
        if self.head[t.index()] == e.0 {
            self.head[t.index()] = after;
        } else {
            let mut p = self.head[t.index()];
            while self.next_of(p) != e.0 {
                p = self.next_of(p);
                debug_assert!(p != NIL, "entity {e} missing from ring of tuple {t}");
            }
            self.slots[2 * p as usize + 1] = after;
        }
        let i = 2 * e.index();
        self.slots[i] = 0;
        self.slots[i + 1] = NIL;
    }

    pub fn ring(&self, t: TupleId) -> Ring<'_> {
        Ring {
            dls: self,
            cur: self.head.get(t.index()).copied().unwrap_or(NIL),
            steps: 0,
        }
    }
}

/// Walks one tuple's ring from its cached head. Counts the slots it reads.
#[derive(Clone)]
pub struct Ring<'a> {
    dls: &'a SingleDls,
    cur: u32,
    steps: usize,
}

impl Ring<'_> {
    pub fn steps(&self) -> usize {
        self.steps
    }
}

impl Iterator for Ring<'_> {
    type Item = EntityId;

    fn next(&mut self) -> Option<EntityId> {
        if self.cur == NIL {
            return None;
        }
        let e = self.cur;
        self.cur = self.dls.next_of(e);
        self.steps += 1;
        Some(EntityId(e))
    }
}

/// Counted bytes of one label store plus the shared dictionary.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MemoryReport {
    pub slot_width: usize,
    pub dls_slots: usize,
    pub dls_head: usize,
    pub registry: RegistryBytes,
    pub dictionary: usize,
    pub total: usize,
}

/// Labels for one entity class (nodes or edges).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelStore {
    pub(crate) registry: TupleRegistry,
    pub(crate) dls: SingleDls,
}

impl LabelStore {
    pub fn new(entities: usize) -> Self {
        LabelStore {
            registry: TupleRegistry::new(),
            dls: SingleDls::with_capacity(entities),
        }
    }

    pub fn entity_count(&self) -> usize {
        self.dls.capacity()
    }

    pub fn registry(&self) -> &TupleRegistry {
        &self.registry
    }

    pub fn dls(&self) -> &SingleDls {
        &self.dls
    }

    /// Grows the entity capacity. Never shrinks.
    pub fn resize(&mut self, entities: usize) -> Result<()> {
        if entities > MAX_ENTITIES {
            return Err(Error::CapacityExceeded(format!(
                "{entities} entities exceeds the {MAX_ENTITIES} limit"
            )));
        }
        self.dls.grow(entities);
        Ok(())
    }

    fn check_entity(&self, e: EntityId) -> Result<()> {
        if e.index() >= self.entity_count() {
            return Err(Error::UnknownEntity(e));
        }
        Ok(())
    }

    pub fn tuple_of(&self, e: EntityId) -> Result<TupleId> {
        self.check_entity(e)?;
        Ok(self.dls.tuple_of(e))
    }

    /// Moves `e` from `old` to `new`, then settles refcounts.
    fn relink(&mut self, e: EntityId, old: TupleId, new: TupleId) -> Result<()> {
        if old == new {
            return Ok(());
        }
        self.dls.unlink(e);
        if !new.is_null() {
            self.dls.link(e, new);
            self.registry.acquire(new)?;
        }
        if !old.is_null() {
            self.registry.release(old)?;
        }
        Ok(())
    }

    /// Attaches one label, returning the entity's tuple afterwards.
    pub fn add_label_id(&mut self, e: EntityId, label: LabelId) -> Result<TupleId> {
        self.check_entity(e)?;
        let old = self.dls.tuple_of(e);
        let new = if old.is_null() {
            self.registry.intern_label_set(&[label])?
        } else {
            let existing = self.registry.labels_of_tuple(old)?;
            match existing.binary_search(&label) {
                Ok(_) => return Ok(old),
                Err(pos) => {
                    let mut newpair = Vec::with_capacity(existing.len() + 1);
                    newpair.extend_from_slice(&existing[..pos]);
                    newpair.push(label);
                    newpair.extend_from_slice(&existing[pos..]);
                    self.registry.intern_label_set(&newpair)?
                }
            }
        };
        self.relink(e, old, new)?;
        Ok(new)
    }

    /// Attaches several labels in one step: a single merged tuple is interned
    /// instead of one intermediate tuple per label.
    pub fn add_label_ids(&mut self, e: EntityId, labels: &[LabelId]) -> Result<TupleId> {
        self.check_entity(e)?;
        let old = self.dls.tuple_of(e);
        let existing = self.registry.labels_of_tuple(old)?;
        let mut merged: Vec<LabelId> = existing.iter().chain(labels).copied().collect();
        merged.sort_unstable();
        merged.dedup();
        if merged.len() == existing.len() {
            return Ok(old);
        }
        let new = self.registry.intern_label_set(&merged)?;
        self.relink(e, old, new)?;
        Ok(new)
    }

    pub fn remove_label_id(&mut self, e: EntityId, label: LabelId) -> Result<TupleId> {
        self.check_entity(e)?;
        let old = self.dls.tuple_of(e);
        let existing = self.registry.labels_of_tuple(old)?;
        let Ok(pos) = existing.binary_search(&label) else {
            return Ok(old);
        };
        let new = if existing.len() == 1 {
            TupleId(0)
        } else {
            let mut reduced = existing.to_vec();
            reduced.remove(pos);
            self.registry.intern_label_set(&reduced)?
        };
        self.relink(e, old, new)?;
        Ok(new)
    }

    /// Detaches every label from `e`.
    pub fn clear_labels(&mut self, e: EntityId) -> Result<()> {
        self.check_entity(e)?;
        let old = self.dls.tuple_of(e);
        self.relink(e, old, TupleId(0))
    }

    pub fn add_label(&mut self, dict: &mut LabelDict, e: EntityId, label: &str) -> Result<TupleId> {
        self.check_entity(e)?;
        let id = dict.intern(label)?;
        self.add_label_id(e, id)
    }

    pub fn add_labels<S: AsRef<str>>(
        &mut self,
        dict: &mut LabelDict,
        e: EntityId,
        labels: &[S],
    ) -> Result<TupleId> {
        self.check_entity(e)?;
        let ids = labels
            .iter()
            .map(|l| dict.intern(l.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        self.add_label_ids(e, &ids)
    }

    /// Removing a label the dictionary has never seen is a no-op.
    pub fn remove_label(&mut self, dict: &LabelDict, e: EntityId, label: &str) -> Result<TupleId> {
        self.check_entity(e)?;
        if label.is_empty() {
            return Err(Error::InvalidLabel(String::new()));
        }
        match dict.get(label) {
            Some(id) => self.remove_label_id(e, id),
            None => Ok(self.dls.tuple_of(e)),
        }
    }

    pub fn label_ids_of(&self, e: EntityId) -> Result<&[LabelId]> {
        let t = self.tuple_of(e)?;
        self.registry.labels_of_tuple(t)
    }

    /// Label strings of `e` in label-id order.
    pub fn labels_of<'d>(&self, dict: &'d LabelDict, e: EntityId) -> Result<Vec<&'d str>> {
        self.label_ids_of(e)?
            .iter()
            .map(|&l| dict.resolve(l))
            .collect()
    }

    /// Ring members of a live tuple, most recently linked first.
    pub fn entities_with_tuple(&self, t: TupleId) -> Result<Ring<'_>> {
        if !self.registry.is_live(t) {
            return Err(Error::UnknownTuple(t));
        }
        Ok(self.dls.ring(t))
    }

    pub fn entities_with_label(&self, l: LabelId) -> impl Iterator<Item = EntityId> + '_ {
        self.registry
            .tuples_with_label(l)
            .iter()
            .flat_map(move |&t| self.dls.ring(t))
    }

    /// Tuples containing every label in `labels`, by sorted-list intersection.
    pub fn tuples_with_all(&self, labels: &[LabelId]) -> Result<Vec<TupleId>> {
        if labels.is_empty() {
            return Err(Error::InvalidQuery("empty label set".into()));
        }
        let mut lists: Vec<&[TupleId]> = labels
            .iter()
            .map(|&l| self.registry.tuples_with_label(l))
            .collect();
        lists.sort_by_key(|l| l.len());
        let mut acc: Vec<TupleId> = lists[0].to_vec();
        for list in &lists[1..] {
            acc = intersect_sorted(&acc, list);
            if acc.is_empty() {
                break;
            }
        }
        Ok(acc)
    }

    pub fn entities_with_all(
        &self,
        labels: &[LabelId],
    ) -> Result<impl Iterator<Item = EntityId> + '_> {
        let tuples = self.tuples_with_all(labels)?;
        Ok(tuples.into_iter().flat_map(move |t| self.dls.ring(t)))
    }

    /// Entities currently carrying at least one label.
    pub fn labeled_count(&self) -> usize {
        self.registry
            .live_tuples()
            .map(|t| self.registry.refcount(t) as usize)
            .sum()
    }

    pub fn memory_report(&self, dict: &LabelDict) -> MemoryReport {
        let slot_width = size_of::<u32>();
        let dls_slots = self.dls.slots.len() * slot_width;
        let dls_head = self.dls.head.len() * slot_width;
        let registry = self.registry.memory();
        let dictionary = dict.heap_bytes();
        MemoryReport {
            slot_width,
            dls_slots,
            dls_head,
            registry,
            dictionary,
            total: dls_slots + dls_head + registry.total() + dictionary,
        }
    }

    /// Full structural sweep: every ring terminates, stays in range, matches
    /// the tuple slots and the refcounts, and no entity is reachable twice.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let cap = self.entity_count();
        if self.dls.slots.len() != 2 * cap {
            return Err("slot array is not two per entity".into());
        }
        let mut seen = vec![false; cap];
        let mut linked = 0usize;
        for (t, &h) in self.dls.head.iter().enumerate() {
            if h != NIL && !self.registry.is_live(TupleId(t as u32)) {
                return Err(format!("dead tuple {t} has a ring head"));
            }
        }
        for t in self.registry.live_tuples() {
            let mut n = 0usize;
            for e in self.dls.ring(t) {
                if e.index() >= cap {
                    return Err(format!("ring of {t} leaves the entity range"));
                }
                if seen[e.index()] {
                    return Err(format!("entity {e} reachable twice"));
                }
                seen[e.index()] = true;
                if self.dls.tuple_of(e) != t {
                    return Err(format!(
                        "entity {e} on ring of {t} belongs to {}",
                        self.dls.tuple_of(e)
                    ));
                }
                n += 1;
            }
            if n as u32 != self.registry.refcount(t) {
                return Err(format!(
                    "ring of {t} has {n} entities, refcount {}",
                    self.registry.refcount(t)
                ));
            }
            linked += n;
        }
        let labeled = (0..cap)
            .filter(|&e| !self.dls.tuple_of(EntityId(e as u32)).is_null())
            .count();
        if linked != labeled {
            return Err(format!("{labeled} labeled entities but {linked} on rings"));
        }
        Ok(())
    }

    /// Panicking form of [`validate`](Self::validate) for tests.
    pub fn check_invariants(&self) {
        if let Err(e) = self.validate() {
            panic!("label store invariant violated: {e}");
        }
    }
}

pub(crate) fn intersect_sorted<T: Ord + Copy>(a: &[T], b: &[T]) -> Vec<T> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{BTreeMap, BTreeSet};

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const TOM: EntityId = EntityId(0);
    const ALEX: EntityId = EntityId(1);

    fn sample_dict() -> LabelDict {
        LabelDict::seeded([
            "Female", "chess", "golf", "dance", "business", "Gender", "Interest", "Male",
        ])
        .unwrap()
    }

    #[test]
    fn incremental_adds_converge_on_one_tuple() {
        let mut d = sample_dict();
        let mut s = LabelStore::new(5);
        for e in [TOM, ALEX] {
            s.add_label(&mut d, e, "chess").unwrap();
            s.add_label(&mut d, e, "Male").unwrap();
        }
        let t = s.tuple_of(TOM).unwrap();
        assert_eq!(s.tuple_of(ALEX).unwrap(), t);
        assert_eq!(
            s.registry.labels_of_tuple(t).unwrap(),
            &[LabelId(2), LabelId(8)]
        );
        // {chess} was issued as 1, {chess, Male} as 2, then 1 was recycled
        assert_eq!(t, TupleId(2));
        assert_eq!(s.registry.recycle, vec![TupleId(1)]);
        let ring: Vec<_> = s.entities_with_tuple(t).unwrap().collect();
        assert_eq!(ring, vec![ALEX, TOM]);
        s.check_invariants();
    }

    #[test]
    fn batched_add_interns_merged_set_directly() {
        let mut d = sample_dict();
        let mut s = LabelStore::new(5);
        assert_eq!(
            s.add_labels(&mut d, TOM, &["Male", "chess"]).unwrap(),
            TupleId(1)
        );
        assert_eq!(
            s.add_labels(&mut d, ALEX, &["chess", "Male"]).unwrap(),
            TupleId(1)
        );
        let ring: BTreeSet<_> = s.entities_with_tuple(TupleId(1)).unwrap().collect();
        assert_eq!(ring, BTreeSet::from([TOM, ALEX]));
        assert_eq!(s.labels_of(&d, TOM).unwrap(), vec!["chess", "Male"]);
    }

    #[test]
    fn duplicate_label_changes_nothing() {
        let mut d = sample_dict();
        let mut s = LabelStore::new(3);
        let t = s.add_label(&mut d, TOM, "golf").unwrap();
        let before = s.clone();
        assert_eq!(s.add_label(&mut d, TOM, "golf").unwrap(), t);
        assert_eq!(s, before);
    }

    #[test]
    fn errors() {
        let mut d = sample_dict();
        let mut s = LabelStore::new(2);
        assert!(matches!(
            s.add_label(&mut d, EntityId(2), "x"),
            Err(Error::UnknownEntity(_))
        ));
        assert!(matches!(
            s.add_label(&mut d, TOM, ""),
            Err(Error::InvalidLabel(_))
        ));
        assert!(matches!(
            s.remove_label(&d, TOM, ""),
            Err(Error::InvalidLabel(_))
        ));
        assert!(matches!(
            s.labels_of(&d, EntityId(9)),
            Err(Error::UnknownEntity(_))
        ));
        assert!(matches!(
            s.entities_with_tuple(TupleId(1)),
            Err(Error::UnknownTuple(_))
        ));
        assert!(matches!(
            s.entities_with_all(&[]),
            Err(Error::InvalidQuery(_))
        ));
    }

    #[test]
    fn remove_only_label_unlabels() {
        let mut d = sample_dict();
        let mut s = LabelStore::new(2);
        let t = s.add_label(&mut d, TOM, "dance").unwrap();
        assert_eq!(s.remove_label(&d, TOM, "dance").unwrap(), TupleId(0));
        assert!(s.labels_of(&d, TOM).unwrap().is_empty());
        assert!(!s.registry.is_live(t));
        assert!(s.entities_with_tuple(t).is_err());
        s.check_invariants();
    }

    #[test]
    fn remove_unifies_with_existing_tuple() {
        let mut d = sample_dict();
        let mut s = LabelStore::new(3);
        let male_only = s.add_label(&mut d, EntityId(2), "Male").unwrap();
        s.add_labels(&mut d, TOM, &["golf", "Male"]).unwrap();
        assert_eq!(s.remove_label(&d, TOM, "golf").unwrap(), male_only);
        let ring: BTreeSet<_> = s.entities_with_tuple(male_only).unwrap().collect();
        assert_eq!(ring, BTreeSet::from([TOM, EntityId(2)]));
        s.check_invariants();
    }

    #[test]
    fn remove_absent_label_is_noop() {
        let mut d = sample_dict();
        let mut s = LabelStore::new(3);
        s.add_label(&mut d, TOM, "golf").unwrap();
        let before = s.clone();
        s.remove_label(&d, TOM, "chess").unwrap();
        s.remove_label(&d, TOM, "never-interned").unwrap();
        s.remove_label(&d, ALEX, "golf").unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn slots_fixed_at_two_per_entity() {
        let mut d = LabelDict::new();
        let n = 100;
        let mut s = LabelStore::new(n);
        let bytes = s.memory_report(&d).dls_slots;
        assert_eq!(bytes, 2 * n * 4);
        for e in 0..n {
            for k in 0..(e % 9) {
                s.add_label(&mut d, EntityId(e as u32), &format!("l{k}"))
                    .unwrap();
            }
        }
        assert_eq!(s.memory_report(&d).dls_slots, bytes);
        assert_eq!(s.dls.slot_len(), 2 * n);
    }

    #[test]
    fn resize_keeps_rings() {
        let mut d = LabelDict::new();
        let mut s = LabelStore::new(2);
        s.add_label(&mut d, TOM, "a").unwrap();
        s.resize(10).unwrap();
        assert_eq!(s.dls.slot_len(), 20);
        s.add_label(&mut d, EntityId(9), "a").unwrap();
        assert_eq!(s.entities_with_label(LabelId(1)).count(), 2);
        s.resize(3).unwrap();
        assert_eq!(s.entity_count(), 10);
        s.check_invariants();
    }

    #[test]
    fn random_ops_match_naive_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 1000u32;
        let labels: Vec<String> = (0..20).map(|i| format!("L{i}")).collect();
        let mut d = LabelDict::new();
        let mut s = LabelStore::new(n as usize);
        let mut oracle: BTreeMap<u32, BTreeSet<String>> = BTreeMap::new();
        for step in 0..100_000 {
            let e = rng.random_range(0..n);
            let l = &labels[rng.random_range(0..labels.len())];
            if rng.random_bool(0.6) {
                s.add_label(&mut d, EntityId(e), l).unwrap();
                oracle.entry(e).or_default().insert(l.clone());
            } else {
                s.remove_label(&d, EntityId(e), l).unwrap();
                if let Some(set) = oracle.get_mut(&e) {
                    set.remove(l);
                }
            }
            if step % 20_000 == 0 {
                s.check_invariants();
            }
        }
        s.check_invariants();
        tuple_registry_consistency(&s);
        for e in 0..n {
            let got: BTreeSet<String> = s
                .labels_of(&d, EntityId(e))
                .unwrap()
                .into_iter()
                .map(String::from)
                .collect();
            assert_eq!(got, oracle.get(&e).cloned().unwrap_or_default());
        }
        for l in &labels {
            let id = d.get(l).unwrap();
            let got: Vec<EntityId> = s.entities_with_label(id).collect();
            let set: BTreeSet<u32> = got.iter().map(|e| e.0).collect();
            assert_eq!(set.len(), got.len());
            let want: BTreeSet<u32> = oracle
                .iter()
                .filter(|(_, ls)| ls.contains(l))
                .map(|(&e, _)| e)
                .collect();
            assert_eq!(set, want);
        }
        for t in s.registry.live_tuples() {
            let ring = s.entities_with_tuple(t).unwrap();
            let mut probe = ring.clone();
            let len = probe.by_ref().count();
            assert_eq!(len, probe.steps());
            assert_eq!(len as u32, s.registry.refcount(t));
        }
    }

    fn tuple_registry_consistency(s: &LabelStore) {
        crate::tuple_registry::tests::check_consistency(&s.registry);
    }

    #[test]
    fn all_of_intersection() {
        let mut d = sample_dict();
        let mut s = LabelStore::new(5);
        s.add_labels(&mut d, EntityId(0), &["chess", "Male"])
            .unwrap();
        s.add_labels(&mut d, EntityId(1), &["chess", "Male"])
            .unwrap();
        s.add_labels(&mut d, EntityId(2), &["golf", "Male"])
            .unwrap();
        s.add_labels(&mut d, EntityId(3), &["chess"]).unwrap();
        let got: BTreeSet<_> = s
            .entities_with_all(&[LabelId(2), LabelId(8)])
            .unwrap()
            .collect();
        assert_eq!(got, BTreeSet::from([EntityId(0), EntityId(1)]));
        let single: BTreeSet<_> = s.entities_with_all(&[LabelId(2)]).unwrap().collect();
        let direct: BTreeSet<_> = s.entities_with_label(LabelId(2)).collect();
        assert_eq!(single, direct);
    }
}
