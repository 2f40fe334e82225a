//! Directed multigraph topology with one [`LabelStore`] per entity class.
//!
//! Adjacency uses the same in-place list idea as the label rings: every node
//! keeps the first/last edge of its out- and in-lists, every edge the next edge
//! in its source's out-list and its target's in-list. Appending an edge is
//! O(1) and neighbor order is edge insertion order.

use std::collections::HashMap;
use std::mem::size_of;

use crate::dictionary::LabelDict;
use crate::error::{Error, Result};
use crate::ids::{EntityId, LabelId, TupleId, MAX_ENTITIES, NIL};
use crate::label_store::LabelStore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Out,
    In,
    Both,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Adjacency {
    // per node: [first_out, last_out, first_in, last_in]
    node: Vec<[u32; 4]>,
    // per edge: [next_out, next_in]
    edge: Vec<[u32; 2]>,
}

impl Adjacency {
    fn add_nodes(&mut self, n: usize) {
        self.node.resize(n, [NIL; 4]);
    }

    fn push_edge(&mut self, e: u32, s: u32, t: u32) {
        self.edge.push([NIL, NIL]);
        Self::append(&mut self.node[s as usize], 0, &mut self.edge, 0, e);
        Self::append(&mut self.node[t as usize], 2, &mut self.edge, 1, e);
    }

    fn append(node: &mut [u32; 4], base: usize, edge: &mut [[u32; 2]], lane: usize, e: u32) {
        let last = node[base + 1];
        if last == NIL {
            node[base] = e;
        } else {
            edge[last as usize][lane] = e;
        }
        node[base + 1] = e;
    }
}

pub struct EdgeIter<'a> {
    adj: &'a Adjacency,
    lane: usize,
    cur: u32,
}

impl Iterator for EdgeIter<'_> {
    type Item = EntityId;

    fn next(&mut self) -> Option<EntityId> {
        if self.cur == NIL {
            return None;
        }
        let e = self.cur;
        self.cur = self.adj.edge[e as usize][self.lane];
        Some(EntityId(e))
    }
}

#[derive(Debug, Clone, Default)]
pub struct Graph {
    pub(crate) dict: LabelDict,
    pub(crate) node_keys: Vec<String>,
    key_index: HashMap<String, EntityId>,
    pub(crate) edges: Vec<(u32, u32)>,
    adjacency: Adjacency,
    pub(crate) node_labels: LabelStore,
    pub(crate) edge_labels: LabelStore,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.dict == other.dict
            && self.node_keys == other.node_keys
            && self.edges == other.edges
            && self.node_labels == other.node_labels
            && self.edge_labels == other.edge_labels
    }
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_dict(dict: LabelDict) -> Self {
        Graph {
            dict,
            ..Self::default()
        }
    }

    /// `nodes` unnamed nodes, no edges.
    pub fn with_nodes(nodes: usize) -> Result<Self> {
        let mut g = Self::new();
        g.resize_nodes(nodes)?;
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.node_keys.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn dict(&self) -> &LabelDict {
        &self.dict
    }

    pub fn dict_mut(&mut self) -> &mut LabelDict {
        &mut self.dict
    }

    pub fn node_labels(&self) -> &LabelStore {
        &self.node_labels
    }

    pub fn edge_labels(&self) -> &LabelStore {
        &self.edge_labels
    }

    /// Dictionary and node store borrowed together for string-level label edits.
    pub fn node_labels_mut(&mut self) -> (&mut LabelDict, &mut LabelStore) {
        (&mut self.dict, &mut self.node_labels)
    }

    pub fn edge_labels_mut(&mut self) -> (&mut LabelDict, &mut LabelStore) {
        (&mut self.dict, &mut self.edge_labels)
    }

    /// Adds a node. A key already present returns the existing node.
    /// The empty key means "unnamed".
    pub fn add_node(&mut self, key: &str) -> Result<EntityId> {
        if !key.is_empty() {
            if let Some(&id) = self.key_index.get(key) {
                return Ok(id);
            }
        }
        let id = self.node_count();
        if id >= MAX_ENTITIES {
            return Err(Error::CapacityExceeded("node id space exhausted".into()));
        }
        let id = EntityId(id as u32);
        self.node_keys.push(key.to_owned());
        if !key.is_empty() {
            self.key_index.insert(key.to_owned(), id);
        }
        self.adjacency.add_nodes(self.node_keys.len());
        self.node_labels.resize(self.node_keys.len())?;
        Ok(id)
    }

    /// Grows the node count to `capacity` with unnamed nodes.
    pub fn resize_nodes(&mut self, capacity: usize) -> Result<()> {
        if capacity > MAX_ENTITIES {
            return Err(Error::CapacityExceeded(format!(
                "{capacity} nodes exceeds the {MAX_ENTITIES} limit"
            )));
        }
        if capacity <= self.node_count() {
            return Ok(());
        }
        self.node_keys.resize(capacity, String::new());
        self.adjacency.add_nodes(capacity);
        self.node_labels.resize(capacity)
    }

    pub fn node_by_key(&self, key: &str) -> Option<EntityId> {
        self.key_index.get(key).copied()
    }

    pub fn node_key(&self, v: EntityId) -> Option<&str> {
        self.node_keys
            .get(v.index())
            .map(String::as_str)
            .filter(|k| !k.is_empty())
    }

    /// Key if the node has one, otherwise its numeric id.
    pub fn display_name(&self, v: EntityId) -> String {
        self.node_key(v)
            .map(str::to_owned)
            .unwrap_or_else(|| v.0.to_string())
    }

    pub fn append_edge(&mut self, s: EntityId, t: EntityId) -> Result<EntityId> {
        self.check_node(s)?;
        self.check_node(t)?;
        if self.edges.len() >= MAX_ENTITIES {
            return Err(Error::CapacityExceeded("edge id space exhausted".into()));
        }
        let e = self.edges.len() as u32;
        self.edges.push((s.0, t.0));
        self.adjacency.push_edge(e, s.0, t.0);
        self.edge_labels.resize(self.edges.len())?;
        Ok(EntityId(e))
    }

    pub fn edge(&self, e: EntityId) -> Result<(EntityId, EntityId)> {
        self.edges
            .get(e.index())
            .map(|&(s, t)| (EntityId(s), EntityId(t)))
            .ok_or(Error::UnknownEntity(e))
    }

    pub fn edges(&self) -> impl Iterator<Item = (EntityId, EntityId)> + '_ {
        self.edges.iter().map(|&(s, t)| (EntityId(s), EntityId(t)))
    }

    fn check_node(&self, v: EntityId) -> Result<()> {
        if v.index() >= self.node_count() {
            return Err(Error::UnknownEntity(v));
        }
        Ok(())
    }

    pub fn out_edges(&self, v: EntityId) -> Result<EdgeIter<'_>> {
        self.check_node(v)?;
        Ok(EdgeIter {
            adj: &self.adjacency,
            lane: 0,
            cur: self.adjacency.node[v.index()][0],
        })
    }

    pub fn in_edges(&self, v: EntityId) -> Result<EdgeIter<'_>> {
        self.check_node(v)?;
        Ok(EdgeIter {
            adj: &self.adjacency,
            lane: 1,
            cur: self.adjacency.node[v.index()][2],
        })
    }

    pub fn out_neighbors(&self, v: EntityId) -> Result<Vec<EntityId>> {
        Ok(self
            .out_edges(v)?
            .map(|e| EntityId(self.edges[e.index()].1))
            .collect())
    }

    pub fn in_neighbors(&self, v: EntityId) -> Result<Vec<EntityId>> {
        Ok(self
            .in_edges(v)?
            .map(|e| EntityId(self.edges[e.index()].0))
            .collect())
    }

    /// `(edge, neighbor)` pairs in the requested direction(s).
    pub fn incident(&self, v: EntityId, dir: Direction) -> Result<Vec<(EntityId, EntityId)>> {
        let mut out = Vec::new();
        if matches!(dir, Direction::Out | Direction::Both) {
            out.extend(
                self.out_edges(v)?
                    .map(|e| (e, EntityId(self.edges[e.index()].1))),
            );
        }
        if matches!(dir, Direction::In | Direction::Both) {
            out.extend(
                self.in_edges(v)?
                    .map(|e| (e, EntityId(self.edges[e.index()].0))),
            );
        }
        Ok(out)
    }

    pub fn add_node_label(&mut self, v: EntityId, label: &str) -> Result<TupleId> {
        self.node_labels.add_label(&mut self.dict, v, label)
    }

    pub fn add_node_labels<S: AsRef<str>>(&mut self, v: EntityId, labels: &[S]) -> Result<TupleId> {
        self.node_labels.add_labels(&mut self.dict, v, labels)
    }

    pub fn remove_node_label(&mut self, v: EntityId, label: &str) -> Result<TupleId> {
        self.node_labels.remove_label(&self.dict, v, label)
    }

    pub fn add_edge_label(&mut self, e: EntityId, label: &str) -> Result<TupleId> {
        self.edge_labels.add_label(&mut self.dict, e, label)
    }

    pub fn add_edge_labels<S: AsRef<str>>(&mut self, e: EntityId, labels: &[S]) -> Result<TupleId> {
        self.edge_labels.add_labels(&mut self.dict, e, labels)
    }

    pub fn node_label_strings(&self, v: EntityId) -> Result<Vec<&str>> {
        self.node_labels.labels_of(&self.dict, v)
    }

    pub fn edge_label_strings(&self, e: EntityId) -> Result<Vec<&str>> {
        self.edge_labels.labels_of(&self.dict, e)
    }

    pub fn label_id(&self, label: &str) -> Option<LabelId> {
        self.dict.get(label)
    }

    /// Counted topology bytes (keys, edge array, adjacency links).
    pub fn topology_bytes(&self) -> usize {
        let keys: usize = self
            .node_keys
            .iter()
            .map(|k| size_of::<String>() + k.len())
            .sum();
        keys + self.edges.len() * size_of::<(u32, u32)>()
            + self.adjacency.node.len() * size_of::<[u32; 4]>()
            + self.adjacency.edge.len() * size_of::<[u32; 2]>()
    }

    /// Rebuilds adjacency and key index from the edge array and keys.
    pub(crate) fn from_parts(
        dict: LabelDict,
        node_keys: Vec<String>,
        edges: Vec<(u32, u32)>,
        node_labels: LabelStore,
        edge_labels: LabelStore,
    ) -> Result<Self> {
        let n = node_keys.len();
        if node_labels.entity_count() != n || edge_labels.entity_count() != edges.len() {
            return Err(Error::CorruptSnapshot {
                section: 0,
                message: "label store capacity does not match entity count".into(),
            });
        }
        let mut key_index = HashMap::new();
        for (i, k) in node_keys.iter().enumerate() {
            if !k.is_empty() && key_index.insert(k.clone(), EntityId(i as u32)).is_some() {
                return Err(Error::CorruptSnapshot {
                    section: 0,
                    message: format!("duplicate node key {k:?}"),
                });
            }
        }
        let mut adjacency = Adjacency::default();
        adjacency.add_nodes(n);
        adjacency.edge.reserve(edges.len());
        for (e, &(s, t)) in edges.iter().enumerate() {
            if s as usize >= n || t as usize >= n {
                return Err(Error::CorruptSnapshot {
                    section: 0,
                    message: format!("edge {e} endpoint out of range"),
                });
            }
            adjacency.push_edge(e as u32, s, t);
        }
        Ok(Graph {
            dict,
            node_keys,
            key_index,
            edges,
            adjacency,
            node_labels,
            edge_labels,
        })
    }
}
