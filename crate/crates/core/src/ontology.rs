//! Label ontology: the graph of node-label signatures connected by edge-label
//! signatures, with each bucket's share of all graph edges.
//!
//! Also holds clustering of that label graph and the node/edge partition
//! assignment derived from the clusters.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dictionary::LabelDict;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::ids::{EntityId, TupleId};
use crate::label_store::LabelStore;
use crate::louvain::{louvain as run_louvain, WeightedGraph};

/// Canonical signature of a label set: labels sorted case-insensitively
/// (exact byte order breaks ties), joined with `:`. Unlabeled is `""`.
pub fn signature<S: AsRef<str>>(labels: &[S]) -> String {
    let mut v: Vec<&str> = labels.iter().map(AsRef::as_ref).collect();
    v.sort_by(|a, b| {
        a.to_lowercase()
            .cmp(&b.to_lowercase())
            .then_with(|| a.cmp(b))
    });
    v.join(":")
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BucketKey {
    pub source: String,
    pub target: String,
    pub edge: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OntologyGraph {
    pub nodes: BTreeSet<String>,
    pub edges: BTreeMap<BucketKey, u64>,
    pub total_edges: u64,
}

impl OntologyGraph {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.edges.is_empty()
    }

    pub fn fraction(&self, key: &BucketKey) -> f64 {
        match self.edges.get(key) {
            Some(&c) if self.total_edges > 0 => c as f64 / self.total_edges as f64,
            _ => 0.0,
        }
    }
}

struct SignatureCache<'a> {
    dict: &'a LabelDict,
    store: &'a LabelStore,
    cache: HashMap<TupleId, String>,
}

impl<'a> SignatureCache<'a> {
    fn new(dict: &'a LabelDict, store: &'a LabelStore) -> Self {
        SignatureCache {
            dict,
            store,
            cache: HashMap::new(),
        }
    }

    fn of(&mut self, e: EntityId) -> Result<String> {
        let t = self.store.tuple_of(e)?;
        if let Some(s) = self.cache.get(&t) {
            return Ok(s.clone());
        }
        let labels = self.store.labels_of(self.dict, e)?;
        let s = signature(&labels);
        self.cache.insert(t, s.clone());
        Ok(s)
    }
}

pub fn build_ontology(g: &Graph) -> Result<OntologyGraph> {
    let mut nodes_sig = SignatureCache::new(g.dict(), g.node_labels());
    let mut edges_sig = SignatureCache::new(g.dict(), g.edge_labels());
    let mut o = OntologyGraph::default();
    for t in g.node_labels().registry().live_tuples() {
        if let Some(e) = g.node_labels().dls().head_of(t) {
            o.nodes.insert(nodes_sig.of(e)?);
        }
    }
    for (i, (s, t)) in g.edges().enumerate() {
        let key = BucketKey {
            source: nodes_sig.of(s)?,
            target: nodes_sig.of(t)?,
            edge: edges_sig.of(EntityId(i as u32))?,
        };
        o.nodes.insert(key.source.clone());
        o.nodes.insert(key.target.clone());
        *o.edges.entry(key).or_insert(0) += 1;
        o.total_edges += 1;
    }
    Ok(o)
}

/// `count / total` as a percentage with one decimal, rounded half-up.
pub fn format_percent(count: u64, total: u64) -> String {
    if total == 0 {
        return "0.0".into();
    }
    let tenths = (count as u128 * 2000 + total as u128) / (2 * total as u128);
    format!("{}.{}", tenths / 10, tenths % 10)
}

fn dot_id(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Deterministic DOT digraph of the ontology.
pub fn emit_dot(o: &OntologyGraph) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "// label ontology: {} node signatures, {} edge buckets, {} graph edges",
        o.nodes.len(),
        o.edges.len(),
        o.total_edges
    );
    if o.is_empty() {
        s.push_str("digraph G { }\n");
        return s;
    }
    s.push_str("digraph G {\n");
    for n in &o.nodes {
        let _ = writeln!(s, "  {};", dot_id(n));
    }
    for (k, &count) in &o.edges {
        let pct = format_percent(count, o.total_edges);
        let label = if k.edge.is_empty() {
            format!("{pct}%")
        } else {
            format!("{} {pct}%", k.edge)
        };
        let _ = writeln!(
            s,
            "  {} -> {} [label={}];",
            dot_id(&k.source),
            dot_id(&k.target),
            dot_id(&label)
        );
    }
    s.push_str("}\n");
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub cluster_of: BTreeMap<String, usize>,
    pub modularity: f64,
}

impl ClusterAssignment {
    pub fn cluster_count(&self) -> usize {
        self.cluster_of.values().max().map_or(0, |c| c + 1)
    }
}

/// Symmetrised label graph: one vertex per signature in sorted order.
pub fn label_graph(o: &OntologyGraph) -> (Vec<String>, WeightedGraph) {
    let names: Vec<String> = o.nodes.iter().cloned().collect();
    let index: HashMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let mut wg = WeightedGraph::new(names.len());
    for (k, &c) in &o.edges {
        wg.add_edge(index[k.source.as_str()], index[k.target.as_str()], c as f64);
    }
    (names, wg)
}

pub fn louvain(o: &OntologyGraph, seed: u64) -> Result<ClusterAssignment> {
    if o.nodes.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let (names, wg) = label_graph(o);
    let (membership, modularity) = run_louvain(&wg, seed);
    Ok(ClusterAssignment {
        cluster_of: names.into_iter().zip(membership).collect(),
        modularity,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutReport {
    pub partition_count: usize,
    pub node_counts: Vec<usize>,
    pub cut_edges: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionAssignment {
    pub node_partition: Vec<u32>,
    pub edge_partition: Vec<u32>,
    pub report: CutReport,
}

/// Places each node in `cluster mod k` of its signature; unlabeled nodes (and
/// signatures the clustering does not know) go to `id mod k`. Edges follow
/// their source.
pub fn partition_assign(g: &Graph, c: &ClusterAssignment, k: usize) -> Result<PartitionAssignment> {
    if k == 0 {
        return Err(Error::InvalidQuery(
            "partition count must be at least 1".into(),
        ));
    }
    let mut sigs = SignatureCache::new(g.dict(), g.node_labels());
    let mut node_partition = Vec::with_capacity(g.node_count());
    let mut node_counts = vec![0usize; k];
    for v in 0..g.node_count() {
        let e = EntityId(v as u32);
        let p = if g.node_labels().tuple_of(e)?.is_null() {
            v % k
        } else {
            match c.cluster_of.get(&sigs.of(e)?) {
                Some(&cl) => cl % k,
                None => v % k,
            }
        };
        node_counts[p] += 1;
        node_partition.push(p as u32);
    }
    let mut cut_edges = 0;
    let edge_partition = g
        .edges()
        .map(|(s, t)| {
            let ps = node_partition[s.index()];
            if ps != node_partition[t.index()] {
                cut_edges += 1;
            }
            ps
        })
        .collect();
    Ok(PartitionAssignment {
        node_partition,
        edge_partition,
        report: CutReport {
            partition_count: k,
            node_counts,
            cut_edges,
        },
    })
}
