//! Label-filtered N-hop path search and label predicate matching.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Direction, Graph};
use crate::ids::{EntityId, LabelId, TupleId};
use crate::label_store::LabelStore;

pub const DEFAULT_MAX_HOPS: usize = 10;
pub const DEFAULT_MAX_PATHS: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeRef {
    Id(u32),
    Key(String),
}

impl NodeRef {
    pub fn resolve(&self, g: &Graph) -> Result<EntityId> {
        match self {
            NodeRef::Id(i) => {
                let v = EntityId(*i);
                if v.index() >= g.node_count() {
                    return Err(Error::UnknownEntity(v));
                }
                Ok(v)
            }
            NodeRef::Key(k) => g
                .node_by_key(k)
                .ok_or_else(|| Error::UnknownNodeKey(k.clone())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelPredicate {
    /// Entity carries every listed label.
    All(Vec<String>),
    /// Entity carries at least one listed label.
    Any(Vec<String>),
}

fn default_direction() -> Direction {
    Direction::Out
}

fn default_max_paths() -> usize {
    DEFAULT_MAX_PATHS
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HopQuery {
    pub source: NodeRef,
    pub max_hops: usize,
    /// `None` accepts every node as a target.
    #[serde(default)]
    pub target: Option<LabelPredicate>,
    /// Traversed edges must carry at least one of these labels.
    #[serde(default)]
    pub edge_filter: Option<Vec<String>>,
    #[serde(default = "default_direction")]
    pub direction: Direction,
    #[serde(default = "default_max_paths")]
    pub max_paths: usize,
}

impl HopQuery {
    pub fn new(source: NodeRef, max_hops: usize) -> Self {
        HopQuery {
            source,
            max_hops,
            target: None,
            edge_filter: None,
            direction: Direction::Out,
            max_paths: DEFAULT_MAX_PATHS,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PathResult {
    pub paths: Vec<Vec<EntityId>>,
    /// More matching paths existed beyond `max_paths`.
    pub truncated: bool,
}

#[derive(Debug, Serialize)]
struct PathResultJson {
    paths: Vec<Vec<String>>,
    truncated: bool,
}

impl PathResult {
    /// Paths rendered with node keys (numeric id for unnamed nodes).
    pub fn to_json(&self, g: &Graph) -> String {
        let doc = PathResultJson {
            paths: self
                .paths
                .iter()
                .map(|p| p.iter().map(|&v| g.display_name(v)).collect())
                .collect(),
            truncated: self.truncated,
        };
        serde_json::to_string(&doc).expect("serializable")
    }
}

/// Membership bitmap over tuple ids.
struct TupleSet {
    bits: Vec<bool>,
    all: bool,
}

impl TupleSet {
    fn everything() -> Self {
        TupleSet {
            bits: Vec::new(),
            all: true,
        }
    }

    fn from_tuples(store: &LabelStore, tuples: impl IntoIterator<Item = TupleId>) -> Self {
        let mut bits = vec![false; store.registry().maxid() as usize + 1];
        for t in tuples {
            bits[t.index()] = true;
        }
        TupleSet { bits, all: false }
    }

    #[inline]
    fn contains(&self, t: TupleId) -> bool {
        self.all || (!t.is_null() && self.bits.get(t.index()).copied().unwrap_or(false))
    }
}

fn label_ids(g: &Graph, labels: &[String]) -> Vec<Option<LabelId>> {
    labels.iter().map(|l| g.label_id(l)).collect()
}

/// Tuples of `store` satisfying `pred`. Labels unknown to the dictionary match nothing.
pub fn matching_tuples(
    g: &Graph,
    store: &LabelStore,
    pred: &LabelPredicate,
) -> Result<Vec<TupleId>> {
    match pred {
        LabelPredicate::All(labels) => {
            if labels.is_empty() {
                return Err(Error::InvalidQuery(
                    "ALL-of predicate needs at least one label".into(),
                ));
            }
            let ids: Option<Vec<LabelId>> = label_ids(g, labels).into_iter().collect();
            match ids {
                Some(ids) => store.tuples_with_all(&ids),
                None => Ok(Vec::new()),
            }
        }
        LabelPredicate::Any(labels) => {
            let set: BTreeSet<TupleId> = label_ids(g, labels)
                .into_iter()
                .flatten()
                .flat_map(|l| store.registry().tuples_with_label(l).iter().copied())
                .collect();
            Ok(set.into_iter().collect())
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MatchStats {
    pub candidate_tuples: usize,
    /// Ring slots read while collecting the result.
    pub touched: usize,
}

/// Nodes satisfying `pred`, walking only the rings of candidate tuples.
pub fn match_nodes(g: &Graph, pred: &LabelPredicate) -> Result<(Vec<EntityId>, MatchStats)> {
    let store = g.node_labels();
    let tuples = matching_tuples(g, store, pred)?;
    let mut out = Vec::new();
    let mut stats = MatchStats {
        candidate_tuples: tuples.len(),
        touched: 0,
    };
    for t in tuples {
        let mut ring = store.dls().ring(t);
        out.extend(ring.by_ref());
        stats.touched += ring.steps();
    }
    Ok((out, stats))
}

struct Search<'a> {
    g: &'a Graph,
    targets: TupleSet,
    edges: TupleSet,
    direction: Direction,
    max_hops: usize,
    max_paths: usize,
    path: Vec<EntityId>,
    result: PathResult,
}

impl Search<'_> {
    /// Depth-first with ascending neighbor ids, which emits paths in
    /// lexicographic order of their node sequences. Returns false to stop.
    fn visit(&mut self, v: EntityId) -> Result<bool> {
        self.path.push(v);
        let keep_going = self.expand(v)?;
        self.path.pop();
        Ok(keep_going)
    }

    fn expand(&mut self, v: EntityId) -> Result<bool> {
        let node_tuple = self.g.node_labels().dls().tuple_of(v);
        if self.targets.contains(node_tuple) {
            if self.result.paths.len() == self.max_paths {
                self.result.truncated = true;
                return Ok(false);
            }
            self.result.paths.push(self.path.clone());
        }
        if self.path.len() > self.max_hops {
            return Ok(true);
        }
        let edge_dls = self.g.edge_labels().dls();
        let mut next: Vec<EntityId> = self
            .g
            .incident(v, self.direction)?
            .into_iter()
            .filter(|&(e, _)| self.edges.contains(edge_dls.tuple_of(e)))
            .map(|(_, n)| n)
            .filter(|n| !self.path.contains(n))
            .collect();
        next.sort_unstable();
        next.dedup();
        for n in next {
            if !self.visit(n)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Every simple path from the source of at most `q.max_hops` edges whose last
/// node satisfies the target predicate, in lexicographic node-id order, capped
/// at `q.max_paths`. `hop_cap` bounds `q.max_hops`.
pub fn n_hop(g: &Graph, q: &HopQuery, hop_cap: usize) -> Result<PathResult> {
    if q.max_hops > hop_cap {
        return Err(Error::InvalidQuery(format!(
            "max_hops {} exceeds the configured cap of {hop_cap}",
            q.max_hops
        )));
    }
    let source = q.source.resolve(g)?;
    let targets = match &q.target {
        None => TupleSet::everything(),
        Some(p) => TupleSet::from_tuples(g.node_labels(), matching_tuples(g, g.node_labels(), p)?),
    };
    let edges = match &q.edge_filter {
        None => TupleSet::everything(),
        Some(labels) => TupleSet::from_tuples(
            g.edge_labels(),
            matching_tuples(g, g.edge_labels(), &LabelPredicate::Any(labels.clone()))?,
        ),
    };
    let mut search = Search {
        g,
        targets,
        edges,
        direction: q.direction,
        max_hops: q.max_hops,
        max_paths: q.max_paths,
        path: Vec::with_capacity(q.max_hops + 1),
        result: PathResult::default(),
    };
    search.visit(source)?;
    Ok(search.result)
}
