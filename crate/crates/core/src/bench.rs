//! Synthetic graphs, the hash-map label baseline, and side-by-side measurement.

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};

use crate::dictionary::LabelDict;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::ids::{EntityId, LabelId};
use crate::label_store::LabelStore;
use crate::mem::{hash_map_bytes, hash_set_bytes};

/// How many labels each entity receives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelCount {
    Fixed(usize),
    /// Zipf-distributed over `1..=max`.
    Zipf {
        max: usize,
        exponent: f64,
    },
}

impl Default for LabelCount {
    fn default() -> Self {
        LabelCount::Fixed(1)
    }
}

impl LabelCount {
    fn max(&self) -> usize {
        match *self {
            LabelCount::Fixed(k) => k,
            LabelCount::Zipf { max, .. } => max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub node_count: usize,
    pub edge_count: usize,
    pub node_label_universe: usize,
    #[serde(default)]
    pub edge_label_universe: usize,
    #[serde(default)]
    pub labels_per_node: LabelCount,
    #[serde(default = "no_labels")]
    pub labels_per_edge: LabelCount,
    #[serde(default)]
    pub seed: u64,
}

fn no_labels() -> LabelCount {
    LabelCount::Fixed(0)
}

impl SyntheticSpec {
    /// 16 node labels and 34 edge labels, one label per entity.
    pub fn wide_edge_labels(node_count: usize, edge_count: usize, seed: u64) -> Self {
        SyntheticSpec {
            node_count,
            edge_count,
            node_label_universe: 16,
            edge_label_universe: 34,
            labels_per_node: LabelCount::Fixed(1),
            labels_per_edge: LabelCount::Fixed(1),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.edge_count > 0 && self.node_count == 0 {
            return Err(Error::Spec("edges need at least one node".into()));
        }
        for (what, count, universe) in [
            ("node", self.labels_per_node, self.node_label_universe),
            ("edge", self.labels_per_edge, self.edge_label_universe),
        ] {
            if count.max() > universe {
                return Err(Error::Spec(format!(
                    "{} labels per {what} exceeds the {what} label universe of {universe}",
                    count.max()
                )));
            }
            if let LabelCount::Zipf { max, exponent } = count {
                if max == 0 || exponent.is_nan() || exponent <= 0.0 {
                    return Err(Error::Spec(format!(
                        "{what} zipf needs max >= 1 and exponent > 0"
                    )));
                }
            }
        }
        if self.node_label_universe == 0 {
            return Err(Error::Spec("node label universe must be at least 1".into()));
        }
        Ok(())
    }
}

struct LabelSampler {
    count: LabelCount,
    zipf: Option<Zipf<f64>>,
    ids: Vec<LabelId>,
}

impl LabelSampler {
    fn new(dict: &mut LabelDict, prefix: &str, universe: usize, count: LabelCount) -> Result<Self> {
        let ids = (0..universe)
            .map(|i| dict.intern(&format!("{prefix}{i}")))
            .collect::<Result<Vec<_>>>()?;
        let zipf = match count {
            LabelCount::Zipf { max, exponent } => {
                Some(Zipf::new(max as f64, exponent).map_err(|e| Error::Spec(e.to_string()))?)
            }
            LabelCount::Fixed(_) => None,
        };
        Ok(LabelSampler { count, zipf, ids })
    }

    fn draw(&self, rng: &mut ChaCha8Rng, out: &mut Vec<LabelId>) {
        out.clear();
        let k = match (self.count, &self.zipf) {
            (LabelCount::Fixed(k), _) => k,
            (_, Some(z)) => z.sample(rng) as usize,
            _ => 0,
        };
        if k == 0 {
            return;
        }
        out.extend(
            sample(rng, self.ids.len(), k)
                .into_iter()
                .map(|i| self.ids[i]),
        );
    }
}

/// Deterministic graph for `spec`: unnamed nodes, uniformly random edges, and
/// labels named `n<i>` (nodes) and `e<i>` (edges).
pub fn generate(spec: &SyntheticSpec) -> Result<Graph> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut g = Graph::with_nodes(spec.node_count)?;
    let node_sampler = LabelSampler::new(
        g.dict_mut(),
        "n",
        spec.node_label_universe,
        spec.labels_per_node,
    )?;
    let edge_sampler = LabelSampler::new(
        g.dict_mut(),
        "e",
        spec.edge_label_universe,
        spec.labels_per_edge,
    )?;
    let mut buf = Vec::new();
    for v in 0..spec.node_count {
        node_sampler.draw(&mut rng, &mut buf);
        if !buf.is_empty() {
            g.node_labels.add_label_ids(EntityId(v as u32), &buf)?;
        }
    }
    let n = spec.node_count as u32;
    for _ in 0..spec.edge_count {
        let s = rng.random_range(0..n);
        let t = rng.random_range(0..n);
        let e = g.append_edge(EntityId(s), EntityId(t))?;
        edge_sampler.draw(&mut rng, &mut buf);
        if !buf.is_empty() {
            g.edge_labels.add_label_ids(e, &buf)?;
        }
    }
    Ok(g)
}

/// Conventional label index: a multimap label -> entities and a map entity -> labels.
#[derive(Debug, Clone, Default)]
pub struct BaselineStore {
    by_label: HashMap<LabelId, HashSet<u32>>,
    by_entity: HashMap<u32, HashSet<LabelId>>,
}

impl BaselineStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, e: EntityId, l: LabelId) {
        self.by_label.entry(l).or_default().insert(e.0);
        self.by_entity.entry(e.0).or_default().insert(l);
    }

    pub fn remove(&mut self, e: EntityId, l: LabelId) {
        if let Some(s) = self.by_label.get_mut(&l) {
            s.remove(&e.0);
            if s.is_empty() {
                self.by_label.remove(&l);
            }
        }
        if let Some(s) = self.by_entity.get_mut(&e.0) {
            s.remove(&l);
            if s.is_empty() {
                self.by_entity.remove(&e.0);
            }
        }
    }

    /// Sorted label ids of `e`.
    pub fn labels_of(&self, e: EntityId) -> Vec<LabelId> {
        let mut v: Vec<LabelId> = self
            .by_entity
            .get(&e.0)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default();
        v.sort_unstable();
        v
    }

    /// Sorted entities carrying `l`.
    pub fn entities_with_label(&self, l: LabelId) -> Vec<EntityId> {
        let mut v: Vec<EntityId> = self
            .by_label
            .get(&l)
            .map(|s| s.iter().map(|&e| EntityId(e)).collect())
            .unwrap_or_default();
        v.sort_unstable();
        v
    }

    /// Sorted entities carrying every label in `labels`.
    pub fn entities_with_all(&self, labels: &[LabelId]) -> Vec<EntityId> {
        let Some((first, rest)) = labels.split_first() else {
            return Vec::new();
        };
        let Some(base) = self.by_label.get(first) else {
            return Vec::new();
        };
        let mut v: Vec<EntityId> = base
            .iter()
            .filter(|e| {
                rest.iter()
                    .all(|l| self.by_label.get(l).is_some_and(|s| s.contains(e)))
            })
            .map(|&e| EntityId(e))
            .collect();
        v.sort_unstable();
        v
    }

    /// Counted bytes of both maps and their inner sets.
    pub fn heap_bytes(&self) -> usize {
        let outer_l = hash_map_bytes::<LabelId, HashSet<u32>>(self.by_label.capacity());
        let inner_l: usize = self
            .by_label
            .values()
            .map(|s| hash_set_bytes::<u32>(s.capacity()))
            .sum();
        let outer_e = hash_map_bytes::<u32, HashSet<LabelId>>(self.by_entity.capacity());
        let inner_e: usize = self
            .by_entity
            .values()
            .map(|s| hash_set_bytes::<LabelId>(s.capacity()))
            .sum();
        outer_l + inner_l + outer_e + inner_e
    }

    /// Mirror of the labels currently held by `store`.
    pub fn from_store(store: &LabelStore) -> Self {
        let mut b = Self::new();
        for e in 0..store.entity_count() {
            let e = EntityId(e as u32);
            for &l in store.label_ids_of(e).expect("in range") {
                b.add(e, l);
            }
        }
        b
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    /// Entities carrying this label.
    Label(String),
    /// Entities carrying all of these labels.
    All(Vec<String>),
    /// Labels of this entity.
    LabelsOf(u32),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpsScript {
    pub ops: Vec<Op>,
    #[serde(default = "one")]
    pub repeat: usize,
}

fn one() -> usize {
    1
}

impl OpsScript {
    /// Every node label, adjacent label pairs, and a sample of entities.
    pub fn default_for(spec: &SyntheticSpec) -> Self {
        let u = spec.node_label_universe;
        let mut ops: Vec<Op> = (0..u).map(|i| Op::Label(format!("n{i}"))).collect();
        ops.extend(
            (0..u.saturating_sub(1)).map(|i| Op::All(vec![format!("n{i}"), format!("n{}", i + 1)])),
        );
        if spec.node_count > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5eed);
            ops.extend((0..100).map(|_| Op::LabelsOf(rng.random_range(0..spec.node_count as u32))));
        }
        OpsScript { ops, repeat: 1 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassTiming {
    pub queries: usize,
    pub label_store_ns: u128,
    pub baseline_ns: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub spec: SyntheticSpec,
    pub label_store_bytes: usize,
    pub baseline_bytes: usize,
    pub dls_slot_bytes: usize,
    pub timings: std::collections::BTreeMap<String, ClassTiming>,
    pub results_checked: usize,
    /// Resident set size after the run, when the platform exposes it.
    pub rss_bytes: Option<u64>,
}

fn resolve(dict: &LabelDict, name: &str) -> Option<LabelId> {
    dict.get(name)
}

/// Runs `ops` against the label store and the baseline built from the same
/// attachments. Any result mismatch is an error.
pub fn compare(spec: &SyntheticSpec, ops: &OpsScript) -> Result<CompareReport> {
    let g = generate(spec)?;
    let store = g.node_labels();
    let dict = g.dict();
    let baseline = BaselineStore::from_store(store);
    let mut timings: std::collections::BTreeMap<String, ClassTiming> = Default::default();
    let mut checked = 0;
    for _ in 0..ops.repeat.max(1) {
        for op in &ops.ops {
            let (class, ours, theirs, t_ours, t_theirs) = match op {
                Op::Label(name) => {
                    let id = resolve(dict, name);
                    let t0 = Instant::now();
                    let mut a: Vec<EntityId> = id
                        .map(|l| store.entities_with_label(l).collect())
                        .unwrap_or_default();
                    let t1 = t0.elapsed();
                    let t0 = Instant::now();
                    let b = id
                        .map(|l| baseline.entities_with_label(l))
                        .unwrap_or_default();
                    let t2 = t0.elapsed();
                    a.sort_unstable();
                    ("entities_with_label", ids(&a), ids(&b), t1, t2)
                }
                Op::All(names) => {
                    let idv: Option<Vec<LabelId>> =
                        names.iter().map(|n| resolve(dict, n)).collect();
                    let t0 = Instant::now();
                    let mut a: Vec<EntityId> = match &idv {
                        Some(v) if !v.is_empty() => store.entities_with_all(v)?.collect(),
                        _ => Vec::new(),
                    };
                    let t1 = t0.elapsed();
                    let t0 = Instant::now();
                    let b = idv
                        .as_deref()
                        .map(|v| baseline.entities_with_all(v))
                        .unwrap_or_default();
                    let t2 = t0.elapsed();
                    a.sort_unstable();
                    ("entities_with_all", ids(&a), ids(&b), t1, t2)
                }
                Op::LabelsOf(e) => {
                    let e = EntityId(*e);
                    let t0 = Instant::now();
                    let a = store.label_ids_of(e)?.to_vec();
                    let t1 = t0.elapsed();
                    let t0 = Instant::now();
                    let b = baseline.labels_of(e);
                    let t2 = t0.elapsed();
                    let a: Vec<u32> = a.iter().map(|l| l.0).collect();
                    let b: Vec<u32> = b.iter().map(|l| l.0).collect();
                    ("labels_of", a, b, t1, t2)
                }
            };
            if ours != theirs {
                return Err(Error::CorrectnessFailure(format!(
                    "{op:?}: label store returned {} items, baseline {}",
                    ours.len(),
                    theirs.len()
                )));
            }
            checked += 1;
            let t = timings.entry(class.to_string()).or_default();
            t.queries += 1;
            t.label_store_ns += t_ours.as_nanos();
            t.baseline_ns += t_theirs.as_nanos();
        }
    }
    let report = store.memory_report(dict);
    Ok(CompareReport {
        spec: spec.clone(),
        label_store_bytes: report.total,
        baseline_bytes: baseline.heap_bytes(),
        dls_slot_bytes: report.dls_slots,
        timings,
        results_checked: checked,
        rss_bytes: rss_bytes(),
    })
}

fn ids(v: &[EntityId]) -> Vec<u32> {
    v.iter().map(|e| e.0).collect()
}

/// Resident set size from `/proc/self/statm` (Linux only).
pub fn rss_bytes() -> Option<u64> {
    let statm = std::fs::read_to_string("/proc/self/statm").ok()?;
    let pages: u64 = statm.split_whitespace().nth(1)?.parse().ok()?;
    Some(pages * 4096)
}

/// A store of `n` entities, each carrying `k` labels drawn from a fixed
/// universe of `universe` labels. Returns the store with its dictionary.
pub fn labeled_store(
    n: usize,
    k: usize,
    universe: usize,
    seed: u64,
) -> Result<(LabelDict, LabelStore)> {
    if k > universe {
        return Err(Error::Spec(format!(
            "{k} labels per entity exceeds universe {universe}"
        )));
    }
    let mut dict = LabelDict::new();
    let ids = (0..universe)
        .map(|i| dict.intern(&format!("l{i}")))
        .collect::<Result<Vec<_>>>()?;
    let mut store = LabelStore::new(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf = Vec::with_capacity(k);
    for e in 0..n {
        if k == 0 {
            break;
        }
        buf.clear();
        buf.extend(sample(&mut rng, universe, k).into_iter().map(|i| ids[i]));
        store.add_label_ids(EntityId(e as u32), &buf)?;
    }
    Ok((dict, store))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub entities: usize,
    pub label_bytes: usize,
    pub dls_slot_bytes: usize,
}

/// Counted label-infrastructure bytes for each entity count.
pub fn memory_scaling(
    sizes: &[usize],
    k: usize,
    universe: usize,
    seed: u64,
) -> Result<Vec<ScalingPoint>> {
    sizes
        .iter()
        .map(|&n| {
            let (dict, store) = labeled_store(n, k, universe, seed)?;
            let r = store.memory_report(&dict);
            Ok(ScalingPoint {
                entities: n,
                label_bytes: r.total,
                dls_slot_bytes: r.dls_slots,
            })
        })
        .collect()
}
