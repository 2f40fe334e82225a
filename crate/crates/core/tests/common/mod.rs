//! Naive reference implementations used as oracles by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use kglb::{Direction, EntityId, Graph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One plain set of label ids per entity.
#[derive(Debug, Clone, Default)]
pub struct NaiveSets {
    pub sets: Vec<BTreeSet<u32>>,
}

impl NaiveSets {
    pub fn new(n: usize) -> Self {
        NaiveSets {
            sets: vec![BTreeSet::new(); n],
        }
    }

    pub fn add(&mut self, e: usize, l: u32) {
        self.sets[e].insert(l);
    }

    pub fn remove(&mut self, e: usize, l: u32) {
        self.sets[e].remove(&l);
    }

    pub fn labels_of(&self, e: usize) -> Vec<u32> {
        self.sets[e].iter().copied().collect()
    }

    pub fn with_label(&self, l: u32) -> Vec<u32> {
        (0..self.sets.len())
            .filter(|&e| self.sets[e].contains(&l))
            .map(|e| e as u32)
            .collect()
    }

    pub fn with_all(&self, ls: &[u32]) -> Vec<u32> {
        (0..self.sets.len())
            .filter(|&e| ls.iter().all(|l| self.sets[e].contains(l)))
            .map(|e| e as u32)
            .collect()
    }

    /// Distinct non-empty label sets currently held.
    pub fn distinct_sets(&self) -> BTreeSet<Vec<u32>> {
        self.sets
            .iter()
            .filter(|s| !s.is_empty())
            .map(|s| s.iter().copied().collect())
            .collect()
    }
}

/// Plain description of a graph: edge list plus label strings per entity.
#[derive(Debug, Clone, Default)]
pub struct FlatGraph {
    pub nodes: usize,
    pub edges: Vec<(u32, u32)>,
    pub node_labels: Vec<BTreeSet<String>>,
    pub edge_labels: Vec<BTreeSet<String>>,
}

impl FlatGraph {
    pub fn random(
        rng: &mut ChaCha8Rng,
        nodes: usize,
        edges: usize,
        node_universe: usize,
        edge_universe: usize,
    ) -> Self {
        let pick = |rng: &mut ChaCha8Rng, prefix: &str, universe: usize| -> BTreeSet<String> {
            let k = rng.random_range(0..=universe.min(3));
            (0..k)
                .map(|_| format!("{prefix}{}", rng.random_range(0..universe)))
                .collect()
        };
        let node_labels = (0..nodes).map(|_| pick(rng, "n", node_universe)).collect();
        let edge_list: Vec<(u32, u32)> = (0..edges)
            .map(|_| {
                (
                    rng.random_range(0..nodes as u32),
                    rng.random_range(0..nodes as u32),
                )
            })
            .collect();
        let edge_labels = (0..edges).map(|_| pick(rng, "e", edge_universe)).collect();
        FlatGraph {
            nodes,
            edges: edge_list,
            node_labels,
            edge_labels,
        }
    }

    /// Same graph built through the public API, one label at a time.
    pub fn build(&self) -> Graph {
        let mut g = Graph::with_nodes(self.nodes).unwrap();
        for (v, ls) in self.node_labels.iter().enumerate() {
            for l in ls {
                g.add_node_label(EntityId(v as u32), l).unwrap();
            }
        }
        for (i, &(s, t)) in self.edges.iter().enumerate() {
            let e = g.append_edge(EntityId(s), EntityId(t)).unwrap();
            assert_eq!(e.0 as usize, i);
            for l in &self.edge_labels[i] {
                g.add_edge_label(e, l).unwrap();
            }
        }
        g
    }
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Exhaustive simple-path enumeration that rescans the full edge list at
/// every step. Returns every matching path in lexicographic order, uncapped.
pub fn brute_paths(
    f: &FlatGraph,
    source: u32,
    max_hops: usize,
    dir: Direction,
    target: &dyn Fn(&BTreeSet<String>) -> bool,
    edge_ok: &dyn Fn(&BTreeSet<String>) -> bool,
) -> Vec<Vec<u32>> {
    let mut found = BTreeSet::new();
    let mut frontier = vec![vec![source]];
    for hop in 0..=max_hops {
        let mut next = Vec::new();
        for p in &frontier {
            let last = *p.last().unwrap();
            if target(&f.node_labels[last as usize]) {
                found.insert(p.clone());
            }
            if hop == max_hops {
                continue;
            }
            for (i, &(s, t)) in f.edges.iter().enumerate() {
                if !edge_ok(&f.edge_labels[i]) {
                    continue;
                }
                let mut step = |n: u32| {
                    if !p.contains(&n) {
                        let mut q = p.clone();
                        q.push(n);
                        next.push(q);
                    }
                };
                if matches!(dir, Direction::Out | Direction::Both) && s == last {
                    step(t);
                }
                if matches!(dir, Direction::In | Direction::Both) && t == last {
                    step(s);
                }
            }
        }
        frontier = next;
    }
    found.into_iter().collect()
}

/// Ontology signature computed from scratch: case-insensitive sort, byte
/// order breaking ties, joined by ':'.
pub fn naive_signature(labels: &BTreeSet<String>) -> String {
    let mut v: Vec<&String> = labels.iter().collect();
    v.sort_by(|a, b| a.to_lowercase().cmp(&b.to_lowercase()).then(a.cmp(b)));
    v.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(":")
}

/// Edge buckets `(src sig, dst sig, edge sig) -> count` by a single scan.
pub fn naive_buckets(f: &FlatGraph) -> BTreeMap<(String, String, String), u64> {
    let mut m = BTreeMap::new();
    for (i, &(s, t)) in f.edges.iter().enumerate() {
        let key = (
            naive_signature(&f.node_labels[s as usize]),
            naive_signature(&f.node_labels[t as usize]),
            naive_signature(&f.edge_labels[i]),
        );
        *m.entry(key).or_insert(0) += 1;
    }
    m
}

/// Modularity from the full adjacency matrix definition:
/// Q = 1/(2m) * sum_ij [A_ij - k_i k_j / 2m] * [c_i == c_j],
/// with a self-loop of weight w contributing 2w to A_ii.
pub fn matrix_modularity(n: usize, edges: &[(usize, usize, f64)], community: &[usize]) -> f64 {
    let mut a = vec![vec![0.0f64; n]; n];
    for &(i, j, w) in edges {
        if i == j {
            a[i][i] += 2.0 * w;
        } else {
            a[i][j] += w;
            a[j][i] += w;
        }
    }
    let k: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    if two_m == 0.0 {
        return 0.0;
    }
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if community[i] == community[j] {
                q += a[i][j] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Best modularity over every set partition of `n` nodes (restricted growth strings).
pub fn best_modularity(n: usize, edges: &[(usize, usize, f64)]) -> (f64, usize) {
    let mut best = f64::NEG_INFINITY;
    let mut count = 0;
    let mut c = vec![0usize; n];
    fn rec(
        i: usize,
        max: usize,
        c: &mut Vec<usize>,
        n: usize,
        edges: &[(usize, usize, f64)],
        best: &mut f64,
        count: &mut usize,
    ) {
        if i == n {
            *count += 1;
            *best = best.max(matrix_modularity(n, edges, c));
            return;
        }
        for v in 0..=max + 1 {
            c[i] = v;
            rec(i + 1, max.max(v), c, n, edges, best, count);
        }
    }
    if n == 0 {
        return (0.0, 1);
    }
    c[0] = 0;
    rec(1, 0, &mut c, n, edges, &mut best, &mut count);
    (best, count)
}
