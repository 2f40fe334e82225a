//! Two-phase Louvain modularity optimisation on a small undirected weighted graph.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Undirected weighted graph. Each undirected edge is stored once per endpoint
/// in `adj`; self-loops live in `loops` and count twice towards the degree.
#[derive(Debug, Clone, Default)]
pub struct WeightedGraph {
    adj: Vec<Vec<(usize, f64)>>,
    loops: Vec<f64>,
}

impl WeightedGraph {
    pub fn new(n: usize) -> Self {
        WeightedGraph {
            adj: vec![Vec::new(); n],
            loops: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    /// Adds `w` to the undirected edge `{a, b}` (a self-loop when `a == b`).
    pub fn add_edge(&mut self, a: usize, b: usize, w: f64) {
        if a == b {
            self.loops[a] += w;
            return;
        }
        for (x, y) in [(a, b), (b, a)] {
            match self.adj[x].iter_mut().find(|(n, _)| *n == y) {
                Some((_, acc)) => *acc += w,
                None => self.adj[x].push((y, w)),
            }
        }
    }

    fn degree(&self, i: usize) -> f64 {
        self.adj[i].iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * self.loops[i]
    }

    /// Sum of edge weights, each undirected edge and loop counted once.
    pub fn total_weight(&self) -> f64 {
        let half: f64 = self.adj.iter().flatten().map(|&(_, w)| w).sum::<f64>() / 2.0;
        half + self.loops.iter().sum::<f64>()
    }

    /// Newman modularity of `community` (one entry per node).
    pub fn modularity(&self, community: &[usize]) -> f64 {
        let m = self.total_weight();
        if m == 0.0 {
            return 0.0;
        }
        let k = community.iter().copied().max().map_or(0, |c| c + 1);
        let mut internal = vec![0.0; k];
        let mut degree = vec![0.0; k];
        for i in 0..self.len() {
            let c = community[i];
            degree[c] += self.degree(i);
            internal[c] += self.loops[i];
            for &(j, w) in &self.adj[i] {
                if community[j] == c && j > i {
                    internal[c] += w;
                }
            }
        }
        (0..k)
            .map(|c| internal[c] / m - (degree[c] / (2.0 * m)).powi(2))
            .sum()
    }

    /// Local moving to a fixpoint, starting from `community`. Returns the
    /// communities (dense from 0) and whether anything moved.
    fn local_moves(&self, mut community: Vec<usize>, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
        let n = self.len();
        let m = self.total_weight();
        if m == 0.0 {
            return (renumber(&community), false);
        }
        let k: Vec<f64> = (0..n).map(|i| self.degree(i)).collect();
        let mut tot = vec![0.0; n];
        for i in 0..n {
            tot[community[i]] += k[i];
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut moved_any = false;
        let mut links = vec![0.0; n];
        let mut touched: Vec<usize> = Vec::new();
        loop {
            let mut moved = false;
            for &i in &order {
                let home = community[i];
                for &(j, w) in &self.adj[i] {
                    let c = community[j];
                    if links[c] == 0.0 {
                        touched.push(c);
                    }
                    links[c] += w;
                }
                tot[home] -= k[i];
                let gain = |c: usize, links: &[f64]| links[c] / m - tot[c] * k[i] / (2.0 * m * m);
                let mut best = home;
                let mut best_gain = gain(home, &links);
                touched.sort_unstable();
                for &c in &touched {
                    let g = gain(c, &links);
                    if g > best_gain + 1e-12 {
                        best = c;
                        best_gain = g;
                    }
                }
                tot[best] += k[i];
                if best != home {
                    community[i] = best;
                    moved = true;
                    moved_any = true;
                }
                for &c in &touched {
                    links[c] = 0.0;
                }
                touched.clear();
            }
            if !moved {
                break;
            }
        }
        (renumber(&community), moved_any)
    }

    fn aggregate(&self, community: &[usize]) -> WeightedGraph {
        let k = community.iter().copied().max().map_or(0, |c| c + 1);
        let mut g = WeightedGraph::new(k);
        for i in 0..self.len() {
            let ci = community[i];
            g.loops[ci] += self.loops[i];
            for &(j, w) in &self.adj[i] {
                if j > i {
                    g.add_edge(ci, community[j], w);
                }
            }
        }
        g
    }
}

/// Dense renumbering in order of first appearance.
fn renumber(community: &[usize]) -> Vec<usize> {
    let mut map = vec![usize::MAX; community.len().max(1)];
    let mut next = 0;
    community
        .iter()
        .map(|&c| {
            if c >= map.len() {
                map.resize(c + 1, usize::MAX);
            }
            if map[c] == usize::MAX {
                map[c] = next;
                next += 1;
            }
            map[c]
        })
        .collect()
}

/// Independent runs per call; the best modularity wins.
const RESTARTS: usize = 8;

fn single_run(g: &WeightedGraph, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut membership: Vec<usize> = (0..g.len()).collect();
    let mut level = g.clone();
    loop {
        let (community, moved) = level.local_moves((0..level.len()).collect(), rng);
        if !moved {
            break;
        }
        for c in membership.iter_mut() {
            *c = community[*c];
        }
        level = level.aggregate(&community);
        if level.len() == 1 {
            break;
        }
    }
    // single-node moves on the original graph can still gain after aggregation
    let (refined, _) = g.local_moves(membership, rng);
    refined
}

/// Runs Louvain to a fixpoint. Returns the community of every input node
/// (dense, numbered by first appearance in node order) and its modularity.
pub fn louvain(g: &WeightedGraph, seed: u64) -> (Vec<usize>, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Vec<usize>, f64)> = None;
    for _ in 0..RESTARTS {
        let membership = renumber(&single_run(g, &mut rng));
        let q = g.modularity(&membership);
        if best.as_ref().is_none_or(|(_, bq)| q > *bq + 1e-12) {
            best = Some((membership, q));
        }
    }
    best.unwrap_or_default()
}
