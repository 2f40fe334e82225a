mod common;

use std::time::{Duration, Instant};

use kglb::bench::{
    compare, memory_scaling, BaselineStore, LabelCount, Op, OpsScript, SyntheticSpec,
};
use kglb::{EntityId, LabelId, LabelStore};
use rand::seq::index::sample;

use common::seeded;

/// `n` entities labeled `common`, of which `hits` (spread at random) also carry `rare`.
fn rare_store(n: usize, hits: usize) -> (LabelStore, LabelId) {
    let common = LabelId(1);
    let rare = LabelId(2);
    let mut store = LabelStore::new(n);
    for e in 0..n {
        store.add_label_id(EntityId(e as u32), common).unwrap();
    }
    for e in sample(&mut seeded(n as u64), n, hits) {
        store.add_label_id(EntityId(e as u32), rare).unwrap();
    }
    (store, rare)
}

fn median_walk(store: &LabelStore, l: LabelId) -> (Duration, usize) {
    let mut times = Vec::new();
    for _ in 0..41 {
        let t0 = Instant::now();
        let sum: u64 = store.entities_with_label(l).map(|e| e.0 as u64).sum();
        times.push(t0.elapsed());
        std::hint::black_box(sum);
    }
    times.sort();
    (times[times.len() / 2], store.entities_with_label(l).count())
}

/// Soft timing check: with the result size fixed, growing N tenfold should not
/// grow the lookup time more than twofold. Wall-clock numbers depend on the
/// machine (cache sizes in particular), so the check compares medians.
#[test]
fn label_lookup_scales_with_result_not_n() {
    let (small, l) = rare_store(100_000, 2000);
    let (large, _) = rare_store(1_000_000, 2000);
    let (ts, cs) = median_walk(&small, l);
    let (tl, cl) = median_walk(&large, l);
    assert_eq!((cs, cl), (2000, 2000));
    let ratio = tl.as_secs_f64() / ts.as_secs_f64().max(1e-9);
    eprintln!("entities_with_label, 2000 hits: N=1e5 {ts:?}, N=1e6 {tl:?}, ratio {ratio:.2}");
    assert!(ratio <= 2.0, "lookup time grew {ratio:.2}x for 10x N");
}

#[test]
fn memory_grows_linearly_at_small_scale() {
    // a fixed universe costs a constant; everything else is per entity
    let pts = memory_scaling(&[1000, 10_000, 100_000], 2, 10, 1).unwrap();
    for w in pts.windows(2) {
        assert_eq!(w[1].dls_slot_bytes, 10 * w[0].dls_slot_bytes);
    }
    let b: Vec<f64> = pts.iter().map(|p| p.label_bytes as f64).collect();
    let r = (b[2] - b[1]) / (b[1] - b[0]);
    assert!((9.9..=10.1).contains(&r), "increment ratio {r}");
}

#[test]
fn compare_cross_checks_custom_script() {
    let spec = SyntheticSpec {
        node_count: 20_000,
        edge_count: 1000,
        node_label_universe: 12,
        edge_label_universe: 2,
        labels_per_node: LabelCount::Zipf {
            max: 5,
            exponent: 1.0,
        },
        labels_per_edge: LabelCount::Fixed(1),
        seed: 4,
    };
    let ops = OpsScript {
        ops: vec![
            Op::Label("n0".into()),
            Op::Label("not-a-label".into()),
            Op::All(vec!["n1".into(), "n2".into(), "n3".into()]),
            Op::LabelsOf(19_999),
        ],
        repeat: 3,
    };
    let r = compare(&spec, &ops).unwrap();
    assert_eq!(r.results_checked, 12);
    assert_eq!(r.timings["entities_with_label"].queries, 6);
    // the slot array alone is below the baseline's per-entity set overhead
    assert!(r.dls_slot_bytes < r.baseline_bytes);
    eprintln!(
        "label store {} bytes, baseline {} bytes",
        r.label_store_bytes, r.baseline_bytes
    );
}

#[test]
fn baseline_agrees_with_store_after_edits() {
    let mut store = LabelStore::new(500);
    let mut base = BaselineStore::new();
    let mut rng = seeded(12);
    use rand::Rng;
    for _ in 0..20_000 {
        let e = EntityId(rng.random_range(0..500));
        let l = LabelId(rng.random_range(1..8));
        if rng.random_bool(0.6) {
            store.add_label_id(e, l).unwrap();
            base.add(e, l);
        } else {
            store.remove_label_id(e, l).unwrap();
            base.remove(e, l);
        }
    }
    for l in 1..8 {
        let mut a: Vec<EntityId> = store.entities_with_label(LabelId(l)).collect();
        a.sort_unstable();
        assert_eq!(a, base.entities_with_label(LabelId(l)));
    }
    let rebuilt = BaselineStore::from_store(&store);
    for e in 0..500 {
        assert_eq!(rebuilt.labels_of(EntityId(e)), base.labels_of(EntityId(e)));
    }
}
