mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use kglb::ingest::ingest_path;
use kglb::ontology::{build_ontology, emit_dot};
use kglb::query::{n_hop, HopQuery, LabelPredicate, NodeRef};
use kglb::{Direction, EntityId, Graph, LabelId, TupleId};

use common::{brute_paths, naive_buckets, naive_signature, FlatGraph};

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/wiki")
}

fn wiki() -> Graph {
    ingest_path(&fixture().join("manifest.json")).unwrap()
}

/// The fixture read back with the csv crate directly, no store involved.
fn flat() -> (Vec<String>, FlatGraph) {
    let mut names = Vec::new();
    let mut node_labels = Vec::new();
    let mut rdr = csv::Reader::from_path(fixture().join("people.csv")).unwrap();
    for rec in rdr.records() {
        let rec = rec.unwrap();
        names.push(rec[0].to_string());
        node_labels.push(
            [rec[1].to_string(), rec[2].to_string()]
                .into_iter()
                .collect(),
        );
    }
    let mut edges = Vec::new();
    let mut edge_labels = Vec::new();
    let mut rdr = csv::Reader::from_path(fixture().join("knows.csv")).unwrap();
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let pos = |n: &str| names.iter().position(|x| x == n).unwrap() as u32;
        edges.push((pos(&rec[0]), pos(&rec[1])));
        edge_labels.push(BTreeSet::from([rec[2].to_string()]));
    }
    let f = FlatGraph {
        nodes: names.len(),
        edges,
        node_labels,
        edge_labels,
    };
    (names, f)
}

#[test]
fn dictionary_follows_seed_order() {
    let g = wiki();
    let d = g.dict();
    let expect = [
        "FEMALE", "chess", "golf", "dance", "business", "Gender", "Interest", "MALE",
    ];
    for (i, l) in expect.iter().enumerate() {
        assert_eq!(d.get(l), Some(LabelId(i as u32 + 1)), "{l}");
    }
    let group = |k| {
        d.values_of(LabelId(k))
            .into_iter()
            .map(|l| l.0)
            .collect::<BTreeSet<_>>()
    };
    assert_eq!(group(7), BTreeSet::from([2, 3, 4, 5]));
    assert_eq!(group(6), BTreeSet::from([1, 8]));
}

#[test]
fn tuples_and_rings_match_rescan() {
    let g = wiki();
    let (names, f) = flat();
    let store = g.node_labels();
    let reg = store.registry();
    assert_eq!(reg.lookup(&[LabelId(2), LabelId(8)]), Some(TupleId(1)));
    assert_eq!(reg.lookup(&[LabelId(3), LabelId(8)]), Some(TupleId(4)));
    assert_eq!(reg.tuples_with_label(LabelId(8)), &[TupleId(1), TupleId(4)]);

    // every entity's labels equal the file's labels
    for (v, name) in names.iter().enumerate() {
        let e = g.node_by_key(name).unwrap();
        assert_eq!(e.0 as usize, v);
        let got: BTreeSet<String> = g
            .node_label_strings(e)
            .unwrap()
            .into_iter()
            .map(String::from)
            .collect();
        assert_eq!(got, f.node_labels[v], "{name}");
    }
    // rings partition the entities by identical label sets
    let mut by_set: BTreeMap<&BTreeSet<String>, BTreeSet<u32>> = BTreeMap::new();
    for (v, ls) in f.node_labels.iter().enumerate() {
        by_set.entry(ls).or_default().insert(v as u32);
    }
    for members in by_set.values() {
        let first = EntityId(*members.iter().next().unwrap());
        let t = store.tuple_of(first).unwrap();
        let ring: BTreeSet<u32> = store.entities_with_tuple(t).unwrap().map(|e| e.0).collect();
        assert_eq!(&ring, members);
    }
    let tom_alex: BTreeSet<String> = store
        .entities_with_tuple(TupleId(1))
        .unwrap()
        .map(|e| g.display_name(e))
        .collect();
    assert_eq!(
        tom_alex,
        BTreeSet::from(["Tom".to_string(), "Alex".to_string()])
    );
}

#[test]
fn ontology_matches_rescan() {
    let g = wiki();
    let (_, f) = flat();
    let o = build_ontology(&g).unwrap();
    let got: BTreeMap<(String, String, String), u64> = o
        .edges
        .iter()
        .map(|(k, &c)| ((k.source.clone(), k.target.clone(), k.edge.clone()), c))
        .collect();
    assert_eq!(got, naive_buckets(&f));
    let sigs: BTreeSet<String> = f.node_labels.iter().map(naive_signature).collect();
    assert_eq!(o.nodes, sigs);
    let dot = emit_dot(&o);
    assert!(
        dot.contains(r#""chess:MALE" -> "chess:MALE" [label="friend 20.0%"];"#),
        "{dot}"
    );
}

#[test]
fn hop_queries_match_brute_force() {
    let g = wiki();
    let (_, f) = flat();
    for source in 0..5u32 {
        for hops in 0..=4 {
            for dir in [Direction::Out, Direction::In, Direction::Both] {
                let mut q = HopQuery::new(NodeRef::Id(source), hops);
                q.direction = dir;
                q.target = Some(LabelPredicate::Any(vec!["FEMALE".into()]));
                let got: Vec<Vec<u32>> = n_hop(&g, &q, 10)
                    .unwrap()
                    .paths
                    .into_iter()
                    .map(|p| p.into_iter().map(|e| e.0).collect())
                    .collect();
                let want = brute_paths(&f, source, hops, dir, &|ls| ls.contains("FEMALE"), &|_| {
                    true
                });
                assert_eq!(got, want, "source {source} hops {hops} {dir:?}");
            }
        }
    }
}
