mod common;

use std::path::PathBuf;

use kglb::bench::{generate, LabelCount, SyntheticSpec};
use kglb::ingest::ingest_path;
use kglb::persistence::{dump, load, ENDIAN_TAG, MAGIC, VERSION};
use kglb::{EntityId, Error, Graph};

use common::{seeded, FlatGraph};

fn fixtures() -> Vec<(String, Graph)> {
    let wiki =
        ingest_path(&PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/wiki/manifest.json"))
            .unwrap();
    let mut churned = FlatGraph::random(&mut seeded(1), 300, 900, 6, 3).build();
    for v in (0..300).step_by(3) {
        churned.remove_node_label(EntityId(v), "n2").unwrap();
        churned.remove_node_label(EntityId(v), "n4").unwrap();
    }
    let synthetic = generate(&SyntheticSpec {
        node_count: 2000,
        edge_count: 8000,
        node_label_universe: 10,
        edge_label_universe: 5,
        labels_per_node: LabelCount::Zipf {
            max: 4,
            exponent: 1.3,
        },
        labels_per_edge: LabelCount::Fixed(2),
        seed: 3,
    })
    .unwrap();
    vec![
        ("empty".into(), Graph::new()),
        ("unlabeled".into(), Graph::with_nodes(17).unwrap()),
        ("wiki".into(), wiki),
        ("churned".into(), churned),
        ("synthetic".into(), synthetic),
    ]
}

#[test]
fn dump_load_dump_is_identical() {
    for (name, g) in fixtures() {
        let a = dump(&g);
        let back = load(&a).unwrap();
        assert_eq!(back, g, "{name}");
        assert_eq!(dump(&back), a, "{name}");
    }
}

#[test]
fn header_layout() {
    let b = dump(&Graph::new());
    assert_eq!(&b[..4], MAGIC);
    assert_eq!(u16::from_le_bytes([b[4], b[5]]), VERSION);
    assert_eq!(u16::from_le_bytes([b[6], b[7]]), ENDIAN_TAG);
}

#[test]
fn reload_preserves_behavior() {
    let (_, g) = fixtures().swap_remove(3);
    let mut a = g.clone();
    let mut b = load(&dump(&g)).unwrap();
    // identical recycle stacks hand out identical ids afterwards
    for v in 0..50u32 {
        let ta = a.add_node_label(EntityId(v), "fresh").unwrap();
        let tb = b.add_node_label(EntityId(v), "fresh").unwrap();
        assert_eq!(ta, tb);
    }
    assert_eq!(dump(&a), dump(&b));
}

#[test]
fn every_truncation_is_rejected() {
    let (_, g) = fixtures().swap_remove(2);
    let bytes = dump(&g);
    for cut in 0..bytes.len() {
        let r = load(&bytes[..cut]);
        assert!(
            matches!(r, Err(Error::NotASnapshot | Error::CorruptSnapshot { .. })),
            "cut at {cut}: {r:?}"
        );
    }
}

#[test]
fn single_byte_corruption_never_panics() {
    let (_, g) = fixtures().swap_remove(2);
    let bytes = dump(&g);
    for i in 0..bytes.len() {
        for flip in [0x01u8, 0x80, 0xff] {
            let mut b = bytes.clone();
            b[i] ^= flip;
            if let Ok(g2) = load(&b) {
                // accepted corruptions must still be internally consistent
                g2.node_labels().check_invariants();
                g2.edge_labels().check_invariants();
            }
        }
    }
}
