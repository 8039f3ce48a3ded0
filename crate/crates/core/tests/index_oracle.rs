mod common;

use std::collections::BTreeSet;

use common::*;
use gseed::{BBox, IndexStore};
use rand::Rng;

fn region() -> BBox {
    BBox::new(109.5, 30.8, 111.5, 32.3).unwrap()
}

#[test]
fn prefix_queries_match_linear_scan() {
    let store = random_store(11, 400, &region());
    let mut r = rng(12);
    assert_eq!(store.prefix_query("G").unwrap().len(), store.len());
    for _ in 0..200 {
        let p = random_prefix(&mut r, &store);
        assert_eq!(
            keys(&store.prefix_query(&p).unwrap()),
            keys(&brute_prefix(&store, &p)),
            "prefix {p}"
        );
    }
    assert!(store.prefix_query("G4").is_err());
    assert!(store.prefix_query("x").is_err());
}

#[test]
fn bbox_queries_match_linear_scan() {
    let store = random_store(21, 400, &region());
    let mut r = rng(22);
    for i in 0..200 {
        let b = random_box(&mut r, &region());
        let level = if i % 3 == 0 {
            Some(r.random_range(8..=16))
        } else {
            None
        };
        let got = keys(&store.bbox_query(&b, level).unwrap());
        assert_eq!(
            got,
            keys(&brute_bbox(&store, &b)),
            "box {b:?} level {level:?}"
        );
    }
    let world = BBox::new(-180.0, -90.0, 180.0, 90.0).unwrap();
    assert_eq!(store.bbox_query(&world, None).unwrap().len(), store.len());
    let far = BBox::new(-60.0, -40.0, -59.0, -39.0).unwrap();
    assert!(store.bbox_query(&far, None).unwrap().is_empty());
}

#[test]
fn postings_are_union_of_covers() {
    let store = random_store(31, 300, &region());
    let from_records: BTreeSet<_> = store
        .iter()
        .flat_map(|r| r.covers.cells().to_vec())
        .collect();
    let from_postings: BTreeSet<_> = store.posting_cells().copied().collect();
    assert_eq!(from_records, from_postings);
    for c in &from_postings {
        for pk in store.postings(c) {
            assert!(store.get(pk).unwrap().covers.contains(c));
        }
    }
}

#[test]
fn save_load_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("index.tsv");

    let empty = IndexStore::new();
    empty.save(&path).unwrap();
    assert!(IndexStore::load(&path).unwrap().is_empty());

    let store = random_store(41, 1000, &region());
    store.save(&path).unwrap();
    let back = IndexStore::load(&path).unwrap();
    assert_eq!(back, store);
    assert!(back.iter().zip(store.iter()).all(|(a, b)| a == b));
    // byte-identical second write
    let again = dir.path().join("again.tsv");
    back.save(&again).unwrap();
    assert_eq!(
        std::fs::read(&path).unwrap(),
        std::fs::read(&again).unwrap()
    );

    let text = std::fs::read_to_string(&path).unwrap();
    let cut: String = text.lines().take(5).collect::<Vec<_>>().join("\n")
        + "\n"
        + &text.lines().nth(5).unwrap()[..20];
    std::fs::write(&path, cut).unwrap();
    match IndexStore::load(&path) {
        Err(gseed::Error::Load { line, .. }) => assert_eq!(line, 6),
        other => panic!("expected a load error, got {other:?}"),
    }
}
