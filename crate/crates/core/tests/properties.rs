mod common;

use common::*;
use gseed::geohash::{cell_size, geohash_cover, geohash_decode, geohash_encode};
use gseed::geometry::{touching_cells, DEFAULT_COVERAGE_CAP};
use gseed::key::TypeCode;
use gseed::{
    cover_geometry, decode, z_encode, BBox, CellCode, CompositeKey, GeoCoord, Geometry, Timestamp,
};
use proptest::prelude::*;

fn coords() -> impl Strategy<Value = GeoCoord> {
    (-180.0f64..=180.0, -90.0f64..=90.0).prop_map(|(x, y)| coord(x, y))
}

fn cells() -> impl Strategy<Value = CellCode> {
    (coords(), 0u8..=32).prop_map(|(c, l)| z_encode(c, l).unwrap())
}

fn timestamps() -> impl Strategy<Value = Timestamp> {
    (
        0u16..=9999,
        1u8..=12,
        1u8..=28,
        proptest::option::of((0u8..24, 0u8..60)),
    )
        .prop_map(|(y, m, d, t)| match t {
            Some((h, mi)) => Timestamp::date_time(y, m, d, h, mi).unwrap(),
            None => Timestamp::date(y, m, d).unwrap(),
        })
}

fn type_codes() -> impl Strategy<Value = TypeCode> {
    proptest::sample::select(TypeCode::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn encode_matches_bit_layout_oracle(
        lon_u in 0u64..180 * UNITS_PER_DEGREE,
        lat_u in 0u64..90 * UNITS_PER_DEGREE,
        lon_neg: bool,
        lat_neg: bool,
        level in 0u8..=32,
    ) {
        let c = coord(value_of(lon_u, lon_neg), value_of(lat_u, lat_neg));
        prop_assert_eq!(
            z_encode(c, level).unwrap().to_string(),
            oracle_code(lon_u, lon_neg, lat_u, lat_neg, level)
        );
    }

    #[test]
    fn decoded_cell_contains_point(c in coords(), level in 0u8..=32) {
        let cell = z_encode(c, level).unwrap();
        let b = decode(&cell).unwrap();
        prop_assert!(b.contains(c), "{cell} {b:?} misses {c:?}");
        let (x, y) = b.center();
        // coarse cells extend past the poles and the antimeridian
        if let Ok(center) = GeoCoord::new(x, y) {
            prop_assert_eq!(z_encode(center, level).unwrap(), cell);
        }
    }

    #[test]
    fn parent_is_prefix(c in coords(), level in 1u8..=32) {
        let cell = z_encode(c, level).unwrap();
        let parent = z_encode(c, level - 1).unwrap();
        prop_assert_eq!(cell.parent().unwrap(), parent);
        prop_assert!(cell.to_string().starts_with(&parent.to_string()));
        prop_assert!(cell.children().map_or(true, |ch| ch.iter().all(|k| k.parent().unwrap() == cell)));
    }

    #[test]
    fn text_round_trip_and_order(a in cells(), b in cells()) {
        prop_assert_eq!(a.to_string().parse::<CellCode>().unwrap(), a);
        prop_assert_eq!(a.cmp(&b), a.to_string().cmp(&b.to_string()));
    }

    #[test]
    fn key_round_trip(cell in cells(), ts in timestamps(), t in type_codes()) {
        let k = CompositeKey::new(cell, ts, t);
        let text = k.to_string();
        prop_assert_eq!(text.parse::<CompositeKey>().unwrap().to_string(), text);
    }

    #[test]
    fn keys_sort_by_cell_then_time(a in cells(), b in cells(), ta in timestamps(), tb in timestamps()) {
        let ka = CompositeKey::new(a, ta, TypeCode::Vector).to_string();
        let kb = CompositeKey::new(b, tb, TypeCode::Vector).to_string();
        if a == b && ta.granularity() == tb.granularity() {
            prop_assert_eq!(ka.cmp(&kb), ta.cmp(&tb));
        }
        if !a.is_related(&b) {
            prop_assert_eq!(ka.cmp(&kb), a.cmp(&b));
        }
    }

    #[test]
    fn geohash_round_trip(c in coords(), n in 1usize..=12) {
        let h = geohash_encode(c, n).unwrap();
        let b = geohash_decode(&h).unwrap();
        prop_assert!(b.contains(c));
        let (x, y) = b.center();
        prop_assert_eq!(geohash_encode(coord(x, y), n).unwrap(), h.clone());
        if n < 12 {
            prop_assert!(geohash_encode(c, n + 1).unwrap().starts_with(&h));
        }
        let (w, hgt) = cell_size(n);
        prop_assert!(((b.lon_max - b.lon_min) - w).abs() < 1e-9);
        prop_assert!(((b.lat_max - b.lat_min) - hgt).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn box_cover_matches_tree_oracle(
        x in -179.0f64..178.0,
        y in -89.0f64..88.0,
        w in 0.001f64..1.5,
        h in 0.001f64..1.5,
        level in 6u8..=12,
    ) {
        let b = BBox::new(x, y, x + w, y + h).unwrap();
        let got = cover_geometry(&Geometry::Box(b), level, DEFAULT_COVERAGE_CAP).unwrap();
        prop_assert_eq!(got.cells(), &tree_cover(&b, level)[..]);
    }

    #[test]
    fn touching_is_superset_of_cover(
        x in -10.0f64..10.0,
        y in -10.0f64..10.0,
        w in 0.0f64..0.5,
        h in 0.0f64..0.5,
        level in 8u8..=13,
    ) {
        let b = BBox::new(x, y, x + w, y + h).unwrap();
        let touch = touching_cells(&b, level, DEFAULT_COVERAGE_CAP).unwrap();
        let cover = cover_geometry(&Geometry::Box(b), level, DEFAULT_COVERAGE_CAP).unwrap();
        for c in cover.cells() {
            prop_assert!(touch.contains(c));
        }
        for c in touch.cells() {
            let cb = decode(c).unwrap();
            prop_assert!(cb.lon_min <= b.max_lon && cb.lon_max >= b.min_lon && cb.lat_min <= b.max_lat && cb.lat_max >= b.min_lat);
        }
    }

    #[test]
    fn polygon_cover_brackets_sampling_oracle(
        cx in 100.0f64..120.0,
        cy in 20.0f64..40.0,
        r in 0.05f64..0.6,
        n in 3usize..9,
        level in 10u8..=13,
    ) {
        let ring: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / n as f64;
                (cx + r * a.cos(), cy + r * (0.7 + 0.3 * (k % 2) as f64) * a.sin())
            })
            .collect();
        let g = Geometry::polygon(ring.iter().map(|&(x, y)| coord(x, y)).collect()).unwrap();
        let cover = cover_geometry(&g, level, DEFAULT_COVERAGE_CAP).unwrap();
        let bb = g.bbox();
        // every cell with a sampled interior point inside the ring is covered
        for c in tree_cover(&bb, level) {
            let cb = decode(&c).unwrap();
            let hit = (1..8).any(|i| (1..8).any(|j| {
                let x = cb.lon_min + cb.width() * i as f64 / 8.0;
                let y = cb.lat_min + cb.height() * j as f64 / 8.0;
                inside_ring(&ring, x, y)
            }));
            if hit {
                prop_assert!(cover.contains(&c), "{c} has interior samples inside the ring");
            }
        }
        // and every covered cell overlaps the ring's box
        for c in cover.cells() {
            prop_assert!(interiors_overlap(&decode(c).unwrap(), &bb));
        }
    }

    #[test]
    fn geohash_cover_matches_scan(
        x in -170.0f64..160.0,
        y in -80.0f64..70.0,
        w in 0.01f64..3.0,
        h in 0.01f64..3.0,
        n in 2usize..=4,
    ) {
        let b = BBox::new(x, y, x + w, y + h).unwrap();
        let got = geohash_cover(&b, n, DEFAULT_COVERAGE_CAP).unwrap();
        // scan every cell of a neighbourhood by its centre
        let (cw, ch) = cell_size(n);
        let mut want = Vec::new();
        let mut yy = (y / ch).floor() * ch - ch;
        while yy < y + h + ch {
            let mut xx = (x / cw).floor() * cw - cw;
            while xx < x + w + cw {
                let (px, py) = (xx + cw / 2.0, yy + ch / 2.0);
                if (-180.0..=180.0).contains(&px) && (-90.0..=90.0).contains(&py) {
                    let code = geohash_encode(coord(px, py), n).unwrap();
                    let gb = geohash_decode(&code).unwrap();
                    if gb.lon_min < b.max_lon && gb.lon_max > b.min_lon && gb.lat_min < b.max_lat && gb.lat_max > b.min_lat {
                        want.push(code);
                    }
                }
                xx += cw;
            }
            yy += ch;
        }
        want.sort();
        want.dedup();
        prop_assert_eq!(got, want);
    }
}
