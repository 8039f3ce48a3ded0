//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use gseed::geometry::DEFAULT_COVERAGE_CAP;
use gseed::key::TypeCode;
use gseed::pipeline::IngestMeta;
use gseed::{
    decode, BBox, CellCode, GeoCoord, Geometry, IndexStore, Pipeline, RecordEntry, Timestamp,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const UNITS_PER_DEGREE: u64 = 3600 * 2048;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Coordinate value half a unit above `units` so the floor is unambiguous.
pub fn value_of(units: u64, negative: bool) -> f64 {
    let v = (units as f64 + 0.5) / UNITS_PER_DEGREE as f64;
    if negative {
        -v
    } else {
        v
    }
}

/// 32-bit packed dimension code built from integer units by division.
pub fn packed_from_units(units: u64) -> u32 {
    let deg = units / UNITS_PER_DEGREE;
    let rem = units % UNITS_PER_DEGREE;
    let min = rem / (60 * 2048);
    let rem = rem % (60 * 2048);
    let sec = rem / 2048;
    let frac = rem % 2048;
    ((deg << 23) | (min << 17) | (sec << 11) | frac) as u32
}

/// Cell text built digit by digit from the two packed magnitudes.
pub fn oracle_code(
    lon_units: u64,
    lon_neg: bool,
    lat_units: u64,
    lat_neg: bool,
    level: u8,
) -> String {
    let lon_bits = format!("{:031b}", packed_from_units(lon_units));
    let lat_bits = format!("{:031b}", packed_from_units(lat_units));
    let mut s = String::from("G");
    if level >= 1 {
        s.push(char::from(b'0' + 2 * lat_neg as u8 + lon_neg as u8));
    }
    for k in 0..level.saturating_sub(1) as usize {
        let la = lat_bits.as_bytes()[k] - b'0';
        let lo = lon_bits.as_bytes()[k] - b'0';
        s.push(char::from(b'0' + 2 * la + lo));
    }
    s
}

/// Closed-rectangle interior overlap of a cell and a box with area.
pub fn interiors_overlap(cell: &gseed::CellBounds, b: &BBox) -> bool {
    cell.lon_min < b.max_lon
        && cell.lon_max > b.min_lon
        && cell.lat_min < b.max_lat
        && cell.lat_max > b.min_lat
}

/// All real cells of `level` whose interior overlaps `b`, found by
/// descending the tree from the root.
pub fn tree_cover(b: &BBox, level: u8) -> Vec<CellCode> {
    let mut out = Vec::new();
    let mut stack = vec![CellCode::ROOT];
    while let Some(c) = stack.pop() {
        let Ok(bounds) = decode(&c) else { continue };
        if !interiors_overlap(&bounds, b) {
            continue;
        }
        if c.level() == level {
            out.push(c);
        } else {
            stack.extend(c.children().unwrap());
        }
    }
    out.sort();
    out
}

/// Ray-casting point-in-polygon.
pub fn inside_ring(ring: &[(f64, f64)], x: f64, y: f64) -> bool {
    let mut inside = false;
    let n = ring.len();
    for i in 0..n {
        let (x1, y1) = ring[i];
        let (x2, y2) = ring[(i + 1) % n];
        if (y1 > y) != (y2 > y) && x < x1 + (y - y1) * (x2 - x1) / (y2 - y1) {
            inside = !inside;
        }
    }
    inside
}

pub fn coord(lon: f64, lat: f64) -> GeoCoord {
    GeoCoord::new(lon, lat).unwrap()
}

fn random_geometry(r: &mut impl Rng, region: &BBox) -> Geometry {
    let x = r.random_range(region.min_lon..region.max_lon);
    let y = r.random_range(region.min_lat..region.max_lat);
    match r.random_range(0..3) {
        0 => Geometry::point(x, y).unwrap(),
        1 => {
            let w = r.random_range(0.0001..0.05);
            let h = r.random_range(0.0001..0.05);
            Geometry::bbox_geometry(x, y, (x + w).min(180.0), (y + h).min(90.0)).unwrap()
        }
        _ => {
            let n = r.random_range(2..6);
            let v = (0..n)
                .map(|_| {
                    coord(
                        (x + r.random_range(-0.02..0.02)).clamp(-180.0, 180.0),
                        (y + r.random_range(-0.02..0.02)).clamp(-90.0, 90.0),
                    )
                })
                .collect();
            Geometry::polyline(v).unwrap()
        }
    }
}

/// `n` pipeline-encoded records of mixed type, geometry and level inside
/// `region`; duplicate keys are resampled.
pub fn random_store(seed: u64, n: usize, region: &BBox) -> IndexStore {
    let mut r = rng(seed);
    let pipeline = Pipeline::default();
    let types = [
        TypeCode::Raster,
        TypeCode::Vector,
        TypeCode::Image,
        TypeCode::Table,
        TypeCode::Unknown,
    ];
    let mut store = IndexStore::new();
    let mut i = 0;
    while store.len() < n {
        i += 1;
        let g = random_geometry(&mut r, region);
        let t = types[r.random_range(0..types.len())];
        let mut meta = IngestMeta::default();
        match t {
            TypeCode::Raster => meta.res_m = Some(r.random_range(0.5..100.0)),
            TypeCode::Image => meta.gps = r.random_bool(0.5),
            _ => {}
        }
        let ts = Timestamp::date(
            2020 + r.random_range(0..5),
            r.random_range(1..13),
            r.random_range(1..29),
        )
        .unwrap();
        let rec = pipeline
            .encode_record(&format!("f{i}"), Some(t), Some(g), ts, meta)
            .unwrap();
        let _ = store.insert(rec);
    }
    store
}

pub fn brute_prefix<'a>(store: &'a IndexStore, prefix: &str) -> Vec<&'a RecordEntry> {
    store
        .iter()
        .filter(|r| r.pk_text().starts_with(prefix))
        .collect()
}

pub fn brute_bbox<'a>(store: &'a IndexStore, b: &BBox) -> Vec<&'a RecordEntry> {
    store.iter().filter(|r| r.bbox.intersects(b)).collect()
}

pub fn keys(records: &[&RecordEntry]) -> Vec<String> {
    records.iter().map(|r| r.pk_text()).collect()
}

/// Random prefix query: a random record key cut after some digits, or
/// the whole key.
pub fn random_prefix(r: &mut impl Rng, store: &IndexStore) -> String {
    let pk = store
        .iter()
        .nth(r.random_range(0..store.len()))
        .unwrap()
        .pk_text();
    let cell_len = pk.find('|').unwrap();
    if r.random_bool(0.1) {
        return pk;
    }
    pk[..r.random_range(1..=cell_len)].to_string()
}

pub fn random_box(r: &mut impl Rng, region: &BBox) -> BBox {
    let x = r.random_range(region.min_lon..region.max_lon);
    let y = r.random_range(region.min_lat..region.max_lat);
    let w = r.random_range(0.0..0.3);
    let h = r.random_range(0.0..0.3);
    BBox::new(x, y, x + w, y + h).unwrap()
}

pub fn default_cap() -> u64 {
    DEFAULT_COVERAGE_CAP
}
