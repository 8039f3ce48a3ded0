//! Seeded synthetic data: clustered point clouds and a mixed-type corpus.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::geometry::BBox;
use crate::geometry::CoverSet;
use crate::geosot::{decode, extent_degrees, z_encode, CellCode, GeoCoord, METERS_PER_DEGREE};
use crate::key::{CompositeKey, Timestamp, TypeCode};
use crate::pipeline::{IngestMeta, RecordEntry};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Default study area, 0.9 x 0.5 degrees of mountain forest.
pub fn study_area() -> BBox {
    BBox {
        min_lon: 110.05,
        min_lat: 31.35,
        max_lon: 110.95,
        max_lat: 31.85,
    }
}

fn clamp_into(b: &BBox, lon: f64, lat: f64) -> GeoCoord {
    GeoCoord::new(
        lon.clamp(b.min_lon, b.max_lon),
        lat.clamp(b.min_lat, b.max_lat),
    )
    .expect("study boxes hold valid coordinates")
}

/// `n` points in Gaussian clusters with centres uniform over `region`.
pub fn clustered_points(
    rng: &mut impl Rng,
    n: usize,
    region: &BBox,
    clusters: usize,
    sigma_deg: f64,
) -> Vec<GeoCoord> {
    let clusters = clusters.max(1);
    let centers: Vec<(f64, f64)> = (0..clusters)
        .map(|_| {
            (
                rng.random_range(region.min_lon..=region.max_lon),
                rng.random_range(region.min_lat..=region.max_lat),
            )
        })
        .collect();
    let spread = Normal::new(0.0, sigma_deg).expect("sigma is finite and positive");
    (0..n)
        .map(|i| {
            let (cx, cy) = centers[i % clusters];
            clamp_into(region, cx + spread.sample(rng), cy + spread.sample(rng))
        })
        .collect()
}

/// Default cloud of the benchmark suites.
pub fn default_cloud(seed: u64, n: usize) -> Vec<GeoCoord> {
    clustered_points(&mut rng(seed), n, &study_area(), 200, 0.003)
}

/// Square box of the given area centred on `center`, measured with the
/// same metres per degree on both axes.
pub fn square_of_area(center: (f64, f64), area_km2: f64) -> BBox {
    let half = 0.5 * area_km2.sqrt() * 1000.0 / METERS_PER_DEGREE;
    BBox {
        min_lon: center.0 - half,
        min_lat: center.1 - half,
        max_lon: center.0 + half,
        max_lat: center.1 + half,
    }
}

/// Clustered points inside `b` whose bounding box is exactly `b`.
pub fn cloud_spanning(rng: &mut impl Rng, n: usize, b: &BBox) -> Vec<GeoCoord> {
    let n = n.max(2);
    let sigma = 0.1 * b.width().max(b.height()).max(1e-9);
    let mut pts = clustered_points(rng, n - 2, b, 8, sigma);
    pts.push(clamp_into(b, b.min_lon, b.min_lat));
    pts.push(clamp_into(b, b.max_lon, b.max_lat));
    pts
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FileKind {
    Point,
    Line,
    Polygon,
    Raster,
}

impl FileKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FileKind::Point => "point",
            FileKind::Line => "line",
            FileKind::Polygon => "polygon",
            FileKind::Raster => "raster",
        }
    }
}

/// Coordinates extracted from one input file.
#[derive(Clone, Debug, PartialEq)]
pub struct CorpusFile {
    pub kind: FileKind,
    pub coords: Vec<GeoCoord>,
}

fn cell_center(cell: &CellCode) -> GeoCoord {
    let (lon, lat) = decode(cell).expect("generated cells are real").center();
    GeoCoord::new(lon, lat).expect("centre of a real cell")
}

/// Distinct level-`level` cells drawn from `region`.
fn distinct_cells(rng: &mut impl Rng, region: &BBox, level: u8, count: usize) -> Vec<CellCode> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < count * 100 {
        attempts += 1;
        let p = GeoCoord::new(
            rng.random_range(region.min_lon..region.max_lon),
            rng.random_range(region.min_lat..region.max_lat),
        )
        .expect("region is valid");
        let c = z_encode(p, level).expect("level is valid");
        if seen.insert(c) {
            out.push(c);
        }
    }
    out
}

/// Mixed corpus with `per_kind` files of each kind at grid `level`:
/// point files sample distinct cells, rasters are tiled one tile per cell,
/// lines walk about half a cell per vertex, and parcel polygons are
/// digitised densely inside roughly one cell.
pub fn heterogeneous_corpus(seed: u64, per_kind: usize, level: u8) -> Vec<CorpusFile> {
    let mut rng = rng(seed);
    let region = study_area();
    let cell = extent_degrees(level);
    let mut files = Vec::with_capacity(per_kind * 4);

    for _ in 0..per_kind {
        let n = rng.random_range(5..40);
        let coords = distinct_cells(&mut rng, &region, level, n)
            .iter()
            .map(cell_center)
            .collect();
        files.push(CorpusFile {
            kind: FileKind::Point,
            coords,
        });
    }

    for _ in 0..per_kind {
        let n = rng.random_range(20..80);
        let mut x = rng.random_range(region.min_lon..region.max_lon);
        let mut y = rng.random_range(region.min_lat..region.max_lat);
        let mut heading: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let mut coords = Vec::with_capacity(n);
        for _ in 0..n {
            coords.push(clamp_into(&region, x, y));
            heading += rng.random_range(-0.4..0.4);
            let step = cell * rng.random_range(0.3..0.9);
            x += step * heading.cos();
            y += step * heading.sin();
        }
        files.push(CorpusFile {
            kind: FileKind::Line,
            coords,
        });
    }

    for _ in 0..per_kind {
        let n = rng.random_range(60..160);
        let cx = rng.random_range(region.min_lon..region.max_lon);
        let cy = rng.random_range(region.min_lat..region.max_lat);
        let radius = cell * rng.random_range(0.3..0.8);
        let coords = (0..n)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / n as f64;
                let r = radius * rng.random_range(0.85..1.0);
                clamp_into(&region, cx + r * a.cos(), cy + r * a.sin())
            })
            .collect();
        files.push(CorpusFile {
            kind: FileKind::Polygon,
            coords,
        });
    }

    for _ in 0..per_kind {
        let n = rng.random_range(4..30);
        let coords = distinct_cells(&mut rng, &region, level, n)
            .iter()
            .map(cell_center)
            .collect();
        files.push(CorpusFile {
            kind: FileKind::Raster,
            coords,
        });
    }
    files
}

/// One point record per coordinate at `level`. Timestamps advance one
/// minute per record so keys never collide.
pub fn point_records(points: &[GeoCoord], level: u8) -> Vec<RecordEntry> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let minutes = i as u32;
            let day = 1 + minutes / (24 * 60);
            let ts = Timestamp::date_time(
                2024,
                1 + ((day - 1) / 28) as u8 % 12,
                1 + ((day - 1) % 28) as u8,
                ((minutes / 60) % 24) as u8,
                (minutes % 60) as u8,
            )
            .expect("generated timestamps are valid");
            let center = z_encode(*p, level).expect("level is valid");
            RecordEntry {
                pk: CompositeKey::new(center, ts, TypeCode::Vector),
                level,
                center,
                covers: CoverSet::empty(level),
                bbox: BBox::of_points(std::slice::from_ref(p)),
                meta: IngestMeta::default(),
                path: format!("points/{i:06}.geojson"),
            }
        })
        .collect()
}
