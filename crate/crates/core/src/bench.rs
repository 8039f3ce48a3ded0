//! Evaluation metrics and the four benchmark suites.
//!
//! Reports are deterministic for a fixed seed apart from metrics flagged as
//! timings; `BenchReport::to_csv(false)` drops those.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::hash::Hash;
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geohash::{geohash_cover, geohash_encode, length_for_area};
use crate::geometry::{cover_geometry, BBox, Geometry, DEFAULT_COVERAGE_CAP};
use crate::geosot::{extent_degrees, z_encode, CellCode, GeoCoord};
use crate::index::IndexStore;
use crate::pipeline::{adaptive_level_by_area, bbox_area_km2, MIN_AREA_KM2};
use crate::synth::{point_records, CorpusFile, FileKind};

pub const SWEEP_LEVELS: [u8; 4] = [15, 17, 19, 21];
pub const HETERO_LEVEL: u8 = 15;

#[derive(Clone, Debug, PartialEq)]
pub struct EncodingStats {
    pub level: u8,
    pub total_codes: usize,
    pub unique_codes: usize,
    pub repeat_rate: f64,
    pub avg_length: f64,
    pub storage_bytes: usize,
    pub elapsed: Duration,
}

impl EncodingStats {
    pub fn from_codes(level: u8, codes: &[CellCode], elapsed: Duration) -> Result<Self> {
        if codes.is_empty() {
            return Err(Error::domain("no codes to summarise"));
        }
        let unique_codes = codes.iter().collect::<HashSet<_>>().len();
        // "G" plus one digit per level
        let storage_bytes = codes.iter().map(|c| 1 + c.level() as usize).sum();
        Ok(EncodingStats {
            level,
            total_codes: codes.len(),
            unique_codes,
            repeat_rate: 1.0 - unique_codes as f64 / codes.len() as f64,
            avg_length: storage_bytes as f64 / codes.len() as f64,
            storage_bytes,
            elapsed,
        })
    }

    fn metrics(&self) -> Vec<Metric> {
        vec![
            Metric::int("level", self.level as i64),
            Metric::int("total_codes", self.total_codes as i64),
            Metric::int("unique_codes", self.unique_codes as i64),
            Metric::float("repeat_rate", self.repeat_rate),
            Metric::float("avg_length", self.avg_length),
            Metric::int("storage_bytes", self.storage_bytes as i64),
            Metric::timing("encode_seconds", self.elapsed),
        ]
    }
}

fn distinct_share<T: Eq + Hash>(items: &[T]) -> Result<f64> {
    if items.is_empty() {
        return Err(Error::domain("repeat rate of an empty list"));
    }
    Ok(items.iter().collect::<HashSet<_>>().len() as f64 / items.len() as f64)
}

/// `1 - distinct / total`.
pub fn repeat_rate<S: AsRef<str>>(codes: &[S]) -> Result<f64> {
    let refs: Vec<&str> = codes.iter().map(AsRef::as_ref).collect();
    Ok(1.0 - distinct_share(&refs)?)
}

/// Share of strings whose first `chars` characters equal the most common
/// such prefix. Ties go to the smallest prefix.
pub fn modal_prefix_share<S: AsRef<str>>(codes: &[S], chars: usize) -> Result<f64> {
    if codes.is_empty() {
        return Err(Error::domain("prefix consistency of an empty set"));
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for c in codes {
        let s = c.as_ref();
        *counts.entry(&s[..chars.min(s.len())]).or_default() += 1;
    }
    let best = counts.values().copied().max().unwrap_or(0);
    Ok(best as f64 / codes.len() as f64)
}

/// Share of cells whose first `depth` digits match the modal prefix;
/// `depth` defaults to `level - 6`.
pub fn prefix_consistency(codes: &[CellCode], depth: Option<u8>) -> Result<f64> {
    let Some(first) = codes.first() else {
        return Err(Error::domain("prefix consistency of an empty set"));
    };
    let level = first.level();
    if codes.iter().any(|c| c.level() != level) {
        return Err(Error::domain("prefix consistency needs codes of one level"));
    }
    let depth = depth.unwrap_or(level.saturating_sub(6).max(1));
    if depth == 0 || depth > level {
        return Err(Error::domain(format!("depth {depth} outside 1..={level}")));
    }
    let prefixes: Vec<CellCode> = codes.iter().map(|c| c.truncate(depth)).collect();
    let mut counts: HashMap<CellCode, usize> = HashMap::new();
    for p in &prefixes {
        *counts.entry(*p).or_default() += 1;
    }
    Ok(counts.values().copied().max().unwrap_or(0) as f64 / codes.len() as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Text(String),
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Float(v) => write!(f, "{v:.6}"),
            Value::Text(v) => f.write_str(v),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Metric {
    pub name: String,
    pub value: Value,
    /// Wall-clock measurement; excluded from determinism comparisons.
    pub timing: bool,
}

impl Metric {
    pub fn int(name: &str, v: i64) -> Self {
        Metric {
            name: name.into(),
            value: Value::Int(v),
            timing: false,
        }
    }

    pub fn float(name: &str, v: f64) -> Self {
        Metric {
            name: name.into(),
            value: Value::Float(v),
            timing: false,
        }
    }

    pub fn text(name: &str, v: impl Into<String>) -> Self {
        Metric {
            name: name.into(),
            value: Value::Text(v.into()),
            timing: false,
        }
    }

    pub fn timing(name: &str, d: Duration) -> Self {
        Metric {
            name: name.into(),
            value: Value::Float(d.as_secs_f64()),
            timing: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub label: String,
    pub metrics: Vec<Metric>,
}

impl ReportRow {
    pub fn new(label: impl Into<String>, metrics: Vec<Metric>) -> Self {
        ReportRow {
            label: label.into(),
            metrics,
        }
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.metrics
            .iter()
            .find(|m| m.name == name)
            .map(|m| &m.value)
    }

    pub fn float(&self, name: &str) -> Option<f64> {
        match self.get(name)? {
            Value::Float(v) => Some(*v),
            Value::Int(v) => Some(*v as f64),
            Value::Text(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub suite: String,
    pub seed: Option<u64>,
    pub params: Vec<(String, String)>,
    pub rows: Vec<ReportRow>,
    pub environment: String,
}

fn environment_note() -> String {
    format!(
        "{}-{}, {} build, {} worker threads available",
        std::env::consts::OS,
        std::env::consts::ARCH,
        if cfg!(debug_assertions) {
            "debug"
        } else {
            "optimized"
        },
        rayon::current_num_threads()
    )
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl BenchReport {
    pub fn new(suite: &str) -> Self {
        BenchReport {
            suite: suite.into(),
            seed: None,
            params: Vec::new(),
            rows: Vec::new(),
            environment: environment_note(),
        }
    }

    pub fn param(mut self, name: &str, value: impl ToString) -> Self {
        self.params.push((name.into(), value.to_string()));
        self
    }

    pub fn row(&self, label: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    /// Long-format CSV `suite,seed,row,metric,value`. Parameters appear
    /// under row `params`; timing metrics only when `timing` is set.
    pub fn to_csv(&self, timing: bool) -> String {
        let seed = self.seed.map(|s| s.to_string()).unwrap_or_default();
        let mut out = String::from("suite,seed,row,metric,value\n");
        let mut line = |row: &str, metric: &str, value: &str| {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                csv_field(&self.suite),
                seed,
                csv_field(row),
                csv_field(metric),
                csv_field(value)
            );
        };
        for (k, v) in &self.params {
            line("params", k, v);
        }
        for r in &self.rows {
            for m in r.metrics.iter().filter(|m| timing || !m.timing) {
                line(&r.label, &m.name, &m.value.to_string());
            }
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut md = format!("# Benchmark: {}\n\n", self.suite);
        match self.seed {
            Some(s) => {
                let _ = writeln!(md, "- seed: {s}");
            }
            None => md.push_str("- seed: none (input file)\n"),
        }
        for (k, v) in &self.params {
            let _ = writeln!(md, "- {k}: {v}");
        }
        let _ = writeln!(md, "- environment: {}", self.environment);
        md.push_str("- timing columns (`*_seconds`) are wall-clock and vary between runs\n\n");

        let mut columns: Vec<&str> = Vec::new();
        for r in &self.rows {
            for m in &r.metrics {
                if !columns.contains(&m.name.as_str()) {
                    columns.push(&m.name);
                }
            }
        }
        let _ = writeln!(md, "| row | {} |", columns.join(" | "));
        let _ = writeln!(md, "|---|{}", "---|".repeat(columns.len()));
        for r in &self.rows {
            let cells: Vec<String> = columns
                .iter()
                .map(|c| r.get(c).map(|v| v.to_string()).unwrap_or_default())
                .collect();
            let _ = writeln!(md, "| {} | {} |", r.label, cells.join(" | "));
        }
        md
    }

    /// Writes `<suite>.csv` and `<suite>.md` into `dir`.
    pub fn write(&self, dir: &Path, timing: bool) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{}.csv", self.suite)), self.to_csv(timing))?;
        std::fs::write(dir.join(format!("{}.md", self.suite)), self.to_markdown())?;
        Ok(())
    }
}

fn timed_encode(points: &[GeoCoord], level: u8) -> Result<(Vec<CellCode>, Duration)> {
    let start = Instant::now();
    let codes = points
        .iter()
        .map(|p| z_encode(*p, level))
        .collect::<Result<Vec<_>>>()?;
    Ok((codes, start.elapsed()))
}

pub fn run_level_sweep(points: &[GeoCoord], levels: &[u8]) -> Result<BenchReport> {
    if points.is_empty() {
        return Err(Error::domain("level sweep needs at least one point"));
    }
    let mut report = BenchReport::new("levels")
        .param("points", points.len())
        .param(
            "levels",
            levels
                .iter()
                .map(u8::to_string)
                .collect::<Vec<_>>()
                .join(" "),
        );
    for &level in levels {
        let (codes, elapsed) = timed_encode(points, level)?;
        let stats = EncodingStats::from_codes(level, &codes, elapsed)?;
        report
            .rows
            .push(ReportRow::new(format!("L{level}"), stats.metrics()));
    }
    Ok(report)
}

pub fn run_adaptive(points: &[GeoCoord]) -> Result<BenchReport> {
    if points.len() < 2 {
        return Err(Error::domain("adaptive suite needs at least two points"));
    }
    let b = BBox::of_points(points);
    let area = bbox_area_km2(&b);
    let level = adaptive_level_by_area(area.max(MIN_AREA_KM2))?;
    let (codes, elapsed) = timed_encode(points, level)?;
    let stats = EncodingStats::from_codes(level, &codes, elapsed)?;
    let mut metrics = vec![
        Metric::text(
            "bbox",
            format!("{} {} {} {}", b.min_lon, b.min_lat, b.max_lon, b.max_lat),
        ),
        Metric::float("area_km2", area),
    ];
    metrics.extend(stats.metrics());
    let mut report = BenchReport::new("adaptive")
        .param("points", points.len())
        .param("min_area_km2", MIN_AREA_KM2);
    report.rows.push(ReportRow::new("adaptive", metrics));
    Ok(report)
}

/// Codes of every coordinate a file contributes: each point, each line
/// or ring vertex, each raster tile centre.
fn file_redundancy(file: &CorpusFile, level: u8) -> Result<Option<f64>> {
    if file.coords.is_empty() {
        return Ok(None);
    }
    let codes = file
        .coords
        .iter()
        .map(|p| z_encode(*p, level))
        .collect::<Result<Vec<_>>>()?;
    Ok(Some(1.0 - distinct_share(&codes)?))
}

pub fn run_heterogeneous(corpus: &[CorpusFile], level: u8, parallel: bool) -> Result<BenchReport> {
    let rates: Vec<Option<f64>> = if parallel {
        corpus
            .par_iter()
            .map(|f| file_redundancy(f, level))
            .collect::<Result<_>>()?
    } else {
        corpus
            .iter()
            .map(|f| file_redundancy(f, level))
            .collect::<Result<_>>()?
    };
    let mut report = BenchReport::new("hetero")
        .param("files", corpus.len())
        .param("level", level);
    for kind in [
        FileKind::Point,
        FileKind::Line,
        FileKind::Polygon,
        FileKind::Raster,
    ] {
        let mut n = 0usize;
        let mut codes = 0usize;
        let mut sum = 0.0;
        for (f, r) in corpus.iter().zip(&rates) {
            if let (true, Some(r)) = (f.kind == kind, r) {
                n += 1;
                codes += f.coords.len();
                sum += r;
            }
        }
        let mean = if n == 0 { 0.0 } else { sum / n as f64 };
        report.rows.push(ReportRow::new(
            kind.as_str(),
            vec![
                Metric::int("files", n as i64),
                Metric::int("codes", codes as i64),
                Metric::float("avg_redundancy", mean),
            ],
        ));
    }
    Ok(report)
}

/// Settings of the comparison suite.
#[derive(Clone, Debug, PartialEq)]
pub struct CompareOptions {
    /// Level of the point codes and of the prefix-consistency check.
    pub level: u8,
    /// Prefix depth, in digits, for prefix consistency.
    pub depth: Option<u8>,
    /// Level at which the test box is covered.
    pub cover_level: u8,
    /// Neighbourhood samples and their size.
    pub groups: usize,
    pub group_size: usize,
    /// Depth of the prefix query, in digits.
    pub query_depth: u8,
    pub seed: u64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            level: 21,
            depth: None,
            cover_level: 17,
            groups: 50,
            group_size: 64,
            query_depth: 7,
            seed: 0,
        }
    }
}

fn cell_area_deg2(level: u8) -> f64 {
    extent_degrees(level).powi(2)
}

/// Groups of mutually close points: each anchor with its nearest
/// neighbours, anchors taken at evenly spaced positions of the input.
fn neighbourhoods(
    points: &[GeoCoord],
    groups: usize,
    size: usize,
    seed: u64,
) -> Vec<Vec<GeoCoord>> {
    use rand::Rng;
    let mut rng = crate::synth::rng(seed);
    let size = size.clamp(1, points.len());
    (0..groups)
        .map(|_| {
            let a = points[rng.random_range(0..points.len())];
            let mut by_dist: Vec<(f64, usize)> = points
                .iter()
                .enumerate()
                .map(|(i, p)| ((p.lon() - a.lon()).powi(2) + (p.lat() - a.lat()).powi(2), i))
                .collect();
            by_dist.select_nth_unstable_by(size - 1, |x, y| {
                x.partial_cmp(y).expect("finite distances")
            });
            let mut chosen: Vec<usize> = by_dist[..size].iter().map(|&(_, i)| i).collect();
            chosen.sort_unstable();
            chosen.into_iter().map(|i| points[i]).collect()
        })
        .collect()
}

pub fn run_comparison(
    points: &[GeoCoord],
    test_box: &BBox,
    opts: &CompareOptions,
) -> Result<BenchReport> {
    if points.len() < 100 {
        return Err(Error::domain("comparison suite needs at least 100 points"));
    }
    let level = opts.level;
    let depth = opts.depth.unwrap_or(level.saturating_sub(6).max(1));
    let gh_len = length_for_area(cell_area_deg2(level));
    let gh_depth = length_for_area(cell_area_deg2(depth));
    let gh_cover_len = length_for_area(cell_area_deg2(opts.cover_level));
    let gh_query_len = length_for_area(cell_area_deg2(opts.query_depth));

    let mut report = BenchReport::new("compare")
        .param("points", points.len())
        .param("level", level)
        .param("prefix_depth", depth)
        .param("geohash_length", gh_len)
        .param("geohash_prefix_length", gh_depth)
        .param("cover_level", opts.cover_level)
        .param("geohash_cover_length", gh_cover_len)
        .param("groups", opts.groups)
        .param("group_size", opts.group_size)
        .param("query_depth", opts.query_depth)
        .param("geohash_query_length", gh_query_len)
        .param(
            "box",
            format!(
                "{} {} {} {}",
                test_box.min_lon, test_box.min_lat, test_box.max_lon, test_box.max_lat
            ),
        )
        .param(
            "pairing",
            "smallest geohash length with cell area <= GeoSOT cell area",
        );

    // prefix consistency over neighbourhoods
    let mut gs_sum = 0.0;
    let mut gh_sum = 0.0;
    let samples = neighbourhoods(points, opts.groups, opts.group_size, opts.seed);
    for g in &samples {
        let cells = g
            .iter()
            .map(|p| z_encode(*p, level))
            .collect::<Result<Vec<_>>>()?;
        gs_sum += prefix_consistency(&cells, Some(depth))?;
        let hashes = g
            .iter()
            .map(|p| geohash_encode(*p, gh_len))
            .collect::<Result<Vec<_>>>()?;
        gh_sum += modal_prefix_share(&hashes, gh_depth)?;
    }
    let n = samples.len().max(1) as f64;
    report.rows.push(ReportRow::new(
        "prefix_consistency",
        vec![
            Metric::float("gseed", gs_sum / n),
            Metric::float("geohash", gh_sum / n),
        ],
    ));

    // box coverage
    let gs_cover = cover_geometry(
        &Geometry::Box(*test_box),
        opts.cover_level,
        DEFAULT_COVERAGE_CAP,
    )?;
    let gh_cover = geohash_cover(test_box, gh_cover_len, 10 * DEFAULT_COVERAGE_CAP)?;
    report.rows.push(ReportRow::new(
        "cover_cells",
        vec![
            Metric::int("gseed", gs_cover.len() as i64),
            Metric::int("geohash", gh_cover.len() as i64),
        ],
    ));

    // encoding time for the full set
    let (cells, gs_time) = timed_encode(points, level)?;
    let start = Instant::now();
    let hashes = points
        .iter()
        .map(|p| geohash_encode(*p, gh_len))
        .collect::<Result<Vec<_>>>()?;
    let gh_time = start.elapsed();
    report.rows.push(ReportRow::new(
        "encode",
        vec![
            Metric::int("codes", cells.len() as i64),
            Metric::timing("gseed_seconds", gs_time),
            Metric::timing("geohash_seconds", gh_time),
        ],
    ));

    // prefix query: the most populated prefix, index vs linear scan
    let mut store = IndexStore::new();
    for r in point_records(points, level) {
        store.insert(r)?;
    }
    let mut counts: BTreeMap<CellCode, usize> = BTreeMap::new();
    for c in &cells {
        *counts.entry(c.truncate(opts.query_depth)).or_default() += 1;
    }
    let (prefix_cell, _) = counts
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .expect("non-empty point set");
    let prefix = prefix_cell.to_string();

    let start = Instant::now();
    let indexed = store.prefix_query(&prefix)?;
    let index_time = start.elapsed();
    let start = Instant::now();
    let scanned: Vec<_> = store
        .iter()
        .filter(|r| r.pk_text().starts_with(&prefix))
        .collect();
    let scan_time = start.elapsed();
    let index_keys: Vec<String> = indexed.iter().map(|r| r.pk_text()).collect();
    let scan_keys: Vec<String> = scanned.iter().map(|r| r.pk_text()).collect();

    // geohash: same anchor cell, comparable prefix length, sorted codes
    let anchor = points
        .iter()
        .zip(&cells)
        .find(|(_, c)| prefix_cell.is_prefix_of(c))
        .map(|(p, _)| *p)
        .expect("modal prefix comes from some point");
    let gh_prefix = geohash_encode(anchor, gh_query_len)?;
    let mut sorted = hashes.clone();
    sorted.sort_unstable();
    let start = Instant::now();
    let lo = sorted.partition_point(|h| h.as_str() < gh_prefix.as_str());
    let hi = lo + sorted[lo..].partition_point(|h| h.starts_with(&gh_prefix));
    let gh_index_time = start.elapsed();
    let start = Instant::now();
    let gh_scan = hashes.iter().filter(|h| h.starts_with(&gh_prefix)).count();
    let gh_scan_time = start.elapsed();

    report.rows.push(ReportRow::new(
        "prefix_query",
        vec![
            Metric::text("gseed_prefix", prefix.clone()),
            Metric::int("gseed_index_matches", index_keys.len() as i64),
            Metric::int("gseed_scan_matches", scan_keys.len() as i64),
            Metric::text("gseed_oracle_equal", (index_keys == scan_keys).to_string()),
            Metric::timing("gseed_index_seconds", index_time),
            Metric::timing("gseed_scan_seconds", scan_time),
            Metric::text("geohash_prefix", gh_prefix),
            Metric::int("geohash_index_matches", (hi - lo) as i64),
            Metric::int("geohash_scan_matches", gh_scan as i64),
            Metric::timing("geohash_index_seconds", gh_index_time),
            Metric::timing("geohash_scan_seconds", gh_scan_time),
        ],
    ));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(lon: f64, lat: f64) -> GeoCoord {
        GeoCoord::new(lon, lat).unwrap()
    }

    #[test]
    fn repeat_rate_examples() {
        assert!((repeat_rate(&["a", "a", "b"]).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(repeat_rate(&["a", "b", "c"]).unwrap(), 0.0);
        assert!(repeat_rate::<&str>(&[]).is_err());
        // 20,339 codes of which 2,457 distinct
        let codes: Vec<String> = (0..20_339).map(|i| (i % 2457).to_string()).collect();
        assert!((repeat_rate(&codes).unwrap() - 0.8792).abs() < 5e-5);
    }

    #[test]
    fn prefix_consistency_examples() {
        let a = z_encode(c(110.5, 31.5), 21).unwrap();
        assert_eq!(prefix_consistency(&[a; 4], None).unwrap(), 1.0);
        let b = z_encode(c(-110.5, 31.5), 21).unwrap();
        assert_eq!(prefix_consistency(&[a, a, b, b], Some(3)).unwrap(), 0.5);
        assert!(prefix_consistency(&[], None).is_err());
        assert!(prefix_consistency(&[a], Some(22)).is_err());
        assert_eq!(
            modal_prefix_share(&["abc", "abd", "xyz"], 2).unwrap(),
            2.0 / 3.0
        );
    }

    #[test]
    fn clustered_in_one_cell_is_consistent() {
        let cell = crate::geosot::decode(&z_encode(c(110.5, 31.5), 15).unwrap()).unwrap();
        let pts: Vec<CellCode> = (0..50)
            .map(|i| {
                let t = (i as f64 + 0.5) / 50.0;
                let lon = cell.lon_min + t * cell.width();
                let lat = cell.lat_min + (1.0 - t) * cell.height();
                z_encode(c(lon, lat), 21).unwrap()
            })
            .collect();
        assert_eq!(prefix_consistency(&pts, Some(15)).unwrap(), 1.0);
    }

    #[test]
    fn single_point_sweep() {
        let r = run_level_sweep(&[c(110.5, 31.5)], &SWEEP_LEVELS).unwrap();
        for row in &r.rows {
            assert_eq!(row.float("unique_codes"), Some(1.0));
            assert_eq!(row.float("repeat_rate"), Some(0.0));
        }
    }

    #[test]
    fn adaptive_guards() {
        let same = [c(110.5, 31.5), c(110.5, 31.5)];
        assert_eq!(
            run_adaptive(&same).unwrap().rows[0].float("level"),
            Some(24.0)
        );
        let wide = [c(70.0, 15.0), c(135.0, 55.0)];
        assert_eq!(
            run_adaptive(&wide).unwrap().rows[0].float("level"),
            Some(7.0)
        );
        assert!(run_adaptive(&same[..1]).is_err());
    }

    #[test]
    fn csv_drops_timing_on_request() {
        let r = run_level_sweep(&[c(1.0, 1.0), c(2.0, 2.0)], &[15]).unwrap();
        assert!(r.to_csv(true).contains("encode_seconds"));
        assert!(!r.to_csv(false).contains("encode_seconds"));
        assert!(r.to_csv(false).starts_with("suite,seed,row,metric,value\n"));
        assert!(r.to_markdown().contains("| L15 |"));
    }

    #[test]
    fn parallel_hetero_matches_serial() {
        let corpus = crate::synth::heterogeneous_corpus(5, 6, HETERO_LEVEL);
        let a = run_heterogeneous(&corpus, HETERO_LEVEL, false).unwrap();
        let b = run_heterogeneous(&corpus, HETERO_LEVEL, true).unwrap();
        assert_eq!(a.to_csv(false), b.to_csv(false));
    }
}
