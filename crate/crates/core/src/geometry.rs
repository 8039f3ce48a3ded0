//! Geometries in degree space and their grid coverage.
//!
//! All math is planar on raw degrees. Coverage enumerates candidate cells
//! per quadrant from the bounding box and keeps the cells that the geometry
//! actually meets:
//!
//! * points: the single containing cell;
//! * polylines: cells holding at least one point of a segment (half-open);
//! * polygons and boxes with area: cells whose interior overlaps the shape.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geosot::{
    axis_index, decode, extent_degrees, magnitude_units, z_encode, CellBounds, CellCode, GeoCoord,
    MAX_LEVEL,
};

pub const DEFAULT_COVERAGE_CAP: u64 = 1_000_000;

/// Closed axis-aligned rectangle in degrees.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BBox {
    pub min_lon: f64,
    pub min_lat: f64,
    pub max_lon: f64,
    pub max_lat: f64,
}

impl BBox {
    pub fn new(min_lon: f64, min_lat: f64, max_lon: f64, max_lat: f64) -> Result<Self> {
        GeoCoord::new(min_lon, min_lat)?;
        GeoCoord::new(max_lon, max_lat)?;
        if min_lon > max_lon || min_lat > max_lat {
            return Err(Error::Geometry(format!(
                "box min ({min_lon}, {min_lat}) exceeds max ({max_lon}, {max_lat})"
            )));
        }
        Ok(BBox {
            min_lon: min_lon + 0.0,
            min_lat: min_lat + 0.0,
            max_lon: max_lon + 0.0,
            max_lat: max_lat + 0.0,
        })
    }

    pub fn of_points(points: &[GeoCoord]) -> BBox {
        let mut b = BBox {
            min_lon: f64::INFINITY,
            min_lat: f64::INFINITY,
            max_lon: f64::NEG_INFINITY,
            max_lat: f64::NEG_INFINITY,
        };
        for p in points {
            b.min_lon = b.min_lon.min(p.lon());
            b.max_lon = b.max_lon.max(p.lon());
            b.min_lat = b.min_lat.min(p.lat());
            b.max_lat = b.max_lat.max(p.lat());
        }
        b
    }

    pub fn width(&self) -> f64 {
        self.max_lon - self.min_lon
    }

    pub fn height(&self) -> f64 {
        self.max_lat - self.min_lat
    }

    pub fn center(&self) -> (f64, f64) {
        (
            0.5 * (self.min_lon + self.max_lon),
            0.5 * (self.min_lat + self.max_lat),
        )
    }

    /// Closed intersection test: touching edges count.
    pub fn intersects(&self, other: &BBox) -> bool {
        self.min_lon <= other.max_lon
            && self.max_lon >= other.min_lon
            && self.min_lat <= other.max_lat
            && self.max_lat >= other.min_lat
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.min_lon, self.min_lat, self.max_lon, self.max_lat]
    }

    fn corners(&self) -> [GeoCoord; 4] {
        let c = |lon, lat| GeoCoord::new(lon, lat).expect("box corners are valid");
        [
            c(self.min_lon, self.min_lat),
            c(self.max_lon, self.min_lat),
            c(self.max_lon, self.max_lat),
            c(self.min_lon, self.max_lat),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeometryKind {
    Point,
    Polyline,
    Polygon,
    Box,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Geometry {
    Point(GeoCoord),
    Polyline(Vec<GeoCoord>),
    /// Simple ring stored open: the first vertex is not repeated at the end.
    Polygon(Vec<GeoCoord>),
    Box(BBox),
}

impl Geometry {
    pub fn point(lon: f64, lat: f64) -> Result<Self> {
        Ok(Geometry::Point(GeoCoord::new(lon, lat)?))
    }

    pub fn polyline(vertices: Vec<GeoCoord>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::Geometry(
                "a polyline needs at least 2 vertices".into(),
            ));
        }
        Ok(Geometry::Polyline(vertices))
    }

    /// Accepts an open or explicitly closed ring and rejects self-intersection.
    pub fn polygon(mut ring: Vec<GeoCoord>) -> Result<Self> {
        if ring.len() > 1 && ring.first() == ring.last() {
            ring.pop();
        }
        if ring.len() < 3 {
            return Err(Error::Geometry(
                "a polygon needs at least 3 distinct vertices".into(),
            ));
        }
        check_simple_ring(&ring)?;
        Ok(Geometry::Polygon(ring))
    }

    pub fn bbox_geometry(min_lon: f64, min_lat: f64, max_lon: f64, max_lat: f64) -> Result<Self> {
        Ok(Geometry::Box(BBox::new(
            min_lon, min_lat, max_lon, max_lat,
        )?))
    }

    pub fn from_lonlat(kind: GeometryKind, coords: &[(f64, f64)]) -> Result<Self> {
        let pts = coords
            .iter()
            .map(|&(lon, lat)| GeoCoord::new(lon, lat))
            .collect::<Result<Vec<_>>>()?;
        match kind {
            GeometryKind::Point => match pts.as_slice() {
                [p] => Ok(Geometry::Point(*p)),
                _ => Err(Error::Geometry("a point has exactly one coordinate".into())),
            },
            GeometryKind::Polyline => Geometry::polyline(pts),
            GeometryKind::Polygon => Geometry::polygon(pts),
            GeometryKind::Box => match pts.as_slice() {
                [a, b] => Geometry::bbox_geometry(a.lon(), a.lat(), b.lon(), b.lat()),
                _ => Err(Error::Geometry("a box is given by two corners".into())),
            },
        }
    }

    pub fn kind(&self) -> GeometryKind {
        match self {
            Geometry::Point(_) => GeometryKind::Point,
            Geometry::Polyline(_) => GeometryKind::Polyline,
            Geometry::Polygon(_) => GeometryKind::Polygon,
            Geometry::Box(_) => GeometryKind::Box,
        }
    }

    pub fn vertices(&self) -> Vec<GeoCoord> {
        match self {
            Geometry::Point(p) => vec![*p],
            Geometry::Polyline(v) | Geometry::Polygon(v) => v.clone(),
            Geometry::Box(b) => b.corners().to_vec(),
        }
    }

    pub fn bbox(&self) -> BBox {
        match self {
            Geometry::Box(b) => *b,
            Geometry::Point(p) => BBox::of_points(std::slice::from_ref(p)),
            Geometry::Polyline(v) | Geometry::Polygon(v) => BBox::of_points(v),
        }
    }

    /// Parses a GeoJSON geometry object. Besides `Point`, `LineString` and
    /// `Polygon` (outer ring only), `{"type": "Box", "bbox": [w, s, e, n]}`
    /// describes a raster extent.
    pub fn from_geojson(value: &Value) -> Result<Self> {
        let kind = value
            .get("type")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Geometry("geometry has no \"type\"".into()))?;
        let coords = value.get("coordinates");
        match kind {
            "Point" => {
                let (lon, lat) = position(coords.ok_or_else(missing_coords)?)?;
                Geometry::point(lon, lat)
            }
            "LineString" => Geometry::polyline(positions(coords.ok_or_else(missing_coords)?)?),
            "Polygon" => {
                let ring = coords
                    .and_then(Value::as_array)
                    .and_then(|rings| rings.first())
                    .ok_or_else(|| Error::Geometry("polygon has no rings".into()))?;
                Geometry::polygon(positions(ring)?)
            }
            "Box" => {
                let b = value
                    .get("bbox")
                    .and_then(Value::as_array)
                    .filter(|a| a.len() == 4)
                    .ok_or_else(|| Error::Geometry("box needs \"bbox\": [w, s, e, n]".into()))?;
                let n = b
                    .iter()
                    .map(Value::as_f64)
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| Error::Geometry("bbox entries must be numbers".into()))?;
                Geometry::bbox_geometry(n[0], n[1], n[2], n[3])
            }
            other => Err(Error::Geometry(format!(
                "unsupported geometry type {other:?}"
            ))),
        }
    }

    pub fn to_geojson(&self) -> Value {
        let pos = |p: &GeoCoord| json!([p.lon(), p.lat()]);
        match self {
            Geometry::Point(p) => json!({"type": "Point", "coordinates": pos(p)}),
            Geometry::Polyline(v) => {
                json!({"type": "LineString", "coordinates": v.iter().map(pos).collect::<Vec<_>>()})
            }
            Geometry::Polygon(v) => {
                let mut ring: Vec<Value> = v.iter().map(pos).collect();
                ring.push(pos(&v[0]));
                json!({"type": "Polygon", "coordinates": [ring]})
            }
            Geometry::Box(b) => json!({"type": "Box", "bbox": b.to_array()}),
        }
    }
}

fn missing_coords() -> Error {
    Error::Geometry("geometry has no \"coordinates\"".into())
}

fn position(v: &Value) -> Result<(f64, f64)> {
    match v.as_array().map(Vec::as_slice) {
        Some([lon, lat, ..]) => match (lon.as_f64(), lat.as_f64()) {
            (Some(lon), Some(lat)) => Ok((lon, lat)),
            _ => Err(Error::Geometry("position entries must be numbers".into())),
        },
        _ => Err(Error::Geometry("position must be [lon, lat]".into())),
    }
}

fn positions(v: &Value) -> Result<Vec<GeoCoord>> {
    v.as_array()
        .ok_or_else(|| Error::Geometry("expected an array of positions".into()))?
        .iter()
        .map(|p| {
            let (lon, lat) = position(p)?;
            GeoCoord::new(lon, lat)
        })
        .collect()
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn xy(p: &GeoCoord) -> (f64, f64) {
    (p.lon(), p.lat())
}

fn on_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> bool {
    p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
}

/// Closed segment intersection, including touching and collinear overlap.
fn segments_intersect(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(a, c, d))
        || (d2 == 0.0 && on_segment(b, c, d))
        || (d3 == 0.0 && on_segment(c, a, b))
        || (d4 == 0.0 && on_segment(d, a, b))
}

fn check_simple_ring(ring: &[GeoCoord]) -> Result<()> {
    let n = ring.len();
    let edge = |i: usize| (xy(&ring[i]), xy(&ring[(i + 1) % n]));
    for i in 0..n {
        let (a, b) = edge(i);
        if a == b {
            return Err(Error::Geometry(format!("polygon edge {i} has zero length")));
        }
    }
    for i in 0..n {
        let (a, b) = edge(i);
        for j in (i + 1)..n {
            let (c, d) = edge(j);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // shared vertex is fine unless the edges fold back onto each other
                let (shared, other_a, other_b) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                if cross(shared, other_a, other_b) == 0.0
                    && (on_segment(other_a, shared, other_b)
                        || on_segment(other_b, shared, other_a))
                {
                    return Err(Error::Geometry(format!(
                        "polygon edges {i} and {j} overlap"
                    )));
                }
                continue;
            }
            if segments_intersect(a, b, c, d) {
                return Err(Error::Geometry(format!(
                    "polygon edges {i} and {j} intersect"
                )));
            }
        }
    }
    Ok(())
}

fn ring_signed_area(ring: &[GeoCoord]) -> f64 {
    let o = xy(&ring[0]);
    let mut twice = 0.0;
    for i in 1..ring.len() - 1 {
        twice += cross(o, xy(&ring[i]), xy(&ring[i + 1]));
    }
    0.5 * twice
}

fn vertex_mean(points: &[GeoCoord]) -> (f64, f64) {
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), p| (sx + p.lon(), sy + p.lat()));
    (sx / n, sy / n)
}

pub fn centroid(g: &Geometry) -> GeoCoord {
    let (lon, lat) = match g {
        Geometry::Point(p) => return *p,
        Geometry::Box(b) => b.center(),
        Geometry::Polyline(v) => {
            let mut total = 0.0;
            let (mut sx, mut sy) = (0.0, 0.0);
            for w in v.windows(2) {
                let (a, b) = (xy(&w[0]), xy(&w[1]));
                let len = (b.0 - a.0).hypot(b.1 - a.1);
                total += len;
                sx += len * 0.5 * (a.0 + b.0);
                sy += len * 0.5 * (a.1 + b.1);
            }
            if total > 0.0 {
                (sx / total, sy / total)
            } else {
                vertex_mean(v)
            }
        }
        Geometry::Polygon(v) => {
            // shoelace on coordinates shifted to the first vertex
            let o = xy(&v[0]);
            let (mut a2, mut cx, mut cy) = (0.0, 0.0, 0.0);
            for i in 0..v.len() {
                let p = xy(&v[i]);
                let q = xy(&v[(i + 1) % v.len()]);
                let (px, py) = (p.0 - o.0, p.1 - o.1);
                let (qx, qy) = (q.0 - o.0, q.1 - o.1);
                let c = px * qy - qx * py;
                a2 += c;
                cx += (px + qx) * c;
                cy += (py + qy) * c;
            }
            if a2 != 0.0 {
                (o.0 + cx / (3.0 * a2), o.1 + cy / (3.0 * a2))
            } else {
                vertex_mean(v)
            }
        }
    };
    GeoCoord::clamped(lon, lat).expect("centroid of valid vertices is finite")
}

fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return (p.0 - a.0).hypot(p.1 - a.1);
    }
    let t = (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0);
    (p.0 - (a.0 + t * dx)).hypot(p.1 - (a.1 + t * dy))
}

/// Ramer-Douglas-Peucker on a vertex chain. Endpoints are always kept; a
/// vertex survives when its distance to the current chord exceeds `epsilon`.
pub fn douglas_peucker(line: &[GeoCoord], epsilon: f64) -> Result<Vec<GeoCoord>> {
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::domain(format!("epsilon {epsilon} must be >= 0")));
    }
    if line.len() <= 2 {
        return Ok(line.to_vec());
    }
    let mut keep = vec![false; line.len()];
    keep[0] = true;
    keep[line.len() - 1] = true;
    let mut stack = vec![(0usize, line.len() - 1)];
    while let Some((first, last)) = stack.pop() {
        if last <= first + 1 {
            continue;
        }
        let (a, b) = (xy(&line[first]), xy(&line[last]));
        let (idx, dist) = (first + 1..last)
            .map(|i| (i, point_segment_distance(xy(&line[i]), a, b)))
            .fold(
                (first, -1.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        if dist > epsilon {
            keep[idx] = true;
            stack.push((first, idx));
            stack.push((idx, last));
        }
    }
    Ok(line
        .iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(*p))
        .collect())
}

/// Douglas-Peucker applied per geometry kind. Rings are simplified as a
/// closed chain and left untouched if fewer than three vertices survive.
pub fn simplify(g: &Geometry, epsilon: f64) -> Result<Geometry> {
    match g {
        Geometry::Polyline(v) => Ok(Geometry::Polyline(douglas_peucker(v, epsilon)?)),
        Geometry::Polygon(v) => {
            let mut closed = v.clone();
            closed.push(v[0]);
            let mut out = douglas_peucker(&closed, epsilon)?;
            out.pop();
            if out.len() >= 3 {
                Ok(Geometry::Polygon(out))
            } else {
                Ok(g.clone())
            }
        }
        Geometry::Point(_) | Geometry::Box(_) => {
            if epsilon.is_nan() || epsilon < 0.0 {
                return Err(Error::domain(format!("epsilon {epsilon} must be >= 0")));
            }
            Ok(g.clone())
        }
    }
}

/// True when the longer side of the bounding box is strictly larger than
/// one cell at `level`.
pub fn size_exceeds_cell(g: &Geometry, level: u8) -> bool {
    let b = g.bbox();
    b.width().max(b.height()) > extent_degrees(level)
}

/// Duplicate-free cells at one level, sorted by code text.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoverSet {
    level: u8,
    cells: Vec<CellCode>,
}

impl CoverSet {
    pub fn empty(level: u8) -> Self {
        CoverSet {
            level,
            cells: Vec::new(),
        }
    }

    /// Sorts and dedups. All cells must sit at `level`.
    pub fn from_cells(level: u8, mut cells: Vec<CellCode>) -> Result<Self> {
        if let Some(c) = cells.iter().find(|c| c.level() != level) {
            return Err(Error::Record(format!(
                "cover cell {c} is not at level {level}"
            )));
        }
        cells.sort_unstable();
        cells.dedup();
        Ok(CoverSet { level, cells })
    }

    pub fn level(&self) -> u8 {
        self.level
    }

    pub fn cells(&self) -> &[CellCode] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, cell: &CellCode) -> bool {
        self.cells.binary_search(cell).is_ok()
    }
}

/// Inclusive range of per-axis cell indices within one half of an axis.
#[derive(Clone, Copy, Debug)]
struct AxisRange {
    negative: bool,
    lo: u32,
    hi: u32,
}

impl AxisRange {
    fn len(&self) -> u64 {
        u64::from(self.hi - self.lo) + 1
    }
}

/// Index ranges covering `[min, max]` with one extra cell below each lower
/// edge, so every cell whose closed rectangle touches the interval is in.
fn axis_ranges(min: f64, max: f64, level: u8) -> Vec<AxisRange> {
    let mut out = Vec::with_capacity(2);
    let mut push = |negative: bool, lo_mag: f64, hi_mag: f64| {
        let lo_u = magnitude_units(lo_mag);
        let hi_u = magnitude_units(hi_mag);
        out.push(AxisRange {
            negative,
            lo: axis_index(lo_u.saturating_sub(1), level),
            hi: axis_index(hi_u, level),
        });
    };
    if max >= 0.0 {
        push(false, min.max(0.0), max);
    }
    if min < 0.0 {
        push(true, (-max).max(0.0), -min);
    }
    out
}

struct Candidates {
    level: u8,
    lat: Vec<AxisRange>,
    lon: Vec<AxisRange>,
}

impl Candidates {
    fn new(b: &BBox, level: u8) -> Self {
        Candidates {
            level,
            lat: axis_ranges(b.min_lat, b.max_lat, level),
            lon: axis_ranges(b.min_lon, b.max_lon, level),
        }
    }

    fn estimate(&self) -> u64 {
        let lat: u64 = self.lat.iter().map(AxisRange::len).sum();
        let lon: u64 = self.lon.iter().map(AxisRange::len).sum();
        lat.saturating_mul(lon)
    }

    /// Every real (non-padding) candidate cell with its rectangle.
    fn for_each(&self, mut f: impl FnMut(CellCode, &CellBounds)) {
        for la in &self.lat {
            for lo in &self.lon {
                for i in la.lo..=la.hi {
                    for j in lo.lo..=lo.hi {
                        let cell =
                            CellCode::from_axis_indices(self.level, la.negative, lo.negative, i, j);
                        if let Ok(bounds) = decode(&cell) {
                            f(cell, &bounds);
                        }
                    }
                }
            }
        }
    }
}

fn check_level(level: u8) -> Result<()> {
    if !(1..=MAX_LEVEL).contains(&level) {
        return Err(Error::domain(format!(
            "coverage level {level} outside 1..=32"
        )));
    }
    Ok(())
}

fn candidates_within_cap(b: &BBox, level: u8, cap: u64) -> Result<Candidates> {
    check_level(level)?;
    if cap == 0 {
        return Err(Error::domain("coverage cap must be positive"));
    }
    let cands = Candidates::new(b, level);
    let estimate = cands.estimate();
    if estimate > cap {
        return Err(Error::CoverageCapExceeded { cap, estimate });
    }
    Ok(cands)
}

/// Clips segment `a-b` to the closed rectangle (Liang-Barsky). Returns the
/// parameter interval of the surviving piece.
fn clip_segment(a: (f64, f64), b: (f64, f64), r: &CellBounds) -> Option<(f64, f64)> {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for (p, q) in [
        (-dx, a.0 - r.lon_min),
        (dx, r.lon_max - a.0),
        (-dy, a.1 - r.lat_min),
        (dy, r.lat_max - a.1),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let t = q / p;
            if p < 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
        }
    }
    (t0 <= t1).then_some((t0, t1))
}

fn lerp(a: (f64, f64), b: (f64, f64), t: f64) -> (f64, f64) {
    (a.0 + (b.0 - a.0) * t, a.1 + (b.1 - a.1) * t)
}

fn cell_holds(bounds: &CellBounds, p: (f64, f64)) -> bool {
    GeoCoord::clamped(p.0, p.1).is_ok_and(|c| bounds.contains(c))
}

/// Does some point of segment `a-b` belong to the half-open cell?
fn segment_meets_cell(a: (f64, f64), b: (f64, f64), bounds: &CellBounds) -> bool {
    match clip_segment(a, b, bounds) {
        None => false,
        Some((t0, t1)) => cell_holds(bounds, lerp(a, b, 0.5 * (t0 + t1))),
    }
}

/// Does segment `a-b` pass through the open interior of the rectangle?
fn segment_enters_interior(a: (f64, f64), b: (f64, f64), r: &CellBounds) -> bool {
    match clip_segment(a, b, r) {
        Some((t0, t1)) if t1 > t0 => {
            let m = lerp(a, b, 0.5 * (t0 + t1));
            m.0 > r.lon_min && m.0 < r.lon_max && m.1 > r.lat_min && m.1 < r.lat_max
        }
        _ => false,
    }
}

fn point_in_ring(p: (f64, f64), ring: &[GeoCoord]) -> bool {
    let mut inside = false;
    let n = ring.len();
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = xy(&ring[i]);
        let (xj, yj) = xy(&ring[j]);
        if (yi > p.1) != (yj > p.1) && p.0 < (xj - xi) * (p.1 - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

fn ring_edges(ring: &[GeoCoord]) -> impl Iterator<Item = ((f64, f64), (f64, f64))> + '_ {
    (0..ring.len()).map(move |i| (xy(&ring[i]), xy(&ring[(i + 1) % ring.len()])))
}

fn chain_edges(chain: &[GeoCoord]) -> impl Iterator<Item = ((f64, f64), (f64, f64))> + '_ {
    chain.windows(2).map(|w| (xy(&w[0]), xy(&w[1])))
}

/// All level-`level` cells the geometry meets. Fails before enumerating
/// when the bounding-box candidate count exceeds `cap`.
pub fn cover_geometry(g: &Geometry, level: u8, cap: u64) -> Result<CoverSet> {
    check_level(level)?;
    if let Geometry::Point(p) = g {
        return CoverSet::from_cells(level, vec![z_encode(*p, level)?]);
    }
    let b = g.bbox();
    let cands = candidates_within_cap(&b, level, cap)?;
    let mut cells = Vec::new();
    match g {
        Geometry::Point(_) => unreachable!(),
        Geometry::Box(bx) if bx.width() > 0.0 && bx.height() > 0.0 => {
            cands.for_each(|cell, r| {
                if bx.min_lon < r.lon_max
                    && bx.max_lon > r.lon_min
                    && bx.min_lat < r.lat_max
                    && bx.max_lat > r.lat_min
                {
                    cells.push(cell);
                }
            });
        }
        Geometry::Box(bx) => {
            // zero-area box: its diagonal is a segment or a point
            let a = (bx.min_lon, bx.min_lat);
            let z = (bx.max_lon, bx.max_lat);
            cands.for_each(|cell, r| {
                if segment_meets_cell(a, z, r) {
                    cells.push(cell);
                }
            });
        }
        Geometry::Polyline(v) => {
            cands.for_each(|cell, r| {
                if chain_edges(v).any(|(a, z)| segment_meets_cell(a, z, r)) {
                    cells.push(cell);
                }
            });
        }
        Geometry::Polygon(v) if ring_signed_area(v) != 0.0 => {
            cands.for_each(|cell, r| {
                let hit = ring_edges(v).any(|(a, z)| segment_enters_interior(a, z, r))
                    || point_in_ring(r.center(), v);
                if hit {
                    cells.push(cell);
                }
            });
        }
        Geometry::Polygon(v) => {
            cands.for_each(|cell, r| {
                if ring_edges(v).any(|(a, z)| segment_meets_cell(a, z, r)) {
                    cells.push(cell);
                }
            });
        }
    }
    CoverSet::from_cells(level, cells)
}

/// Cells whose closed rectangle touches the closed box. Always includes the
/// half-open cell of every point in the box, which makes it a safe filter.
pub fn touching_cells(b: &BBox, level: u8, cap: u64) -> Result<CoverSet> {
    let cands = candidates_within_cap(b, level, cap)?;
    let mut cells = Vec::new();
    cands.for_each(|cell, r| {
        if b.min_lon <= r.lon_max
            && b.max_lon >= r.lon_min
            && b.min_lat <= r.lat_max
            && b.max_lat >= r.lat_min
        {
            cells.push(cell);
        }
    });
    CoverSet::from_cells(level, cells)
}
