//! Record encoding: type detection, per-type level selection, central cell,
//! optional coverage and the composite key.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{PipelineConfig, TimeStep};
use crate::error::{Error, Result};
use crate::geometry::{
    centroid, cover_geometry, simplify, size_exceeds_cell, BBox, CoverSet, Geometry,
};
use crate::geosot::{cell_extent, extent_degrees, z_encode, CellCode, GeoCoord, METERS_PER_DEGREE};
use crate::key::{CompositeKey, Timestamp, TypeCode};

pub const RASTER_LEVELS: (u8, u8) = (15, 24);
pub const VECTOR_LEVELS: (u8, u8) = (18, 21);
pub const AREA_LEVELS: (u8, u8) = (7, 24);

/// Flag recorded in `IngestMeta::flags` when a raster lacks a resolution.
pub const FLAG_RES_MISSING: &str = "res_missing";
pub const FLAG_ADMIN_MISSING: &str = "admin_level_missing";
pub const FLAG_UNKNOWN_SENSOR: &str = "unknown_sensor";
pub const FLAG_GAZETTEER_POINT: &str = "gazetteer_point";

/// `meta.extra` keys the pipeline reads.
pub const EXTRA_SENSOR: &str = "sensor";
pub const EXTRA_REGION: &str = "region";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdminLevel {
    National,
    Provincial,
    City,
    County,
    Township,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub res_m: Option<f64>,
    #[serde(default)]
    pub gps: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub admin_level: Option<AdminLevel>,
    #[serde(default)]
    pub source: String,
    #[serde(default)]
    pub extra: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

impl IngestMeta {
    pub fn validate(&self) -> Result<()> {
        if let Some(r) = self.res_m {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::domain(format!("res_m {r} must be > 0")));
            }
        }
        Ok(())
    }

    pub fn sensor(&self) -> Option<&str> {
        self.extra.get(EXTRA_SENSOR).and_then(Value::as_str)
    }

    fn flag(&mut self, f: &str) {
        if !self.flags.iter().any(|x| x == f) {
            self.flags.push(f.to_string());
        }
    }
}

/// One encoded input file.
#[derive(Clone, Debug, PartialEq)]
pub struct RecordEntry {
    pub pk: CompositeKey,
    pub level: u8,
    pub center: CellCode,
    pub covers: CoverSet,
    /// Bounding box of the source geometry.
    pub bbox: BBox,
    pub meta: IngestMeta,
    pub path: String,
}

impl RecordEntry {
    pub fn pk_text(&self) -> String {
        self.pk.to_string()
    }

    pub fn validate(&self) -> Result<()> {
        if self.center.level() != self.level {
            return Err(Error::Record(format!(
                "center {} is not at level {}",
                self.center, self.level
            )));
        }
        if self.pk.cell != self.center {
            return Err(Error::Record(format!(
                "key cell {} differs from center {}",
                self.pk.cell, self.center
            )));
        }
        if !self.covers.is_empty() && self.covers.level() != self.level {
            return Err(Error::Record("covers are not at the record level".into()));
        }
        if self.path.contains(['\t', '\n']) {
            return Err(Error::Record("path contains a tab or newline".into()));
        }
        Ok(())
    }
}

/// Type from a file extension (leading dot optional, case-insensitive).
pub fn detect_type(extension: &str) -> TypeCode {
    let ext = extension.trim_start_matches('.').to_ascii_lowercase();
    match ext.as_str() {
        "tif" | "tiff" | "nc" => TypeCode::Raster,
        "shp" | "geojson" | "gpkg" | "kml" => TypeCode::Vector,
        "csv" | "xls" => TypeCode::Table,
        "doc" | "pdf" | "txt" => TypeCode::Document,
        "jpg" | "png" => TypeCode::Image,
        "wav" | "flac" | "mp3" | "aac" | "ogg" => TypeCode::Audio,
        "mp4" | "avi" => TypeCode::Video,
        _ => TypeCode::Unknown,
    }
}

pub fn extension_of(path: &str) -> &str {
    let name = path.rsplit(['/', '\\']).next().unwrap_or(path);
    match name.rfind('.') {
        Some(i) if i > 0 => &name[i..],
        _ => "",
    }
}

fn finest_level_where(range: (u8, u8), pred: impl Fn(u8) -> bool) -> Option<u8> {
    (range.0..=range.1).rev().find(|&l| pred(l))
}

fn edge_meters(level: u8) -> f64 {
    cell_extent(level).expect("level in range").meters
}

/// Finest level in 15..=24 whose cell edge holds `tiling_constant` pixels.
pub fn level_by_resolution(res_m: f64, tiling_constant: f64) -> Result<u8> {
    if !(res_m > 0.0 && res_m.is_finite()) {
        return Err(Error::domain(format!("resolution {res_m} must be > 0")));
    }
    let needed = tiling_constant * res_m;
    Ok(finest_level_where(RASTER_LEVELS, |l| edge_meters(l) >= needed).unwrap_or(RASTER_LEVELS.0))
}

/// Finest level in 18..=21 whose cell is at least the longer bbox side.
pub fn level_by_size(g: &Geometry) -> u8 {
    let b = g.bbox();
    let side = b.width().max(b.height());
    finest_level_where(VECTOR_LEVELS, |l| extent_degrees(l) >= side).unwrap_or(VECTOR_LEVELS.0)
}

pub fn level_by_admin(admin: Option<AdminLevel>) -> u8 {
    admin_lookup(&crate::config::AdminTable::default(), admin)
}

fn admin_lookup(table: &crate::config::AdminTable, admin: Option<AdminLevel>) -> u8 {
    match admin {
        Some(AdminLevel::National) => table.national,
        Some(AdminLevel::Provincial) => table.provincial,
        Some(AdminLevel::City) => table.city,
        Some(AdminLevel::County) => table.county,
        Some(AdminLevel::Township) => table.township,
        None => table.missing,
    }
}

pub fn level_for_media(gps: bool) -> u8 {
    if gps {
        22
    } else {
        10
    }
}

/// Finest level in 7..=24 whose cell edge is at least the side of a square
/// of the given area.
pub fn adaptive_level_by_area(area_km2: f64) -> Result<u8> {
    if !(area_km2 > 0.0 && area_km2.is_finite()) {
        return Err(Error::domain(format!("area {area_km2} km² must be > 0")));
    }
    let side_m = 1000.0 * area_km2.sqrt();
    Ok(finest_level_where(AREA_LEVELS, |l| edge_meters(l) >= side_m).unwrap_or(AREA_LEVELS.0))
}

/// Planar bbox area using the same metres-per-degree on both axes.
pub fn bbox_area_km2(b: &BBox) -> f64 {
    let km = METERS_PER_DEGREE / 1000.0;
    (b.width() * km) * (b.height() * km)
}

/// Smallest area fed to [`adaptive_level_by_area`]: one square metre.
pub const MIN_AREA_KM2: f64 = 1e-6;

pub fn adaptive_level_for_bbox(b: &BBox) -> u8 {
    adaptive_level_by_area(bbox_area_km2(b).max(MIN_AREA_KM2)).expect("area is positive")
}

fn apply_time_step(ts: Timestamp, step: TimeStep) -> Timestamp {
    match step {
        TimeStep::Day => ts.to_day(),
        TimeStep::Hour => ts.floor_minutes(60),
        TimeStep::TenMinutes => ts.floor_minutes(10),
        TimeStep::AsGiven => ts,
    }
}

/// Encoder holding the configuration.
#[derive(Clone, Debug, Default)]
pub struct Pipeline {
    config: PipelineConfig,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        Ok(Pipeline { config })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn detect_type(&self, extension: &str) -> TypeCode {
        let ext = format!(
            ".{}",
            extension.trim_start_matches('.').to_ascii_lowercase()
        );
        self.config
            .extensions
            .get(&ext)
            .copied()
            .unwrap_or_else(|| detect_type(&ext))
    }

    /// Level chosen by the data type alone.
    pub fn level_for_type(
        &self,
        type_code: TypeCode,
        g: &Geometry,
        meta: &mut IngestMeta,
    ) -> Result<u8> {
        let cfg = &self.config;
        Ok(match type_code {
            TypeCode::Raster => match meta.res_m {
                Some(res) => level_by_resolution(res, cfg.tiling_constant)?,
                None => {
                    meta.flag(FLAG_RES_MISSING);
                    RASTER_LEVELS.0
                }
            },
            TypeCode::Vector => level_by_size(g),
            TypeCode::Image | TypeCode::Video | TypeCode::Audio => {
                if meta.gps {
                    cfg.media_gps_level
                } else if cfg.media_fallback_by_admin && meta.admin_level.is_some() {
                    admin_lookup(&cfg.admin_levels, meta.admin_level)
                } else {
                    cfg.media_fallback_level
                }
            }
            TypeCode::Table | TypeCode::Document => {
                if meta.admin_level.is_none() {
                    meta.flag(FLAG_ADMIN_MISSING);
                }
                admin_lookup(&cfg.admin_levels, meta.admin_level)
            }
            TypeCode::Unknown => cfg.fallback_level,
        })
    }

    /// Encodes one file. `explicit_type` bypasses extension detection.
    /// Table and document records may omit the geometry when
    /// `meta.extra.region` names a gazetteer entry.
    pub fn encode_record(
        &self,
        path: &str,
        explicit_type: Option<TypeCode>,
        geometry: Option<Geometry>,
        ts: Timestamp,
        meta: IngestMeta,
    ) -> Result<RecordEntry> {
        let mut meta = meta;
        meta.validate()?;
        let type_code = explicit_type.unwrap_or_else(|| self.detect_type(extension_of(path)));
        let geometry = match geometry {
            Some(g) => g,
            None => self.gazetteer_point(type_code, &mut meta)?,
        };
        let source_bbox = geometry.bbox();

        let geometry = if type_code == TypeCode::Vector {
            simplify(&geometry, self.config.dp_epsilon)?
        } else {
            geometry
        };

        let mut ts = ts;
        let level = match meta.sensor().map(str::to_owned) {
            Some(kind) => match self.config.sensor_profile(&kind) {
                Some(profile) => {
                    ts = apply_time_step(ts, profile.granularity);
                    profile.level
                }
                None => {
                    meta.flag(FLAG_UNKNOWN_SENSOR);
                    self.level_for_type(type_code, &geometry, &mut meta)?
                }
            },
            None => self.level_for_type(type_code, &geometry, &mut meta)?,
        };

        let center = z_encode(centroid(&geometry), level)?;
        let covers = if level > 0 && size_exceeds_cell(&geometry, level) {
            cover_geometry(&geometry, level, self.config.coverage_cap)?
        } else {
            CoverSet::empty(level)
        };
        let record = RecordEntry {
            pk: CompositeKey::new(center, ts, type_code),
            level,
            center,
            covers,
            bbox: source_bbox,
            meta,
            path: path.to_string(),
        };
        record.validate()?;
        Ok(record)
    }

    fn gazetteer_point(&self, type_code: TypeCode, meta: &mut IngestMeta) -> Result<Geometry> {
        if !matches!(type_code, TypeCode::Table | TypeCode::Document) {
            return Err(Error::Geometry(format!(
                "{type_code} records need a geometry"
            )));
        }
        let region = meta
            .extra
            .get(EXTRA_REGION)
            .and_then(Value::as_str)
            .ok_or_else(|| {
                Error::Geometry("no geometry and no meta.extra.region to look up".into())
            })?;
        let [lon, lat] =
            *self.config.gazetteer.get(region).ok_or_else(|| {
                Error::Geometry(format!("region {region:?} is not in the gazetteer"))
            })?;
        meta.flag(FLAG_GAZETTEER_POINT);
        Ok(Geometry::Point(GeoCoord::new(lon, lat)?))
    }

    /// Encodes many inputs in parallel; results keep input order.
    pub fn encode_batch(&self, inputs: Vec<RecordInput>) -> Vec<Result<RecordEntry>> {
        inputs
            .into_par_iter()
            .map(|i| self.encode_record(&i.path, i.type_code, i.geometry, i.ts, i.meta))
            .collect()
    }
}

/// Owned arguments of [`Pipeline::encode_record`].
#[derive(Clone, Debug)]
pub struct RecordInput {
    pub path: String,
    pub type_code: Option<TypeCode>,
    pub geometry: Option<Geometry>,
    pub ts: Timestamp,
    pub meta: IngestMeta,
}

/// [`Pipeline::encode_record`] with the default configuration.
pub fn encode_record(
    path: &str,
    g: Geometry,
    ts: Timestamp,
    meta: IngestMeta,
) -> Result<RecordEntry> {
    Pipeline::default().encode_record(path, None, Some(g), ts, meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn ts(s: &str) -> Timestamp {
        s.parse().unwrap()
    }

    #[test]
    fn type_table() {
        assert_eq!(detect_type(".tif"), TypeCode::Raster);
        assert_eq!(detect_type("TIFF"), TypeCode::Raster);
        assert_eq!(detect_type(".geojson"), TypeCode::Vector);
        assert_eq!(detect_type(".xls"), TypeCode::Table);
        assert_eq!(detect_type(".pdf"), TypeCode::Document);
        assert_eq!(detect_type(".png"), TypeCode::Image);
        assert_eq!(detect_type(".mp3"), TypeCode::Audio);
        assert_eq!(detect_type(".avi"), TypeCode::Video);
        assert_eq!(detect_type(".xyz"), TypeCode::Unknown);
        assert_eq!(detect_type(""), TypeCode::Unknown);
    }

    #[test]
    fn extension_extraction() {
        assert_eq!(extension_of("a/b/scene.TIF"), ".TIF");
        assert_eq!(extension_of("archive.tar.gz"), ".gz");
        assert_eq!(extension_of("dir.d/README"), "");
        assert_eq!(extension_of(".hidden"), "");
    }

    #[test]
    fn resolution_levels() {
        assert_eq!(level_by_resolution(30.0, 16.0).unwrap(), 17);
        assert_eq!(level_by_resolution(0.5, 16.0).unwrap(), 22);
        assert_eq!(level_by_resolution(10_000.0, 16.0).unwrap(), 15);
        assert_eq!(level_by_resolution(0.001, 16.0).unwrap(), 24);
        assert!(level_by_resolution(0.0, 16.0).is_err());
    }

    #[test]
    fn size_levels() {
        let sec = 1.0 / 3600.0;
        assert_eq!(level_by_size(&Geometry::point(1.0, 1.0).unwrap()), 21);
        assert_eq!(
            level_by_size(&Geometry::bbox_geometry(1.0, 1.0, 1.0 + 100.0 * sec, 1.0).unwrap()),
            18
        );
        assert_eq!(
            level_by_size(&Geometry::bbox_geometry(1.0, 1.0, 1.0 + 0.9 * sec, 1.0).unwrap()),
            21
        );
        assert_eq!(
            level_by_size(&Geometry::bbox_geometry(1.0, 1.0, 1.0 + 3.0 * sec, 1.0).unwrap()),
            19
        );
    }

    #[test]
    fn admin_and_media_levels() {
        assert_eq!(level_by_admin(Some(AdminLevel::County)), 13);
        assert_eq!(level_by_admin(Some(AdminLevel::National)), 7);
        assert_eq!(level_by_admin(Some(AdminLevel::Township)), 14);
        assert_eq!(level_by_admin(None), 12);
        assert_eq!(level_for_media(true), 22);
        assert_eq!(level_for_media(false), 10);
    }

    #[test]
    fn area_levels() {
        assert_eq!(adaptive_level_by_area(2.1).unwrap(), 15);
        assert_eq!(adaptive_level_by_area(1_000_000.0).unwrap(), 7);
        assert_eq!(adaptive_level_by_area(1e-6).unwrap(), 24);
        assert!(adaptive_level_by_area(0.0).is_err());
        assert!(adaptive_level_by_area(-1.0).is_err());
        let mut prev = 24;
        for i in 0..200 {
            let l = adaptive_level_by_area(10f64.powf(-7.0 + i as f64 * 0.07)).unwrap();
            assert!(l <= prev);
            prev = l;
        }
    }

    #[test]
    fn raster_record() {
        let g = Geometry::bbox_geometry(110.0, 31.0, 110.05, 31.05).unwrap();
        let meta = IngestMeta {
            res_m: Some(30.0),
            ..Default::default()
        };
        let r = encode_record("scene.tif", g, ts("20240615"), meta).unwrap();
        assert_eq!(r.level, 17);
        assert!(!r.covers.is_empty());
        assert!(r.covers.contains(&r.center));
        assert!(r.pk_text().ends_with("|20240615|RAS"));
    }

    #[test]
    fn raster_without_resolution_is_flagged() {
        let g = Geometry::bbox_geometry(110.0, 31.0, 110.001, 31.001).unwrap();
        let r = encode_record("scene.nc", g, ts("20240615"), IngestMeta::default()).unwrap();
        assert_eq!(r.level, 15);
        assert_eq!(r.meta.flags, [FLAG_RES_MISSING]);
    }

    #[test]
    fn media_and_unknown_records() {
        let p = Geometry::point(110.3, 31.7).unwrap();
        let meta = IngestMeta {
            gps: true,
            ..Default::default()
        };
        let r = encode_record("cam/0001.jpg", p.clone(), ts("20240615"), meta).unwrap();
        assert_eq!(r.level, 22);
        assert!(r.covers.is_empty());
        assert!(r.pk_text().ends_with("|IMG"));

        let r = encode_record("blob.bin", p, ts("20240101"), IngestMeta::default()).unwrap();
        assert_eq!(r.pk.type_code, TypeCode::Unknown);
        assert_eq!(r.level, 12);
    }

    #[test]
    fn vector_record_is_simplified_then_sized() {
        let sec = 1.0 / 3600.0;
        let pts: Vec<GeoCoord> = (0..50)
            .map(|i| {
                GeoCoord::new(110.0 + i as f64 * 2.0 * sec, 31.0 + (i % 2) as f64 * 1e-7).unwrap()
            })
            .collect();
        let g = Geometry::polyline(pts).unwrap();
        let r = encode_record("roads.geojson", g, ts("20240615"), IngestMeta::default()).unwrap();
        // 98" long -> coarsest vector level, covers along the line
        assert_eq!(r.level, 18);
        assert!(r.covers.len() >= 12);
    }

    #[test]
    fn sensor_profile_overrides_type_rule() {
        let p = Geometry::point(110.3, 31.7).unwrap();
        let mut extra = BTreeMap::new();
        extra.insert(EXTRA_SENSOR.to_string(), json!("wildlife_tracker"));
        let meta = IngestMeta {
            extra,
            ..Default::default()
        };
        let r = encode_record("collar.csv", p.clone(), ts("202406151437"), meta).unwrap();
        assert_eq!(r.level, 24);
        assert_eq!(r.pk.ts.to_string(), "202406151430");
        assert_eq!(r.pk.type_code, TypeCode::Table);

        let mut extra = BTreeMap::new();
        extra.insert(EXTRA_SENSOR.to_string(), json!("weather_station"));
        let meta = IngestMeta {
            extra,
            ..Default::default()
        };
        let r = encode_record("station.csv", p, ts("202406151437"), meta).unwrap();
        assert_eq!(
            (r.level, r.pk.ts.to_string().as_str()),
            (17, "202406151400")
        );
    }

    #[test]
    fn geometry_free_documents_use_the_gazetteer() {
        let mut cfg = PipelineConfig::default();
        cfg.gazetteer.insert("park".into(), [110.45, 31.6]);
        let pipe = Pipeline::new(cfg).unwrap();
        let mut extra = BTreeMap::new();
        extra.insert(EXTRA_REGION.to_string(), json!("park"));
        let meta = IngestMeta {
            admin_level: Some(AdminLevel::County),
            extra,
            ..Default::default()
        };
        let r = pipe
            .encode_record("report.pdf", None, None, ts("20240615"), meta.clone())
            .unwrap();
        assert_eq!(r.level, 13);
        assert!(r.meta.flags.contains(&FLAG_GAZETTEER_POINT.to_string()));

        let mut missing = meta.clone();
        missing
            .extra
            .insert(EXTRA_REGION.into(), json!("elsewhere"));
        assert!(pipe
            .encode_record("report.pdf", None, None, ts("20240615"), missing)
            .is_err());
        assert!(pipe
            .encode_record("photo.jpg", None, None, ts("20240615"), meta)
            .is_err());
    }

    #[test]
    fn coverage_cap_aborts_the_record() {
        let cfg = PipelineConfig {
            coverage_cap: 10,
            ..Default::default()
        };
        let pipe = Pipeline::new(cfg).unwrap();
        let g = Geometry::bbox_geometry(110.0, 31.0, 111.0, 32.0).unwrap();
        let meta = IngestMeta {
            res_m: Some(30.0),
            ..Default::default()
        };
        let err = pipe
            .encode_record("big.tif", None, Some(g), ts("20240615"), meta)
            .unwrap_err();
        assert!(matches!(err, Error::CoverageCapExceeded { cap: 10, .. }));
    }

    #[test]
    fn extension_overrides_and_media_admin_fallback() {
        let mut cfg = PipelineConfig::default();
        cfg.extensions.insert(".img".into(), TypeCode::Raster);
        cfg.media_fallback_by_admin = true;
        let pipe = Pipeline::new(cfg).unwrap();
        assert_eq!(pipe.detect_type("IMG"), TypeCode::Raster);
        assert_eq!(pipe.detect_type(".tif"), TypeCode::Raster);
        let meta = IngestMeta {
            admin_level: Some(AdminLevel::City),
            ..Default::default()
        };
        let p = Geometry::point(110.3, 31.7).unwrap();
        let r = pipe
            .encode_record("clip.mp4", None, Some(p), ts("20240615"), meta)
            .unwrap();
        assert_eq!(r.level, 11);
    }

    #[test]
    fn batch_keeps_order() {
        let inputs: Vec<RecordInput> = (0..20)
            .map(|i| RecordInput {
                path: format!("f{i}.bin"),
                type_code: None,
                geometry: Some(Geometry::point(110.0 + i as f64 * 0.1, 31.0).unwrap()),
                ts: ts("20240101"),
                meta: IngestMeta::default(),
            })
            .collect();
        let out = Pipeline::default().encode_batch(inputs);
        for (i, r) in out.iter().enumerate() {
            assert_eq!(r.as_ref().unwrap().path, format!("f{i}.bin"));
        }
    }

    #[test]
    fn bad_resolution_is_rejected() {
        let meta = IngestMeta {
            res_m: Some(-3.0),
            ..Default::default()
        };
        let g = Geometry::point(1.0, 1.0).unwrap();
        assert!(encode_record("x.tif", g, ts("20240101"), meta).is_err());
    }
}
