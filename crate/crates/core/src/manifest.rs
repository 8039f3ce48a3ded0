//! Ingestion manifests (JSON Lines) and `lon,lat` point files.
//!
//! A manifest line:
//!
//! ```json
//! {"path": "dem/tile.tif", "timestamp": "20240501", "geometry": {...},
//!  "type": "RAS", "sensor": "weather_station", "meta": {"res_m": 30}}
//! ```
//!
//! `geometry` is a GeoJSON geometry; `type` and `sensor` are optional,
//! `sensor` is shorthand for `meta.extra.sensor`.

use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::geosot::GeoCoord;
use crate::key::{parse_timestamp, TypeCode};
use crate::pipeline::{IngestMeta, RecordInput, EXTRA_SENSOR};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestEntry {
    path: String,
    #[serde(default, rename = "type")]
    type_code: Option<TypeCode>,
    #[serde(default)]
    geometry: Option<Value>,
    timestamp: String,
    #[serde(default)]
    sensor: Option<String>,
    #[serde(default)]
    meta: IngestMeta,
}

fn parse_entry(text: &str) -> Result<RecordInput> {
    let e: ManifestEntry = serde_json::from_str(text).map_err(|e| Error::Record(e.to_string()))?;
    let geometry = match e.geometry {
        None | Some(Value::Null) => None,
        Some(v) => Some(Geometry::from_geojson(&v)?),
    };
    let mut meta = e.meta;
    if let Some(s) = e.sensor {
        meta.extra.insert(EXTRA_SENSOR.into(), Value::String(s));
    }
    Ok(RecordInput {
        path: e.path,
        type_code: e.type_code,
        geometry,
        ts: parse_timestamp(&e.timestamp)?,
        meta,
    })
}

/// Parses each non-blank line independently; results carry 1-based line
/// numbers so callers can report and skip bad entries.
pub fn parse_manifest(text: &str) -> Vec<(usize, Result<RecordInput>)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, parse_entry(l)))
        .collect()
}

/// Reads a CSV with header `lon,lat`.
pub fn parse_points_csv(text: &str) -> Result<Vec<GeoCoord>> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.split(',').map(str::trim).eq(["lon", "lat"]) => {}
        _ => {
            return Err(Error::Load {
                line: 1,
                message: "expected header `lon,lat`".into(),
            })
        }
    }
    lines
        .map(|(i, l)| {
            let bad = |m: String| Error::Load {
                line: i + 1,
                message: m,
            };
            let mut parts = l.split(',').map(str::trim);
            let (Some(lon), Some(lat), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(bad(format!("expected two fields, got {l:?}")));
            };
            let lon: f64 = lon.parse().map_err(|_| bad(format!("bad lon {lon:?}")))?;
            let lat: f64 = lat.parse().map_err(|_| bad(format!("bad lat {lat:?}")))?;
            GeoCoord::new(lon, lat).map_err(|e| bad(e.to_string()))
        })
        .collect()
}

pub fn read_points_csv(path: &Path) -> Result<Vec<GeoCoord>> {
    parse_points_csv(&std::fs::read_to_string(path)?)
}

pub fn points_to_csv(points: &[GeoCoord]) -> String {
    let mut out = String::from("lon,lat\n");
    for p in points {
        out.push_str(&format!("{},{}\n", p.lon(), p.lat()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_lines() {
        let text = r#"{"path":"a.geojson","timestamp":"20240501","geometry":{"type":"Point","coordinates":[110.5,31.5]}}

{"path":"b.csv","timestamp":"2024050","geometry":null}
{"path":"c.txt","timestamp":"202405011230","type":"DOC","sensor":"weather_station","meta":{"admin_level":"county"}}
not json"#;
        let parsed = parse_manifest(text);
        assert_eq!(
            parsed.iter().map(|(l, _)| *l).collect::<Vec<_>>(),
            [1, 3, 4, 5]
        );
        assert!(parsed[0].1.is_ok());
        assert!(matches!(parsed[1].1, Err(Error::Timestamp { .. })));
        let c = parsed[2].1.as_ref().unwrap();
        assert_eq!(c.type_code, Some(TypeCode::Document));
        assert_eq!(c.meta.sensor(), Some("weather_station"));
        assert!(parsed[3].1.is_err());
    }

    #[test]
    fn points_csv_round_trip() {
        let pts = vec![
            GeoCoord::new(110.123456789, 31.5).unwrap(),
            GeoCoord::new(-1.0, -2.5).unwrap(),
        ];
        assert_eq!(parse_points_csv(&points_to_csv(&pts)).unwrap(), pts);
        assert!(matches!(
            parse_points_csv("x,y\n1,2"),
            Err(Error::Load { line: 1, .. })
        ));
        assert!(matches!(
            parse_points_csv("lon,lat\n1,2\n1,200"),
            Err(Error::Load { line: 3, .. })
        ));
    }
}
