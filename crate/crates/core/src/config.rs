//! Pipeline configuration, read from a TOML key-value file.
//!
//! ```toml
//! tiling_constant = 16.0          # pixels per cell edge for rasters
//! dp_epsilon = 0.000277777777     # Douglas-Peucker tolerance, degrees
//! coverage_cap = 1000000
//! fallback_level = 12             # unknown types
//! media_gps_level = 22
//! media_fallback_level = 10
//! media_fallback_by_admin = false # non-GPS media use the admin table instead
//!
//! [extensions]                    # overrides of the built-in type table
//! ".img" = "RAS"
//!
//! [admin_levels]
//! national = 7
//! provincial = 9
//! city = 11
//! county = 13
//! township = 14
//! missing = 12
//!
//! [sensors.weather_station]       # meta.extra.sensor = "weather_station"
//! level = 17
//! granularity = "hour"            # day | hour | ten_minutes | as_given
//!
//! [gazetteer]                     # meta.extra.region -> representative point
//! forest_park = [110.45, 31.6]
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DEFAULT_COVERAGE_CAP;
use crate::geosot::{extent_degrees, MAX_LEVEL};
use crate::key::TypeCode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeStep {
    Day,
    Hour,
    TenMinutes,
    AsGiven,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorProfile {
    pub level: u8,
    pub granularity: TimeStep,
}

/// Built-in sensor cadence table.
pub fn builtin_sensor_profile(kind: &str) -> Option<SensorProfile> {
    let p = |level, granularity| Some(SensorProfile { level, granularity });
    match kind {
        "weather_station" => p(17, TimeStep::Hour),
        "phenology_camera" => p(21, TimeStep::Day),
        "soil_moisture" => p(22, TimeStep::AsGiven),
        "wildlife_tracker" => p(24, TimeStep::TenMinutes),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdminTable {
    pub national: u8,
    pub provincial: u8,
    pub city: u8,
    pub county: u8,
    pub township: u8,
    /// Level for table/document records without an admin tier.
    pub missing: u8,
}

impl Default for AdminTable {
    fn default() -> Self {
        AdminTable {
            national: 7,
            provincial: 9,
            city: 11,
            county: 13,
            township: 14,
            missing: 12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub tiling_constant: f64,
    pub dp_epsilon: f64,
    pub coverage_cap: u64,
    pub fallback_level: u8,
    pub media_gps_level: u8,
    pub media_fallback_level: u8,
    pub media_fallback_by_admin: bool,
    pub extensions: BTreeMap<String, TypeCode>,
    pub admin_levels: AdminTable,
    pub sensors: BTreeMap<String, SensorProfile>,
    pub gazetteer: BTreeMap<String, [f64; 2]>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            tiling_constant: 16.0,
            dp_epsilon: extent_degrees(21),
            coverage_cap: DEFAULT_COVERAGE_CAP,
            fallback_level: 12,
            media_gps_level: 22,
            media_fallback_level: 10,
            media_fallback_by_admin: false,
            extensions: BTreeMap::new(),
            admin_levels: AdminTable::default(),
            sensors: BTreeMap::new(),
            gazetteer: BTreeMap::new(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        PipelineConfig::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.tiling_constant > 0.0 && self.tiling_constant.is_finite()) {
            return bad(format!(
                "tiling_constant {} must be > 0",
                self.tiling_constant
            ));
        }
        if self.dp_epsilon.is_nan() || self.dp_epsilon < 0.0 {
            return bad(format!("dp_epsilon {} must be >= 0", self.dp_epsilon));
        }
        if self.coverage_cap == 0 {
            return bad("coverage_cap must be > 0".into());
        }
        let a = &self.admin_levels;
        let mut levels = vec![
            ("fallback_level", self.fallback_level),
            ("media_gps_level", self.media_gps_level),
            ("media_fallback_level", self.media_fallback_level),
            ("admin_levels.national", a.national),
            ("admin_levels.provincial", a.provincial),
            ("admin_levels.city", a.city),
            ("admin_levels.county", a.county),
            ("admin_levels.township", a.township),
            ("admin_levels.missing", a.missing),
        ];
        levels.extend(self.sensors.values().map(|s| ("sensors.*.level", s.level)));
        for (name, level) in levels {
            if level > MAX_LEVEL {
                return bad(format!("{name} = {level} exceeds {MAX_LEVEL}"));
            }
        }
        for (name, [lon, lat]) in &self.gazetteer {
            if crate::geosot::GeoCoord::new(*lon, *lat).is_err() {
                return bad(format!(
                    "gazetteer entry {name:?} is not a valid coordinate"
                ));
            }
        }
        Ok(())
    }

    pub fn sensor_profile(&self, kind: &str) -> Option<SensorProfile> {
        self.sensors
            .get(kind)
            .copied()
            .or_else(|| builtin_sensor_profile(kind))
    }

    /// TOML echo of the effective configuration, for report headers.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default() {
        assert_eq!(
            PipelineConfig::from_toml_str("").unwrap(),
            PipelineConfig::default()
        );
    }

    #[test]
    fn overrides_parse() {
        let cfg = PipelineConfig::from_toml_str(
            r#"
            tiling_constant = 8.0
            media_fallback_by_admin = true
            [extensions]
            ".img" = "RAS"
            [admin_levels]
            county = 12
            [sensors.drone]
            level = 23
            granularity = "ten_minutes"
            [gazetteer]
            park = [110.45, 31.6]
            "#,
        )
        .unwrap();
        assert_eq!(cfg.tiling_constant, 8.0);
        assert_eq!(cfg.extensions[".img"], TypeCode::Raster);
        assert_eq!(cfg.admin_levels.county, 12);
        assert_eq!(cfg.admin_levels.national, 7);
        assert_eq!(cfg.sensor_profile("drone").unwrap().level, 23);
        assert_eq!(cfg.sensor_profile("weather_station").unwrap().level, 17);
        assert!(cfg.sensor_profile("submarine").is_none());
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(PipelineConfig::from_toml_str("tiling_constant = 0.0").is_err());
        assert!(PipelineConfig::from_toml_str("fallback_level = 40").is_err());
        assert!(PipelineConfig::from_toml_str("bogus = 1").is_err());
        assert!(PipelineConfig::from_toml_str("[gazetteer]\nx = [200.0, 0.0]").is_err());
    }

    #[test]
    fn echo_round_trips() {
        let cfg = PipelineConfig::default();
        assert_eq!(
            PipelineConfig::from_toml_str(&cfg.to_toml_string()).unwrap(),
            cfg
        );
    }
}
