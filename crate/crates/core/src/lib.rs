//! GeoSOT grid codes, composite space-time-type keys, adaptive-level
//! ingestion and a prefix-ordered record index, with a Geohash baseline
//! and benchmark suites.

pub mod bench;
pub mod config;
pub mod error;
pub mod geohash;
pub mod geometry;
pub mod geosot;
pub mod index;
pub mod key;
pub mod manifest;
pub mod pipeline;
pub mod synth;

pub use config::PipelineConfig;
pub use error::{Error, Result};
pub use geometry::{cover_geometry, BBox, CoverSet, Geometry};
pub use geosot::{cell_extent, decode, z_encode, CellBounds, CellCode, DimensionCode, GeoCoord};
pub use index::IndexStore;
pub use key::{build_pk, parse_pk, CompositeKey, Timestamp, TypeCode};
pub use pipeline::{encode_record, IngestMeta, Pipeline, RecordEntry};
