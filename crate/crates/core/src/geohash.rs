//! Geohash: base32 text over alternating lon/lat bisection of the
//! `[-180, 180] x [-90, 90]` rectangle, longitude first.

use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::geosot::GeoCoord;

pub const ALPHABET: &[u8; 32] = b"0123456789bcdefghjkmnpqrstuvwxyz";
pub const MAX_LENGTH: usize = 12;

fn char_value(c: u8) -> Option<u64> {
    ALPHABET.iter().position(|&a| a == c).map(|p| p as u64)
}

/// Bits spent on each axis by a code of `length` characters.
pub fn axis_bits(length: usize) -> (u32, u32) {
    let total = 5 * length as u32;
    (total.div_ceil(2), total / 2)
}

/// Cell width and height in degrees.
pub fn cell_size(length: usize) -> (f64, f64) {
    let (lon_bits, lat_bits) = axis_bits(length);
    (
        360.0 / 2f64.powi(lon_bits as i32),
        180.0 / 2f64.powi(lat_bits as i32),
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeohashBounds {
    pub lon_min: f64,
    pub lon_max: f64,
    pub lat_min: f64,
    pub lat_max: f64,
}

impl GeohashBounds {
    pub fn contains(&self, c: GeoCoord) -> bool {
        c.lon() >= self.lon_min
            && c.lon() <= self.lon_max
            && c.lat() >= self.lat_min
            && c.lat() <= self.lat_max
    }

    pub fn center(&self) -> (f64, f64) {
        (
            0.5 * (self.lon_min + self.lon_max),
            0.5 * (self.lat_min + self.lat_max),
        )
    }
}

fn check_length(length: usize) -> Result<()> {
    if !(1..=MAX_LENGTH).contains(&length) {
        return Err(Error::domain(format!(
            "geohash length {length} outside 1..=12"
        )));
    }
    Ok(())
}

pub fn geohash_encode(coord: GeoCoord, length: usize) -> Result<String> {
    check_length(length)?;
    let (mut lon_lo, mut lon_hi) = (-180.0f64, 180.0f64);
    let (mut lat_lo, mut lat_hi) = (-90.0f64, 90.0f64);
    let mut out = String::with_capacity(length);
    let mut even = true;
    for _ in 0..length {
        let mut ch = 0usize;
        for _ in 0..5 {
            ch <<= 1;
            if even {
                let mid = 0.5 * (lon_lo + lon_hi);
                if coord.lon() >= mid {
                    ch |= 1;
                    lon_lo = mid;
                } else {
                    lon_hi = mid;
                }
            } else {
                let mid = 0.5 * (lat_lo + lat_hi);
                if coord.lat() >= mid {
                    ch |= 1;
                    lat_lo = mid;
                } else {
                    lat_hi = mid;
                }
            }
            even = !even;
        }
        out.push(char::from(ALPHABET[ch]));
    }
    Ok(out)
}

/// Per-axis integer cell indices of a code.
fn indices(code: &str) -> Result<(u64, u64)> {
    if code.is_empty() || code.len() > MAX_LENGTH {
        return Err(Error::Parse {
            position: code.len().min(MAX_LENGTH),
            message: format!("geohash length {} outside 1..=12", code.len()),
        });
    }
    let (mut lon, mut lat) = (0u64, 0u64);
    let mut even = true;
    for (pos, b) in code.bytes().enumerate() {
        let v = char_value(b).ok_or_else(|| Error::Parse {
            position: pos,
            message: format!("{:?} is not a geohash character", char::from(b)),
        })?;
        for k in (0..5).rev() {
            let bit = (v >> k) & 1;
            if even {
                lon = (lon << 1) | bit;
            } else {
                lat = (lat << 1) | bit;
            }
            even = !even;
        }
    }
    Ok((lon, lat))
}

fn from_indices(lon: u64, lat: u64, length: usize) -> String {
    let (lon_bits, lat_bits) = axis_bits(length);
    let mut out = String::with_capacity(length);
    let (mut li, mut ai) = (lon_bits, lat_bits);
    let mut even = true;
    for _ in 0..length {
        let mut ch = 0usize;
        for _ in 0..5 {
            let bit = if even {
                li -= 1;
                (lon >> li) & 1
            } else {
                ai -= 1;
                (lat >> ai) & 1
            };
            ch = (ch << 1) | bit as usize;
            even = !even;
        }
        out.push(char::from(ALPHABET[ch]));
    }
    out
}

pub fn geohash_decode(code: &str) -> Result<GeohashBounds> {
    let (lon, lat) = indices(code)?;
    let (w, h) = cell_size(code.len());
    Ok(GeohashBounds {
        lon_min: -180.0 + lon as f64 * w,
        lon_max: -180.0 + (lon + 1) as f64 * w,
        lat_min: -90.0 + lat as f64 * h,
        lat_max: -90.0 + (lat + 1) as f64 * h,
    })
}

/// Index range of cells meeting `[lo, hi]` on one axis: interior overlap
/// when the interval has width, the containing cell otherwise.
fn index_range(lo: f64, hi: f64, origin: f64, size: f64, count: u64) -> (u64, u64) {
    let idx = |v: f64| (((v - origin) / size).floor().max(0.0) as u64).min(count - 1);
    let first = idx(lo);
    if hi <= lo {
        return (first, first);
    }
    let t = (hi - origin) / size;
    let last = if t.fract() == 0.0 {
        t as u64 - 1
    } else {
        t.floor() as u64
    };
    (first, last.min(count - 1).max(first))
}

/// All `length`-character cells whose interior overlaps the box.
pub fn geohash_cover(b: &BBox, length: usize, cap: u64) -> Result<Vec<String>> {
    check_length(length)?;
    let (lon_bits, lat_bits) = axis_bits(length);
    let (w, h) = cell_size(length);
    let (x0, x1) = index_range(b.min_lon, b.max_lon, -180.0, w, 1 << lon_bits);
    let (y0, y1) = index_range(b.min_lat, b.max_lat, -90.0, h, 1 << lat_bits);
    let estimate = (x1 - x0 + 1).saturating_mul(y1 - y0 + 1);
    if estimate > cap {
        return Err(Error::CoverageCapExceeded { cap, estimate });
    }
    let mut out = Vec::with_capacity(estimate as usize);
    for y in y0..=y1 {
        for x in x0..=x1 {
            out.push(from_indices(x, y, length));
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Geohash length whose cells are the largest not exceeding `area` deg².
pub fn length_for_area(area_deg2: f64) -> usize {
    (1..=MAX_LENGTH)
        .find(|&n| {
            let (w, h) = cell_size(n);
            w * h <= area_deg2
        })
        .unwrap_or(MAX_LENGTH)
}
