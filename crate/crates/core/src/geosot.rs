//! GeoSOT cell codes.
//!
//! Each axis value is packed into a 32-bit [`DimensionCode`] laid out as
//! `sign(1) deg(8) min(6) sec(6) frac(11)`, i.e. the 512-degree extended
//! space where every degree is stretched to 64 minutes and every minute to
//! 64 seconds. A level-`L` cell code is the quadrant digit followed by the
//! first `L - 1` magnitude bits of both axes interleaved Z-order style, with
//! latitude as the high bit of each quaternary digit.
//!
//! Positions inside the 60..63 minute/second padding are never produced by
//! the encoder; cells that lie entirely inside it are rejected on decode.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const MAX_LEVEL: u8 = 32;

/// Equatorial metres per degree, applied uniformly to both axes.
pub const METERS_PER_DEGREE: f64 = 111_320.0;

/// Arc-second fractions resolved by the finest level.
pub const FRACTION_STEPS: u64 = 2048;

pub(crate) const UNITS_PER_SECOND: u64 = FRACTION_STEPS;
pub(crate) const UNITS_PER_MINUTE: u64 = 60 * UNITS_PER_SECOND;
pub(crate) const UNITS_PER_DEGREE: u64 = 60 * UNITS_PER_MINUTE;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    Lon,
    Lat,
}

impl Axis {
    pub fn limit(self) -> f64 {
        match self {
            Axis::Lon => 180.0,
            Axis::Lat => 90.0,
        }
    }
}

/// A validated WGS-84 coordinate in degrees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeoCoord {
    lon: f64,
    lat: f64,
}

impl GeoCoord {
    pub fn new(lon: f64, lat: f64) -> Result<Self> {
        check_axis(lon, Axis::Lon)?;
        check_axis(lat, Axis::Lat)?;
        // `+ 0.0` turns -0.0 into +0.0 and leaves every other value alone
        Ok(GeoCoord {
            lon: lon + 0.0,
            lat: lat + 0.0,
        })
    }

    /// Builds a coordinate by clamping into range. NaN is still rejected.
    pub fn clamped(lon: f64, lat: f64) -> Result<Self> {
        if !lon.is_finite() || !lat.is_finite() {
            return Err(Error::domain("coordinate is not finite"));
        }
        GeoCoord::new(lon.clamp(-180.0, 180.0), lat.clamp(-90.0, 90.0))
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }
}

fn check_axis(value: f64, axis: Axis) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::domain(format!(
            "{axis:?} value {value} is not finite"
        )));
    }
    if value.abs() > axis.limit() {
        return Err(Error::domain(format!(
            "{axis:?} value {value} outside [-{0}, {0}]",
            axis.limit()
        )));
    }
    Ok(())
}

/// Exact `floor(magnitude * 3600 * 2048)` for a finite, non-negative double.
///
/// A double is `mantissa * 2^exp` and `3600 * 2048 = 225 * 2^15`, so the
/// product is an integer times a power of two and can be floored without
/// any rounding.
pub(crate) fn magnitude_units(magnitude: f64) -> u64 {
    debug_assert!(magnitude.is_finite() && magnitude >= 0.0);
    let bits = magnitude.to_bits();
    let exp_field = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mantissa, exp) = if exp_field == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp_field - 1075)
    };
    let scaled = mantissa as u128 * 225;
    let shift = exp + 15;
    if shift >= 0 {
        (scaled << shift) as u64
    } else if shift <= -128 {
        0
    } else {
        (scaled >> (-shift)) as u64
    }
}

/// Packs a linear unit count into the 31-bit `deg min sec frac` magnitude.
pub(crate) fn units_to_packed(units: u64) -> u32 {
    let deg = units / UNITS_PER_DEGREE;
    let rem = units % UNITS_PER_DEGREE;
    let min = rem / UNITS_PER_MINUTE;
    let rem = rem % UNITS_PER_MINUTE;
    let sec = rem / UNITS_PER_SECOND;
    let frac = rem % UNITS_PER_SECOND;
    ((deg << 23) | (min << 17) | (sec << 11) | frac) as u32
}

fn split_packed(packed: u64) -> (u64, u64, u64, u64) {
    (
        packed >> 23,
        (packed >> 17) & 0x3f,
        (packed >> 11) & 0x3f,
        packed & 0x7ff,
    )
}

/// Linear units of a packed magnitude, or `None` inside the padding.
pub(crate) fn packed_to_units(packed: u64) -> Option<u64> {
    let (deg, min, sec, frac) = split_packed(packed);
    if min >= 60 || sec >= 60 {
        return None;
    }
    Some(deg * UNITS_PER_DEGREE + min * UNITS_PER_MINUTE + sec * UNITS_PER_SECOND + frac)
}

/// Linear units of an exclusive upper cell edge. Edges that land in the
/// padding snap to the next real minute or degree.
fn packed_upper_units(packed: u64) -> u64 {
    let (mut deg, mut min, mut sec, frac) = split_packed(packed);
    if sec >= 60 {
        sec = 0;
        min += 1;
    }
    if min >= 60 {
        min = 0;
        deg += 1;
    }
    deg * UNITS_PER_DEGREE + min * UNITS_PER_MINUTE + sec * UNITS_PER_SECOND + frac
}

pub(crate) fn units_to_degrees(units: u64) -> f64 {
    units as f64 / UNITS_PER_DEGREE as f64
}

/// Sign-magnitude code of one axis value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DimensionCode(u32);

impl DimensionCode {
    pub fn encode(value: f64, axis: Axis) -> Result<Self> {
        check_axis(value, axis)?;
        let value = value + 0.0;
        let sign = u32::from(value < 0.0) << 31;
        Ok(DimensionCode(
            sign | units_to_packed(magnitude_units(value.abs())),
        ))
    }

    pub fn from_fields(negative: bool, deg: u32, min: u32, sec: u32, frac: u32) -> Result<Self> {
        if deg > 0xff || min > 0x3f || sec > 0x3f || frac > 0x7ff {
            return Err(Error::domain("dimension field exceeds its bit width"));
        }
        Ok(DimensionCode(
            (u32::from(negative) << 31) | (deg << 23) | (min << 17) | (sec << 11) | frac,
        ))
    }

    pub fn from_bits(bits: u32) -> Self {
        DimensionCode(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn is_negative(self) -> bool {
        self.0 >> 31 == 1
    }

    pub fn degrees(self) -> u32 {
        (self.0 >> 23) & 0xff
    }

    pub fn minutes(self) -> u32 {
        (self.0 >> 17) & 0x3f
    }

    pub fn seconds(self) -> u32 {
        (self.0 >> 11) & 0x3f
    }

    pub fn fraction(self) -> u32 {
        self.0 & 0x7ff
    }

    /// The 31 bits following the sign.
    pub fn magnitude(self) -> u32 {
        self.0 & 0x7fff_ffff
    }
}

pub fn encode_dimension(value: f64, axis: Axis) -> Result<DimensionCode> {
    DimensionCode::encode(value, axis)
}

/// A GeoSOT grid cell: `level` quaternary digits stored left-aligned in a
/// `u64`, two bits per digit.
///
/// Field order matters: deriving `Ord` over `(path, level)` gives the same
/// order as comparing the textual codes.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellCode {
    path: u64,
    level: u8,
}

impl CellCode {
    pub const ROOT: CellCode = CellCode { path: 0, level: 0 };

    pub fn from_digits(digits: &[u8]) -> Result<Self> {
        if digits.len() > MAX_LEVEL as usize {
            return Err(Error::domain(format!(
                "{} digits exceed level 32",
                digits.len()
            )));
        }
        let mut path = 0u64;
        for (i, &d) in digits.iter().enumerate() {
            if d > 3 {
                return Err(Error::domain(format!("digit {d} is not quaternary")));
            }
            path |= u64::from(d) << (62 - 2 * i);
        }
        Ok(CellCode {
            path,
            level: digits.len() as u8,
        })
    }

    pub fn level(&self) -> u8 {
        self.level
    }

    /// Digit at 1-based position `i`.
    pub fn digit(&self, i: u8) -> u8 {
        debug_assert!(i >= 1 && i <= self.level);
        ((self.path >> (64 - 2 * u32::from(i))) & 3) as u8
    }

    pub fn digits(&self) -> impl Iterator<Item = u8> + '_ {
        (1..=self.level).map(|i| self.digit(i))
    }

    pub fn parent(&self) -> Result<CellCode> {
        if self.level == 0 {
            return Err(Error::domain("the root cell has no parent"));
        }
        Ok(self.truncate(self.level - 1))
    }

    pub fn children(&self) -> Result<[CellCode; 4]> {
        if self.level >= MAX_LEVEL {
            return Err(Error::domain("level-32 cells have no children"));
        }
        let level = self.level + 1;
        let shift = 64 - 2 * u32::from(level);
        Ok([0u64, 1, 2, 3].map(|d| CellCode {
            path: self.path | (d << shift),
            level,
        }))
    }

    /// Ancestor at `level` (itself when `level` equals its own).
    pub fn truncate(&self, level: u8) -> CellCode {
        let level = level.min(self.level);
        let path = if level == 0 {
            0
        } else {
            self.path & (!0u64 << (64 - 2 * u32::from(level)))
        };
        CellCode { path, level }
    }

    /// True when `self` is `other` or one of its ancestors.
    pub fn is_prefix_of(&self, other: &CellCode) -> bool {
        self.level <= other.level && other.truncate(self.level) == *self
    }

    /// Either cell is an ancestor of (or equal to) the other.
    pub fn is_related(&self, other: &CellCode) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    fn quadrant(&self) -> (bool, bool) {
        let d = self.digit(1);
        (d & 2 != 0, d & 1 != 0)
    }

    /// Per-axis cell indices: the `level - 1` magnitude bits of lat and lon.
    fn axis_indices(&self) -> (u32, u32) {
        let mut lat = 0u32;
        let mut lon = 0u32;
        for i in 2..=self.level {
            let d = self.digit(i);
            lat = (lat << 1) | u32::from(d >> 1);
            lon = (lon << 1) | u32::from(d & 1);
        }
        (lat, lon)
    }

    pub(crate) fn from_axis_indices(
        level: u8,
        lat_negative: bool,
        lon_negative: bool,
        lat_index: u32,
        lon_index: u32,
    ) -> CellCode {
        debug_assert!((1..=MAX_LEVEL).contains(&level));
        let mut path = (u64::from(lat_negative) * 2 + u64::from(lon_negative)) << 62;
        let bits = u32::from(level) - 1;
        for k in 0..bits {
            let lat_bit = u64::from((lat_index >> (bits - 1 - k)) & 1);
            let lon_bit = u64::from((lon_index >> (bits - 1 - k)) & 1);
            path |= (lat_bit * 2 + lon_bit) << (60 - 2 * k);
        }
        CellCode { path, level }
    }
}

pub fn common_prefix_len(a: &CellCode, b: &CellCode) -> u8 {
    let shared = ((a.path ^ b.path).leading_zeros() / 2) as u8;
    shared.min(a.level).min(b.level)
}

impl fmt::Display for CellCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::with_capacity(1 + self.level as usize);
        s.push('G');
        s.extend(self.digits().map(|d| char::from(b'0' + d)));
        f.write_str(&s)
    }
}

impl fmt::Debug for CellCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CellCode({self})")
    }
}

impl FromStr for CellCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bytes = s.as_bytes();
        if bytes.first() != Some(&b'G') {
            return Err(Error::Parse {
                position: 0,
                message: "cell code must start with 'G'".into(),
            });
        }
        if bytes.len() > 1 + MAX_LEVEL as usize {
            return Err(Error::Parse {
                position: 1 + MAX_LEVEL as usize,
                message: format!("cell code longer than {} digits", MAX_LEVEL),
            });
        }
        let mut digits = Vec::with_capacity(bytes.len() - 1);
        for (i, &b) in bytes.iter().enumerate().skip(1) {
            match b {
                b'0'..=b'3' => digits.push(b - b'0'),
                _ => {
                    return Err(Error::Parse {
                        position: i,
                        message: format!("'{}' is not a quaternary digit", char::from(b)),
                    })
                }
            }
        }
        CellCode::from_digits(&digits)
    }
}

impl Serialize for CellCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CellCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Z-order encode a coordinate at `level`.
pub fn z_encode(coord: GeoCoord, level: u8) -> Result<CellCode> {
    if level > MAX_LEVEL {
        return Err(Error::domain(format!("level {level} exceeds {MAX_LEVEL}")));
    }
    if level == 0 {
        return Ok(CellCode::ROOT);
    }
    let lon = DimensionCode::encode(coord.lon, Axis::Lon)?;
    let lat = DimensionCode::encode(coord.lat, Axis::Lat)?;
    let shift = 32 - u32::from(level);
    Ok(CellCode::from_axis_indices(
        level,
        lat.is_negative(),
        lon.is_negative(),
        lat.magnitude() >> shift,
        lon.magnitude() >> shift,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Positive,
    Negative,
    Both,
}

/// Exact magnitude range of a cell along one axis, in linear units.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct AxisSpan {
    side: Side,
    lo: u64,
    hi: u64,
}

impl AxisSpan {
    fn contains(&self, value: f64) -> bool {
        let negative = value < 0.0;
        let side_ok = match self.side {
            Side::Both => true,
            Side::Positive => !negative,
            Side::Negative => negative,
        };
        if !side_ok {
            return false;
        }
        let units = magnitude_units(value.abs());
        self.lo <= units && units < self.hi
    }

    fn degrees(&self) -> (f64, f64) {
        let lo = units_to_degrees(self.lo);
        let hi = units_to_degrees(self.hi);
        match self.side {
            Side::Positive => (lo, hi),
            Side::Negative => (-hi, -lo),
            Side::Both => (-hi, hi),
        }
    }
}

/// Rectangle of a decoded cell in degrees.
///
/// Cells are half-open in magnitude away from the quadrant origin. Cells
/// straddling the minute/second padding are clipped to the real part, so
/// their extent can be smaller than [`cell_extent`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellBounds {
    pub level: u8,
    pub lon_min: f64,
    pub lon_max: f64,
    pub lat_min: f64,
    pub lat_max: f64,
    lon: AxisSpan,
    lat: AxisSpan,
}

impl CellBounds {
    /// Exact half-open membership test.
    pub fn contains(&self, coord: GeoCoord) -> bool {
        self.lon.contains(coord.lon) && self.lat.contains(coord.lat)
    }

    /// Midpoint of the rectangle as `(lon, lat)`.
    pub fn center(&self) -> (f64, f64) {
        (
            0.5 * (self.lon_min + self.lon_max),
            0.5 * (self.lat_min + self.lat_max),
        )
    }

    pub fn width(&self) -> f64 {
        self.lon_max - self.lon_min
    }

    pub fn height(&self) -> f64 {
        self.lat_max - self.lat_min
    }
}

fn axis_span(side: Side, index: u32, level: u8) -> Option<AxisSpan> {
    let free = 32 - u32::from(level);
    let p_lo = u64::from(index) << free;
    let p_hi = (u64::from(index) + 1) << free;
    let lo = packed_to_units(p_lo)?;
    Some(AxisSpan {
        side,
        lo,
        hi: packed_upper_units(p_hi),
    })
}

/// Rectangle of a cell. Cells lying wholly in the padding are an error.
pub fn decode(cell: &CellCode) -> Result<CellBounds> {
    let (lon, lat) = if cell.level == 0 {
        let all = AxisSpan {
            side: Side::Both,
            lo: 0,
            hi: 256 * UNITS_PER_DEGREE,
        };
        (all, all)
    } else {
        let (lat_neg, lon_neg) = cell.quadrant();
        let (lat_idx, lon_idx) = cell.axis_indices();
        let side = |neg: bool| if neg { Side::Negative } else { Side::Positive };
        let padding = || Error::PaddingCell(cell.to_string());
        (
            axis_span(side(lon_neg), lon_idx, cell.level).ok_or_else(padding)?,
            axis_span(side(lat_neg), lat_idx, cell.level).ok_or_else(padding)?,
        )
    };
    let (lon_min, lon_max) = lon.degrees();
    let (lat_min, lat_max) = lat.degrees();
    Ok(CellBounds {
        level: cell.level,
        lon_min,
        lon_max,
        lat_min,
        lat_max,
        lon,
        lat,
    })
}

/// Nominal cell size at one level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellExtent {
    pub degrees: f64,
    pub meters: f64,
}

/// Nominal edge length of a level's cells in linear units.
pub(crate) fn extent_units(level: u8) -> u64 {
    let l = u32::from(level.min(MAX_LEVEL));
    match l {
        0..=9 => UNITS_PER_DEGREE << (9 - l),
        10..=15 => UNITS_PER_MINUTE << (15 - l),
        16..=21 => UNITS_PER_SECOND << (21 - l),
        _ => 1 << (32 - l),
    }
}

pub(crate) fn extent_degrees(level: u8) -> f64 {
    units_to_degrees(extent_units(level))
}

pub fn cell_extent(level: u8) -> Result<CellExtent> {
    if level > MAX_LEVEL {
        return Err(Error::domain(format!("level {level} exceeds {MAX_LEVEL}")));
    }
    let degrees = extent_degrees(level);
    Ok(CellExtent {
        degrees,
        meters: degrees * METERS_PER_DEGREE,
    })
}

/// Per-axis cell index of a magnitude given in linear units.
pub(crate) fn axis_index(units: u64, level: u8) -> u32 {
    units_to_packed(units) >> (32 - u32::from(level))
}
