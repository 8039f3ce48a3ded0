//! Composite primary keys: `<cell>|<timestamp>|<type>`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geosot::CellCode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TypeCode {
    #[serde(rename = "RAS")]
    Raster,
    #[serde(rename = "VEC")]
    Vector,
    #[serde(rename = "TB")]
    Table,
    #[serde(rename = "DOC")]
    Document,
    #[serde(rename = "IMG")]
    Image,
    #[serde(rename = "AUD")]
    Audio,
    #[serde(rename = "VEO")]
    Video,
    #[serde(rename = "UNK")]
    Unknown,
}

impl TypeCode {
    pub const ALL: [TypeCode; 8] = [
        TypeCode::Raster,
        TypeCode::Vector,
        TypeCode::Table,
        TypeCode::Document,
        TypeCode::Image,
        TypeCode::Audio,
        TypeCode::Video,
        TypeCode::Unknown,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TypeCode::Raster => "RAS",
            TypeCode::Vector => "VEC",
            TypeCode::Table => "TB",
            TypeCode::Document => "DOC",
            TypeCode::Image => "IMG",
            TypeCode::Audio => "AUD",
            TypeCode::Video => "VEO",
            TypeCode::Unknown => "UNK",
        }
    }
}

impl fmt::Display for TypeCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TypeCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TypeCode::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::Key {
                segment: 2,
                message: format!("unknown type code {s:?}"),
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Granularity {
    Day,
    Minute,
}

/// Naive local date with optional `HHmm`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp {
    year: u16,
    month: u8,
    day: u8,
    time: Option<(u8, u8)>,
}

fn is_leap(year: u16) -> bool {
    (year.is_multiple_of(4) && !year.is_multiple_of(100)) || year.is_multiple_of(400)
}

fn days_in_month(year: u16, month: u8) -> u8 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap(year) => 29,
        _ => 28,
    }
}

fn ts_err(field: &'static str, message: impl Into<String>) -> Error {
    Error::Timestamp {
        field,
        message: message.into(),
    }
}

impl Timestamp {
    pub fn date(year: u16, month: u8, day: u8) -> Result<Self> {
        if year > 9999 {
            return Err(ts_err(
                "year",
                format!("{year} does not fit in four digits"),
            ));
        }
        if !(1..=12).contains(&month) {
            return Err(ts_err("month", format!("{month} outside 1..=12")));
        }
        if day == 0 || day > days_in_month(year, month) {
            return Err(ts_err(
                "day",
                format!("{year:04}-{month:02} has no day {day}"),
            ));
        }
        Ok(Timestamp {
            year,
            month,
            day,
            time: None,
        })
    }

    pub fn date_time(year: u16, month: u8, day: u8, hour: u8, minute: u8) -> Result<Self> {
        let mut ts = Timestamp::date(year, month, day)?;
        if hour > 23 {
            return Err(ts_err("hour", format!("{hour} outside 0..=23")));
        }
        if minute > 59 {
            return Err(ts_err("minute", format!("{minute} outside 0..=59")));
        }
        ts.time = Some((hour, minute));
        Ok(ts)
    }

    pub fn year(&self) -> u16 {
        self.year
    }

    pub fn month(&self) -> u8 {
        self.month
    }

    pub fn day(&self) -> u8 {
        self.day
    }

    pub fn hour(&self) -> Option<u8> {
        self.time.map(|t| t.0)
    }

    pub fn minute(&self) -> Option<u8> {
        self.time.map(|t| t.1)
    }

    pub fn granularity(&self) -> Granularity {
        match self.time {
            Some(_) => Granularity::Minute,
            None => Granularity::Day,
        }
    }

    /// Drops the time of day.
    pub fn to_day(self) -> Timestamp {
        Timestamp { time: None, ..self }
    }

    /// Floors the minute to a multiple of `step`; day timestamps are unchanged.
    pub fn floor_minutes(self, step: u8) -> Timestamp {
        let step = step.max(1);
        Timestamp {
            time: self.time.map(|(h, m)| (h, m - m % step)),
            ..self
        }
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}{:02}{:02}", self.year, self.month, self.day)?;
        if let Some((h, m)) = self.time {
            write!(f, "{h:02}{m:02}")?;
        }
        Ok(())
    }
}

impl FromStr for Timestamp {
    type Err = Error;

    /// Parses `YYYYMMDD` or `YYYYMMDDHHmm`.
    fn from_str(s: &str) -> Result<Self> {
        if s.len() != 8 && s.len() != 12 {
            return Err(ts_err(
                "length",
                format!("expected 8 or 12 digits, got {}", s.len()),
            ));
        }
        if let Some(pos) = s.bytes().position(|b| !b.is_ascii_digit()) {
            return Err(ts_err("digits", format!("non-digit at position {pos}")));
        }
        let num = |range: std::ops::Range<usize>| s[range].parse::<u16>().expect("ascii digits");
        let (year, month, day) = (num(0..4), num(4..6) as u8, num(6..8) as u8);
        if s.len() == 8 {
            Timestamp::date(year, month, day)
        } else {
            Timestamp::date_time(year, month, day, num(8..10) as u8, num(10..12) as u8)
        }
    }
}

pub fn format_timestamp(ts: &Timestamp) -> String {
    ts.to_string()
}

pub fn parse_timestamp(text: &str) -> Result<Timestamp> {
    text.parse()
}

/// `GeoID|Timestamp|TypeCode`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CompositeKey {
    pub cell: CellCode,
    pub ts: Timestamp,
    pub type_code: TypeCode,
}

impl CompositeKey {
    pub fn new(cell: CellCode, ts: Timestamp, type_code: TypeCode) -> Self {
        CompositeKey {
            cell,
            ts,
            type_code,
        }
    }
}

impl fmt::Display for CompositeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}|{}", self.cell, self.ts, self.type_code)
    }
}

impl FromStr for CompositeKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('|').collect();
        if parts.len() != 3 {
            return Err(Error::Key {
                segment: parts.len().min(3),
                message: format!("expected 3 '|'-separated segments, found {}", parts.len()),
            });
        }
        let cell = parts[0].parse::<CellCode>().map_err(|e| Error::Key {
            segment: 0,
            message: e.to_string(),
        })?;
        let ts = parts[1].parse::<Timestamp>().map_err(|e| Error::Key {
            segment: 1,
            message: e.to_string(),
        })?;
        let type_code = parts[2].parse::<TypeCode>()?;
        Ok(CompositeKey::new(cell, ts, type_code))
    }
}

pub fn build_pk(cell: CellCode, ts: Timestamp, type_code: TypeCode) -> String {
    CompositeKey::new(cell, ts, type_code).to_string()
}

pub fn parse_pk(text: &str) -> Result<CompositeKey> {
    text.parse()
}
