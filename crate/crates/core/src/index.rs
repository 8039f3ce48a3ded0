//! Prefix-ordered record index with cover-cell postings and a line-oriented
//! file format.
//!
//! Index file: one UTF-8 line per record, sorted by key,
//! `<pk>\t{"level":..,"center":"G..","covers":[..],"bbox":[w,s,e,n],"meta":{..},"path":".."}`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::ops::Bound;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{touching_cells, BBox, CoverSet, DEFAULT_COVERAGE_CAP};
use crate::geosot::{extent_degrees, CellCode, MAX_LEVEL};
use crate::key::CompositeKey;
use crate::pipeline::{adaptive_level_for_bbox, IngestMeta, RecordEntry};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordBody {
    level: u8,
    center: CellCode,
    covers: Vec<CellCode>,
    bbox: [f64; 4],
    meta: IngestMeta,
    path: String,
}

/// Records keyed by primary key text plus two cell maps: cover postings and
/// the coarse cells spanning each record's bounding box.
#[derive(Clone, Debug, Default)]
pub struct IndexStore {
    records: BTreeMap<String, RecordEntry>,
    postings: BTreeMap<CellCode, Vec<String>>,
    extents: BTreeMap<CellCode, Vec<String>>,
    coverage_cap: u64,
}

impl PartialEq for IndexStore {
    fn eq(&self, other: &Self) -> bool {
        self.records == other.records
    }
}

/// Every code sharing `cell` as prefix, in one ordered range.
fn descendant_range(cell: &CellCode) -> (Bound<CellCode>, Bound<CellCode>) {
    let mut last = *cell;
    while last.level() < MAX_LEVEL {
        last = last.children().expect("below max level")[3];
    }
    (Bound::Included(*cell), Bound::Included(last))
}

fn validate_prefix(prefix: &str) -> Result<()> {
    let spatial = prefix.split('|').next().unwrap_or("");
    let bytes = spatial.as_bytes();
    if bytes.first() != Some(&b'G') {
        return Err(Error::Parse {
            position: 0,
            message: "prefix must start with 'G'".into(),
        });
    }
    if let Some(i) = bytes
        .iter()
        .skip(1)
        .position(|b| !(b'0'..=b'3').contains(b))
    {
        return Err(Error::Parse {
            position: i + 1,
            message: "prefix digits must be quaternary".into(),
        });
    }
    if bytes.len() > 1 + MAX_LEVEL as usize {
        return Err(Error::Parse {
            position: 1 + MAX_LEVEL as usize,
            message: "prefix longer than a level-32 code".into(),
        });
    }
    if prefix.contains(['\t', '\n']) {
        return Err(Error::Parse {
            position: prefix.find(['\t', '\n']).unwrap_or(0),
            message: "prefix contains a control separator".into(),
        });
    }
    Ok(())
}

impl IndexStore {
    pub fn new() -> Self {
        IndexStore {
            coverage_cap: DEFAULT_COVERAGE_CAP,
            ..Default::default()
        }
    }

    pub fn with_coverage_cap(cap: u64) -> Self {
        IndexStore {
            coverage_cap: cap.max(1),
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, pk: &str) -> Option<&RecordEntry> {
        self.records.get(pk)
    }

    /// Records in key order.
    pub fn iter(&self) -> impl Iterator<Item = &RecordEntry> {
        self.records.values()
    }

    pub fn postings(&self, cell: &CellCode) -> &[String] {
        self.postings.get(cell).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn posting_count(&self) -> usize {
        self.postings.values().map(Vec::len).sum()
    }

    pub fn posting_cells(&self) -> impl Iterator<Item = &CellCode> {
        self.postings.keys()
    }

    fn cap(&self) -> u64 {
        if self.coverage_cap == 0 {
            DEFAULT_COVERAGE_CAP
        } else {
            self.coverage_cap
        }
    }

    /// Coarse cells touching the record bbox, at most a 3x3 block.
    fn extent_cells(&self, r: &RecordEntry) -> Result<Vec<CellCode>> {
        let side = r.bbox.width().max(r.bbox.height());
        let fit = (1..=MAX_LEVEL)
            .rev()
            .find(|&l| extent_degrees(l) >= side)
            .unwrap_or(1);
        let level = fit.min(r.level);
        if level == 0 {
            return Ok(vec![CellCode::ROOT]);
        }
        Ok(touching_cells(&r.bbox, level, self.cap())?.cells().to_vec())
    }

    pub fn insert(&mut self, r: RecordEntry) -> Result<()> {
        r.validate()?;
        let pk = r.pk_text();
        if self.records.contains_key(&pk) {
            return Err(Error::DuplicateKey(pk));
        }
        for cell in self.extent_cells(&r)? {
            self.extents.entry(cell).or_default().push(pk.clone());
        }
        for cell in r.covers.cells() {
            self.postings.entry(*cell).or_default().push(pk.clone());
        }
        self.records.insert(pk, r);
        Ok(())
    }

    /// Records whose key text starts with `prefix`, in key order.
    pub fn prefix_query(&self, prefix: &str) -> Result<Vec<&RecordEntry>> {
        validate_prefix(prefix)?;
        Ok(self
            .records
            .range::<str, _>((Bound::Included(prefix), Bound::Unbounded))
            .take_while(|(k, _)| k.starts_with(prefix))
            .map(|(_, r)| r)
            .collect())
    }

    /// Records whose bounding box meets `query` (closed test). Candidates
    /// come from grid cells at `level` (adaptive by area when `None`) and
    /// are refined against the exact boxes.
    pub fn bbox_query(&self, query: &BBox, level: Option<u8>) -> Result<Vec<&RecordEntry>> {
        let level = level.unwrap_or_else(|| adaptive_level_for_bbox(query));
        if !(1..=MAX_LEVEL).contains(&level) {
            return Err(Error::domain(format!("query level {level} outside 1..=32")));
        }
        let cells = touching_cells(query, level, self.cap())?;
        let mut hits: BTreeSet<&str> = BTreeSet::new();
        let mut ancestors: BTreeSet<CellCode> = BTreeSet::new();

        for cell in cells.cells() {
            let text = cell.to_string();
            hits.extend(
                self.records
                    .range::<str, _>((Bound::Included(text.as_str()), Bound::Unbounded))
                    .take_while(|(k, _)| k.starts_with(&text))
                    .map(|(k, _)| k.as_str()),
            );
            for map in [&self.postings, &self.extents] {
                for (_, pks) in map.range(descendant_range(cell)) {
                    hits.extend(pks.iter().map(String::as_str));
                }
            }
            ancestors.extend((0..cell.level()).map(|l| cell.truncate(l)));
        }
        for a in &ancestors {
            let head = format!("{a}|");
            hits.extend(
                self.records
                    .range::<str, _>((Bound::Included(head.as_str()), Bound::Unbounded))
                    .take_while(|(k, _)| k.starts_with(&head))
                    .map(|(k, _)| k.as_str()),
            );
            for map in [&self.postings, &self.extents] {
                if let Some(pks) = map.get(a) {
                    hits.extend(pks.iter().map(String::as_str));
                }
            }
        }
        Ok(hits
            .into_iter()
            .map(|pk| &self.records[pk])
            .filter(|r| r.bbox.intersects(query))
            .collect())
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<()> {
        let mut out = BufWriter::new(out);
        for (pk, r) in &self.records {
            let body = RecordBody {
                level: r.level,
                center: r.center,
                covers: r.covers.cells().to_vec(),
                bbox: r.bbox.to_array(),
                meta: r.meta.clone(),
                path: r.path.clone(),
            };
            let json = serde_json::to_string(&body).map_err(|e| Error::Record(e.to_string()))?;
            writeln!(out, "{pk}\t{json}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_to(File::create(path)?)
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<IndexStore> {
        let mut store = IndexStore::new();
        let mut previous: Option<String> = None;
        for (i, line) in input.lines().enumerate() {
            let line_no = i + 1;
            let line = line?;
            let fail = |message: String| Error::Load {
                line: line_no,
                message,
            };
            let (pk_text, json) = line
                .split_once('\t')
                .ok_or_else(|| fail("missing tab between key and body".into()))?;
            let pk: CompositeKey = pk_text.parse().map_err(|e: Error| fail(e.to_string()))?;
            if pk.to_string() != pk_text {
                return Err(fail(format!("key {pk_text:?} is not in canonical form")));
            }
            if let Some(prev) = &previous {
                if prev.as_str() >= pk_text {
                    return Err(fail(format!("key {pk_text} out of order or duplicated")));
                }
            }
            let body: RecordBody = serde_json::from_str(json).map_err(|e| fail(e.to_string()))?;
            let [w, s, e, n] = body.bbox;
            let record = RecordEntry {
                pk,
                level: body.level,
                center: body.center,
                covers: if body.covers.is_empty() {
                    CoverSet::empty(body.level)
                } else {
                    CoverSet::from_cells(body.level, body.covers)
                        .map_err(|e| fail(e.to_string()))?
                },
                bbox: BBox::new(w, s, e, n).map_err(|e| fail(e.to_string()))?,
                meta: body.meta,
                path: body.path,
            };
            store.insert(record).map_err(|e| fail(e.to_string()))?;
            previous = Some(pk_text.to_string());
        }
        Ok(store)
    }

    pub fn load(path: &Path) -> Result<IndexStore> {
        IndexStore::read_from(BufReader::new(File::open(path)?))
    }
}
