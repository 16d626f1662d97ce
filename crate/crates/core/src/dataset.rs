//! Numerical datasets, discretization grids and elementary cells.
//!
//! A [`Dataset`] is an `n × k` matrix of finite reals. A [`DiscretizationGrid`]
//! partitions each attribute range into consecutive intervals
//! `[c_j, c_{j+1})`, the last one closed on the right so that the attribute
//! maximum is representable. Discretizing replaces each value by the 0-based
//! index of its interval; the distinct index vectors are the elementary cells
//! the miner starts from.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw numerical data: one row per object, one column per attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    attributes: Vec<String>,
    values: Vec<f64>,
    n_objects: usize,
    labels: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(
        attributes: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        let k = attributes.len();
        if k == 0 {
            return Err(Error::NoAttributes);
        }
        if rows.is_empty() {
            return Err(Error::EmptyInput("dataset".into()));
        }
        let mut values = Vec::with_capacity(rows.len() * k);
        for (row_idx, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(Error::RaggedRow {
                    row: row_idx,
                    found: row.len(),
                    expected: k,
                });
            }
            for (i, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonNumeric {
                        row: row_idx,
                        column: attributes[i].clone(),
                        value: v.to_string(),
                    });
                }
            }
            values.extend_from_slice(row);
        }
        if let Some(labels) = &labels {
            if labels.len() != rows.len() {
                return Err(Error::MissingLabels);
            }
        }
        Ok(Dataset {
            attributes,
            values,
            n_objects: rows.len(),
            labels,
        })
    }

    pub fn n_objects(&self) -> usize {
        self.n_objects
    }

    pub fn n_attributes(&self) -> usize {
        self.attributes.len()
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn row(&self, object: usize) -> &[f64] {
        let k = self.n_attributes();
        &self.values[object * k..(object + 1) * k]
    }

    pub fn value(&self, object: usize, attribute: usize) -> f64 {
        self.values[object * self.n_attributes() + attribute]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.n_attributes())
    }

    pub fn column(&self, attribute: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows().map(move |r| r[attribute])
    }

    /// `(min, max)` of an attribute.
    pub fn range(&self, attribute: usize) -> (f64, f64) {
        self.column(attribute)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Writes the numeric columns (and labels, if any, under `label_header`).
    pub fn write_csv(&self, path: &Path, label_header: Option<&str>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<&str> = self.attributes.iter().map(String::as_str).collect();
        let with_labels = match (label_header, &self.labels) {
            (Some(h), Some(_)) => {
                header.push(h);
                true
            }
            _ => false,
        };
        w.write_record(&header)?;
        for g in 0..self.n_objects {
            let mut rec: Vec<String> = self.row(g).iter().map(|v| v.to_string()).collect();
            if with_labels {
                rec.push(self.labels.as_ref().unwrap()[g].clone());
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Loads a headered CSV file. The column named `label_column`, if given, is
/// removed from the numeric attributes and kept as per-object labels.
pub fn load_csv(path: impl AsRef<Path>, label_column: Option<&str>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, label_column).map_err(|e| match e {
        Error::EmptyInput(_) => Error::EmptyInput(path.display().to_string()),
        other => other,
    })
}

pub fn read_csv<R: Read>(reader: R, label_column: Option<&str>) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::EmptyInput("csv input".into()));
    }
    let label_idx = match label_column {
        Some(name) => Some(
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingLabelColumn(name.to_owned()))?,
        ),
        None => None,
    };
    let attributes: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != label_idx)
        .map(|(_, h)| h.clone())
        .collect();
    if attributes.is_empty() {
        return Err(Error::NoAttributes);
    }

    let mut rows = Vec::new();
    let mut labels = label_idx.map(|_| Vec::new());
    for (row_idx, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() != header.len() {
            return Err(Error::RaggedRow {
                row: row_idx,
                found: record.len(),
                expected: header.len(),
            });
        }
        let mut row = Vec::with_capacity(attributes.len());
        for (i, field) in record.iter().enumerate() {
            if Some(i) == label_idx {
                labels.as_mut().unwrap().push(field.to_owned());
                continue;
            }
            let v: f64 = field
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::NonNumeric {
                    row: row_idx,
                    column: header[i].clone(),
                    value: field.to_owned(),
                })?;
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput("csv input".into()));
    }
    Dataset::new(attributes, rows, labels)
}

/// Number of intervals per attribute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BinsSpec {
    /// `round(sqrt(n))` intervals on every attribute.
    Sqrt,
    Uniform(usize),
    PerAttribute(Vec<usize>),
}

impl BinsSpec {
    pub fn resolve(&self, n_objects: usize, n_attributes: usize) -> Result<Vec<usize>> {
        let bins = match self {
            BinsSpec::Sqrt => vec![sqrt_count(n_objects); n_attributes],
            BinsSpec::Uniform(b) => vec![*b; n_attributes],
            BinsSpec::PerAttribute(v) => {
                if v.len() != n_attributes {
                    return Err(Error::BinsLengthMismatch {
                        expected: n_attributes,
                        found: v.len(),
                    });
                }
                v.clone()
            }
        };
        if let Some(attribute) = bins.iter().position(|&b| b == 0) {
            return Err(Error::NonPositiveBins { attribute });
        }
        Ok(bins)
    }
}

impl FromStr for BinsSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("sqrt") {
            return Ok(BinsSpec::Sqrt);
        }
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let counts = parts
            .iter()
            .map(|p| {
                p.parse::<usize>()
                    .map_err(|_| Error::Invalid(format!("invalid bin count '{p}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(attribute) = counts.iter().position(|&b| b == 0) {
            return Err(Error::NonPositiveBins { attribute });
        }
        Ok(if counts.len() == 1 {
            BinsSpec::Uniform(counts[0])
        } else {
            BinsSpec::PerAttribute(counts)
        })
    }
}

impl fmt::Display for BinsSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BinsSpec::Sqrt => f.write_str("sqrt"),
            BinsSpec::Uniform(b) => write!(f, "{b}"),
            BinsSpec::PerAttribute(v) => {
                let s: Vec<String> = v.iter().map(usize::to_string).collect();
                f.write_str(&s.join(","))
            }
        }
    }
}

/// `round(sqrt(n))`, at least 1.
pub fn sqrt_count(n: usize) -> usize {
    ((n as f64).sqrt().round() as usize).max(1)
}

/// Per-attribute cut points `c_0 < c_1 < … < c_l`.
///
/// A constant attribute is stored as the degenerate pair `[v, v]` (one
/// interval of zero width).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationGrid {
    cuts: Vec<Vec<f64>>,
}

impl DiscretizationGrid {
    pub fn new(cuts: Vec<Vec<f64>>) -> Result<Self> {
        if cuts.is_empty() {
            return Err(Error::NoAttributes);
        }
        for (i, c) in cuts.iter().enumerate() {
            if c.len() < 2 {
                return Err(Error::BadGridLine {
                    line: i + 1,
                    message: "need at least two cut points".into(),
                });
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::BadGridLine {
                    line: i + 1,
                    message: "cut points must be finite".into(),
                });
            }
            let degenerate = c.len() == 2 && c[0] == c[1];
            if !degenerate && c.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::NonMonotoneCuts { line: i + 1 });
            }
        }
        Ok(DiscretizationGrid { cuts })
    }

    pub fn n_attributes(&self) -> usize {
        self.cuts.len()
    }

    /// `|B_i|`, the number of intervals of attribute `i`.
    pub fn bins(&self, attribute: usize) -> usize {
        self.cuts[attribute].len() - 1
    }

    pub fn all_bins(&self) -> Vec<usize> {
        (0..self.n_attributes()).map(|i| self.bins(i)).collect()
    }

    pub fn cuts(&self, attribute: usize) -> &[f64] {
        &self.cuts[attribute]
    }

    /// Real endpoints `[lo, hi]` spanned by intervals `first..=last`.
    pub fn span(&self, attribute: usize, first: u32, last: u32) -> (f64, f64) {
        let c = &self.cuts[attribute];
        (c[first as usize], c[last as usize + 1])
    }

    /// Interval index of `v`, or `None` when `v` lies outside `[c_0, c_l]`.
    pub fn index_of(&self, attribute: usize, v: f64) -> Option<u32> {
        let c = &self.cuts[attribute];
        let (lo, hi) = (c[0], c[c.len() - 1]);
        if !(lo..=hi).contains(&v) {
            return None;
        }
        let j = c.partition_point(|&cut| cut <= v) - 1;
        Some(j.min(c.len() - 2) as u32)
    }

    /// Widens the outer endpoints so that every value of `data` is covered.
    pub fn extend_to(&mut self, data: &Dataset) -> Result<()> {
        if data.n_attributes() != self.n_attributes() {
            return Err(Error::AttributeCountMismatch {
                expected: data.n_attributes(),
                found: self.n_attributes(),
            });
        }
        for (i, c) in self.cuts.iter_mut().enumerate() {
            let (lo, hi) = data.range(i);
            let last = c.len() - 1;
            if lo < c[0] {
                c[0] = lo;
            }
            if hi > c[last] {
                c[last] = hi;
            }
        }
        Ok(())
    }

    /// One line per attribute, comma-separated cuts.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.cuts {
            let line: Vec<String> = c.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Equal-width grid over each attribute's observed range.
///
/// With `pad`, the endpoints are first snapped outward to integers
/// (`floor(min)`, `ceil(max)`). Constant attributes collapse to one interval.
pub fn equal_width_grid(data: &Dataset, bins: &BinsSpec, pad: bool) -> Result<DiscretizationGrid> {
    let counts = bins.resolve(data.n_objects(), data.n_attributes())?;
    let cuts = counts
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            let (mut lo, mut hi) = data.range(i);
            if pad {
                lo = lo.floor();
                hi = hi.ceil();
            }
            if hi <= lo {
                return vec![lo, lo];
            }
            let width = (hi - lo) / b as f64;
            let mut c: Vec<f64> = (0..b).map(|j| lo + j as f64 * width).collect();
            c.push(hi);
            c
        })
        .collect();
    DiscretizationGrid::new(cuts)
}

/// Parses a grid file: one line per attribute, strictly increasing reals.
/// Endpoints are widened to the data range when needed.
pub fn import_grid(path: impl AsRef<Path>, data: &Dataset) -> Result<DiscretizationGrid> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_grid(&text, data)
}

pub fn parse_grid(text: &str, data: &Dataset) -> Result<DiscretizationGrid> {
    let mut cuts = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let c = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::BadGridLine {
                        line: idx + 1,
                        message: format!("cannot parse '{}'", f.trim()),
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        if c.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::NonMonotoneCuts { line: idx + 1 });
        }
        cuts.push(c);
    }
    if cuts.len() != data.n_attributes() {
        return Err(Error::AttributeCountMismatch {
            expected: data.n_attributes(),
            found: cuts.len(),
        });
    }
    // a single cut is allowed as long as the data range turns it into an interval
    for (i, c) in cuts.iter_mut().enumerate() {
        if c.len() == 1 {
            let (lo, hi) = data.range(i);
            let v = c[0];
            *c = vec![v.min(lo), v.max(hi)];
        }
    }
    let mut grid = DiscretizationGrid::new(cuts)?;
    grid.extend_to(data)?;
    Ok(grid)
}

/// Data replaced by interval indices on a fixed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedDataset {
    grid: DiscretizationGrid,
    attributes: Vec<String>,
    cells: Vec<u32>,
    n_objects: usize,
}

impl DiscretizedDataset {
    pub fn grid(&self) -> &DiscretizationGrid {
        &self.grid
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn n_objects(&self) -> usize {
        self.n_objects
    }

    pub fn n_attributes(&self) -> usize {
        self.grid.n_attributes()
    }

    pub fn coords(&self, object: usize) -> &[u32] {
        let k = self.n_attributes();
        &self.cells[object * k..(object + 1) * k]
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.attributes)?;
        for g in 0..self.n_objects {
            w.write_record(self.coords(g).iter().map(u32::to_string))?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

pub fn discretize(data: &Dataset, grid: &DiscretizationGrid) -> Result<DiscretizedDataset> {
    if data.n_attributes() != grid.n_attributes() {
        return Err(Error::AttributeCountMismatch {
            expected: data.n_attributes(),
            found: grid.n_attributes(),
        });
    }
    let mut cells = Vec::with_capacity(data.n_objects() * data.n_attributes());
    for (g, row) in data.rows().enumerate() {
        for (i, &v) in row.iter().enumerate() {
            let j = grid.index_of(i, v).ok_or_else(|| {
                let c = grid.cuts(i);
                Error::OutOfGrid {
                    object: g,
                    attribute: i,
                    value: v,
                    lo: c[0],
                    hi: c[c.len() - 1],
                }
            })?;
            cells.push(j);
        }
    }
    Ok(DiscretizedDataset {
        grid: grid.clone(),
        attributes: data.attributes().to_vec(),
        cells,
        n_objects: data.n_objects(),
    })
}

/// A non-empty grid cell together with the objects that fall into it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementaryCell {
    pub coords: Vec<u32>,
    pub cover: Vec<usize>,
}

impl ElementaryCell {
    pub fn usage(&self) -> usize {
        self.cover.len()
    }
}

/// Distinct coordinate vectors in lexicographic order.
pub fn elementary_cells(d: &DiscretizedDataset) -> Vec<ElementaryCell> {
    let mut groups: BTreeMap<&[u32], Vec<usize>> = BTreeMap::new();
    for g in 0..d.n_objects() {
        groups.entry(d.coords(g)).or_default().push(g);
    }
    groups
        .into_iter()
        .map(|(coords, cover)| ElementaryCell {
            coords: coords.to_vec(),
            cover,
        })
        .collect()
}
