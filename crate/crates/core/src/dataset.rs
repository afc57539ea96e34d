//! Labeled collections of series and their JSON file format.
//!
//! ```text
//! {"dim": k, "meta": {"key": "value"}, "series": [{"label": "A", "points": [[x, ...], ...]}, ...]}
//! ```
//!
//! Floats are written in shortest round-trip form, so save followed by load
//! reproduces every value bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    series: Vec<TimeSeries>,
    dim: usize,
    meta: BTreeMap<String, String>,
}

impl Dataset {
    pub fn new(series: Vec<TimeSeries>, meta: BTreeMap<String, String>) -> Result<Self> {
        let first = series.first().ok_or_else(|| Error::Validation("dataset contains no series".into()))?;
        let dim = first.dim();
        let labeled = first.label().is_some();
        for (i, s) in series.iter().enumerate() {
            if s.dim() != dim {
                return Err(Error::Validation(format!("series {i} has dimensionality {}, expected {dim}", s.dim())));
            }
            if s.label().is_some() != labeled {
                return Err(Error::Validation(format!("series {i}: labels must be present on all series or on none")));
            }
        }
        Ok(Dataset { series, dim, meta })
    }

    pub fn from_series(series: Vec<TimeSeries>) -> Result<Self> {
        Self::new(series, BTreeMap::new())
    }

    pub fn series(&self) -> &[TimeSeries] {
        &self.series
    }

    pub fn get(&self, i: usize) -> Option<&TimeSeries> {
        self.series.get(i)
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn meta(&self) -> &BTreeMap<String, String> {
        &self.meta
    }

    pub fn is_labeled(&self) -> bool {
        self.series[0].label().is_some()
    }

    pub fn into_series(self) -> Vec<TimeSeries> {
        self.series
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Parse { line, column, message, .. } => Error::Parse { path: path.to_owned(), line, column, message },
            Error::Validation(msg) => Error::Validation(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|source| Error::Io { path: path.to_owned(), source })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DatasetFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: Default::default(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let mut series = Vec::with_capacity(file.series.len());
        for (i, rec) in file.series.into_iter().enumerate() {
            if let Some(p) = rec.points.iter().position(|p| p.len() != file.dim) {
                return Err(Error::Validation(format!(
                    "series {i}, point {p}: {} components, expected {}",
                    rec.points[p].len(),
                    file.dim
                )));
            }
            let s =
                TimeSeries::new(rec.points, rec.label).map_err(|e| Error::Validation(format!("series {i}: {e}")))?;
            series.push(s);
        }
        Dataset::new(series, file.meta)
    }

    pub fn to_json(&self) -> String {
        let file = DatasetFileRef {
            dim: self.dim,
            meta: &self.meta,
            series: self
                .series
                .iter()
                .map(|s| SeriesRecordRef { label: s.label(), points: s.points().collect() })
                .collect(),
        };
        // Serializing plain maps, strings and finite floats cannot fail.
        serde_json::to_string(&file).expect("dataset serialization")
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetFile {
    dim: usize,
    #[serde(default)]
    meta: BTreeMap<String, String>,
    series: Vec<SeriesRecord>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SeriesRecord {
    #[serde(default)]
    label: Option<String>,
    points: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct DatasetFileRef<'a> {
    dim: usize,
    meta: &'a BTreeMap<String, String>,
    series: Vec<SeriesRecordRef<'a>>,
}

#[derive(Serialize)]
struct SeriesRecordRef<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<&'a str>,
    points: Vec<&'a [f64]>,
}
