//! Reads an incomplete dataset from CSV and summarizes its missingness
//! patterns: counts, empirical `p(r)`, empirical `p(y^{ob(r)} | r)` and the
//! `≤ₚ` lattice of the patterns that occur.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::pattern::{MissingnessPattern, PatternError, PatternSet};
use crate::space::ModelSpace;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: row has {got} fields, header has {expected}")]
    Ragged {
        line: u64,
        got: usize,
        expected: usize,
    },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("header has {got} columns but the model declares {expected} variables")]
    Columns { got: usize, expected: usize },
    #[error("line {line}, column {column:?}: value {value:?} is not in the declared domain")]
    OutOfDomain {
        line: u64,
        column: String,
        value: String,
    },
    #[error("the file has no data rows")]
    Empty,
    #[error(transparent)]
    Pattern(#[from] PatternError),
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub missing_marker: String,
    pub empty_is_missing: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            missing_marker: "NA".into(),
            empty_is_missing: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternSummary {
    pub pattern: MissingnessPattern,
    pub count: usize,
    pub frequency: f64,
    /// Observed values (in column order) with their frequency within the
    /// pattern, sorted by values.
    pub observed_frequencies: Vec<ObservedFrequency>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservedFrequency {
    pub values: Vec<String>,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestSummary {
    pub columns: Vec<String>,
    pub n_rows: usize,
    /// Patterns in canonical order: observed count descending, then string
    /// descending, so the all-ones pattern comes first.
    pub patterns: PatternSet,
    pub per_pattern: Vec<PatternSummary>,
    /// Covering pairs `(lower, upper)` as indices into `patterns`.
    pub lattice_edges: Vec<(usize, usize)>,
    /// The patterns form a chain under `≤ₚ`.
    pub monotone: bool,
}

impl IngestSummary {
    pub fn count(&self, r: &MissingnessPattern) -> Option<usize> {
        self.per_pattern.iter().find(|s| s.pattern == *r).map(|s| s.count)
    }

    pub fn empirical_pr(&self) -> Vec<(MissingnessPattern, f64)> {
        self.per_pattern.iter().map(|s| (s.pattern, s.frequency)).collect()
    }
}

pub fn ingest_csv(
    path: &Path,
    opts: &IngestOptions,
    space: Option<&ModelSpace>,
) -> Result<IngestSummary, IngestError> {
    let file = std::fs::File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ingest_reader(file, opts, space)
}

pub fn ingest_reader<R: Read>(
    reader: R,
    opts: &IngestOptions,
    space: Option<&ModelSpace>,
) -> Result<IngestSummary, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let columns: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
    if let Some(space) = space {
        if columns.len() != space.d() {
            return Err(IngestError::Columns {
                got: columns.len(),
                expected: space.d(),
            });
        }
    }

    let mut rows: BTreeMap<MissingnessPattern, BTreeMap<Vec<String>, usize>> = BTreeMap::new();
    let mut n_rows = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { pos, expected_len, len } => IngestError::Ragged {
                line: pos.as_ref().map_or(0, |p| p.line()),
                got: *len as usize,
                expected: *expected_len as usize,
            },
            _ => IngestError::Csv(e),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let mut bits = Vec::with_capacity(columns.len());
        let mut observed = Vec::new();
        for (c, cell) in rec.iter().enumerate() {
            let cell = cell.trim();
            let missing = cell == opts.missing_marker || (opts.empty_is_missing && cell.is_empty());
            bits.push(!missing);
            if missing {
                continue;
            }
            if let Some(space) = space {
                if space.domains()[c].code_of(cell).is_none() {
                    return Err(IngestError::OutOfDomain {
                        line,
                        column: columns[c].clone(),
                        value: cell.to_string(),
                    });
                }
            }
            observed.push(cell.to_string());
        }
        let r = MissingnessPattern::from_bits(&bits)?;
        *rows.entry(r).or_default().entry(observed).or_insert(0) += 1;
        n_rows += 1;
    }
    if n_rows == 0 {
        return Err(IngestError::Empty);
    }

    let mut order: Vec<MissingnessPattern> = rows.keys().copied().collect();
    order.sort_by(|a, b| {
        b.observed_count()
            .cmp(&a.observed_count())
            .then_with(|| b.to_string().cmp(&a.to_string()))
    });
    let patterns = PatternSet::new(order.clone())?;
    let per_pattern = patterns
        .iter()
        .map(|r| {
            let table = &rows[r];
            let count: usize = table.values().sum();
            PatternSummary {
                pattern: *r,
                count,
                frequency: count as f64 / n_rows as f64,
                observed_frequencies: table
                    .iter()
                    .map(|(k, &c)| ObservedFrequency {
                        values: k.clone(),
                        frequency: c as f64 / count as f64,
                    })
                    .collect(),
            }
        })
        .collect();
    Ok(IngestSummary {
        columns,
        n_rows,
        lattice_edges: patterns.lattice_edges(),
        monotone: patterns.is_chain(),
        patterns,
        per_pattern,
    })
}
