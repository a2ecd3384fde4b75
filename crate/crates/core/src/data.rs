//! Tabular input: a numeric block plus an ordered time column and a group
//! column, partitioned into time slices.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Group label used when a dataset is built without a group column.
pub const IMPLICIT_GROUP: &str = "all";

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    numeric: DMatrix<f64>,
    time_labels: Vec<String>,
    group_labels: Vec<String>,
    variable_names: Vec<String>,
    column_units: Vec<Option<String>>,
    levels: Vec<String>,
}

/// Rows of a [`Dataset`] sharing one time level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeSlice {
    pub level: String,
    pub row_indices: Vec<usize>,
}

impl TimeSlice {
    pub fn count(&self) -> usize {
        self.row_indices.len()
    }
}

impl Dataset {
    /// Validates and assembles a dataset.
    ///
    /// `group_labels = None` puts every row in a single implicit group.
    /// `level_order` overrides the inferred level order and must name every
    /// level present exactly once.
    pub fn new(
        numeric: DMatrix<f64>,
        time_labels: Vec<String>,
        group_labels: Option<Vec<String>>,
        variable_names: Vec<String>,
        level_order: Option<&[String]>,
    ) -> Result<Self> {
        let (n, p) = numeric.shape();
        if time_labels.len() != n {
            return Err(Error::Shape(format!(
                "{} time labels for {n} rows",
                time_labels.len()
            )));
        }
        let group_labels = group_labels.unwrap_or_else(|| vec![IMPLICIT_GROUP.to_owned(); n]);
        if group_labels.len() != n {
            return Err(Error::Shape(format!(
                "{} group labels for {n} rows",
                group_labels.len()
            )));
        }
        if variable_names.len() != p {
            return Err(Error::Shape(format!(
                "{} variable names for {p} columns",
                variable_names.len()
            )));
        }
        if p < 2 {
            return Err(Error::TooFewVariables(p));
        }
        for j in 0..p {
            for i in 0..n {
                if !numeric[(i, j)].is_finite() {
                    return Err(Error::NonFinite {
                        row: i + 1,
                        column: variable_names[j].clone(),
                    });
                }
            }
        }

        let levels = match level_order {
            Some(order) => explicit_order(&time_labels, order)?,
            None => infer_level_order(&time_labels),
        };
        if levels.len() < 2 {
            return Err(Error::Cardinality(levels.len()));
        }

        Ok(Dataset {
            numeric,
            time_labels,
            group_labels,
            variable_names,
            column_units: vec![None; p],
            levels,
        })
    }

    pub fn with_units(mut self, units: Vec<Option<String>>) -> Result<Self> {
        if units.len() != self.p() {
            return Err(Error::Shape(format!(
                "{} units for {} columns",
                units.len(),
                self.p()
            )));
        }
        self.column_units = units;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.numeric.nrows()
    }

    pub fn p(&self) -> usize {
        self.numeric.ncols()
    }

    pub fn numeric(&self) -> &DMatrix<f64> {
        &self.numeric
    }

    pub fn time_labels(&self) -> &[String] {
        &self.time_labels
    }

    pub fn group_labels(&self) -> &[String] {
        &self.group_labels
    }

    pub fn variable_names(&self) -> &[String] {
        &self.variable_names
    }

    pub fn column_units(&self) -> &[Option<String>] {
        &self.column_units
    }

    /// Time levels in their total order.
    pub fn levels(&self) -> &[String] {
        &self.levels
    }

    /// Distinct group labels in order of first appearance.
    pub fn groups(&self) -> Vec<String> {
        first_appearance(&self.group_labels)
    }

    /// Numeric rows selected by `rows`, in the given order.
    pub fn rows(&self, rows: &[usize]) -> DMatrix<f64> {
        self.numeric.select_rows(rows)
    }

    pub fn groups_of(&self, rows: &[usize]) -> Vec<String> {
        rows.iter().map(|&i| self.group_labels[i].clone()).collect()
    }
}

fn first_appearance(labels: &[String]) -> Vec<String> {
    let mut seen = HashMap::new();
    let mut out = Vec::new();
    for l in labels {
        if seen.insert(l.as_str(), ()).is_none() {
            out.push(l.clone());
        }
    }
    out
}

/// Natural ascending order when every label is an integer or every label is
/// an ISO date, otherwise order of first appearance.
pub fn infer_level_order(labels: &[String]) -> Vec<String> {
    let mut levels = first_appearance(labels);
    if levels.iter().all(|l| l.trim().parse::<i64>().is_ok()) {
        levels.sort_by_key(|l| l.trim().parse::<i64>().unwrap());
    } else if levels
        .iter()
        .all(|l| NaiveDate::parse_from_str(l.trim(), "%Y-%m-%d").is_ok())
    {
        levels.sort_by_key(|l| NaiveDate::parse_from_str(l.trim(), "%Y-%m-%d").unwrap());
    }
    levels
}

fn explicit_order(labels: &[String], order: &[String]) -> Result<Vec<String>> {
    let present = first_appearance(labels);
    let mut seen = HashMap::new();
    for l in order {
        if seen.insert(l.as_str(), ()).is_some() {
            return Err(Error::LevelOrder(format!("level `{l}` listed twice")));
        }
    }
    for l in order {
        if !present.contains(l) {
            return Err(Error::EmptyLevel(l.clone()));
        }
    }
    if let Some(missing) = present.iter().find(|l| !seen.contains_key(l.as_str())) {
        return Err(Error::LevelOrder(format!(
            "level `{missing}` present in the data but missing from the order"
        )));
    }
    Ok(order.to_vec())
}

/// Reads a CSV with a header row. Every column other than `time_var` and
/// `group_var` must be numeric. A header such as `AP [m/day]` declares the
/// variable `AP` with unit `m/day`.
pub fn ingest_csv(
    path: impl AsRef<Path>,
    time_var: &str,
    group_var: Option<&str>,
    level_order: Option<&[String]>,
) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, time_var, group_var, level_order)
}

/// Same as [`ingest_csv`] over any reader.
pub fn read_csv<R: Read>(
    reader: R,
    time_var: &str,
    group_var: Option<&str>,
    level_order: Option<&[String]>,
) -> Result<Dataset> {
    let t = read_table(reader, Some(time_var), group_var, true)?;
    Dataset::new(
        t.numeric,
        t.time_labels.unwrap_or_default(),
        t.group_labels,
        t.variable_names,
        level_order,
    )?
    .with_units(t.units)
}

/// A numeric block read without time slicing, such as an external
/// alignment target.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub numeric: DMatrix<f64>,
    /// One label per row; [`IMPLICIT_GROUP`] without a group column.
    pub groups: Vec<String>,
    pub variable_names: Vec<String>,
}

/// Reads a CSV as one block. `time_var` is dropped when present; the other
/// non-group columns must be numeric.
pub fn ingest_block(path: impl AsRef<Path>, time_var: &str, group_var: Option<&str>) -> Result<Block> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_block(file, time_var, group_var)
}

/// Same as [`ingest_block`] over any reader.
pub fn read_block<R: Read>(reader: R, time_var: &str, group_var: Option<&str>) -> Result<Block> {
    let t = read_table(reader, Some(time_var), group_var, false)?;
    let n = t.numeric.nrows();
    if t.numeric.ncols() < 2 {
        return Err(Error::TooFewVariables(t.numeric.ncols()));
    }
    Ok(Block {
        numeric: t.numeric,
        groups: t.group_labels.unwrap_or_else(|| vec![IMPLICIT_GROUP.to_owned(); n]),
        variable_names: t.variable_names,
    })
}

struct Table {
    numeric: DMatrix<f64>,
    time_labels: Option<Vec<String>>,
    group_labels: Option<Vec<String>>,
    variable_names: Vec<String>,
    units: Vec<Option<String>>,
}

fn read_table<R: Read>(
    reader: R,
    time_var: Option<&str>,
    group_var: Option<&str>,
    time_required: bool,
) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let bare: Vec<(String, Option<String>)> = headers.iter().map(|h| split_unit(h)).collect();

    let find = |name: &str| {
        bare.iter()
            .position(|(b, _)| b == name)
            .ok_or_else(|| Error::MissingColumn(name.to_owned()))
    };
    let time_col = match time_var {
        Some(t) if time_required => Some(find(t)?),
        Some(t) => find(t).ok(),
        None => None,
    };
    let group_col = group_var.map(find).transpose()?;
    let numeric_cols: Vec<usize> = (0..headers.len())
        .filter(|&j| Some(j) != time_col && Some(j) != group_col)
        .collect();

    let mut values = Vec::new();
    let mut time_labels = Vec::new();
    let mut group_labels = Vec::new();
    let mut n = 0;
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 1;
        n = row;
        if let Some(t) = time_col {
            time_labels.push(record[t].to_owned());
        }
        if let Some(g) = group_col {
            group_labels.push(record[g].to_owned());
        }
        for &j in &numeric_cols {
            let cell = &record[j];
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column: bare[j].0.clone(),
                value: cell.to_owned(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row,
                    column: bare[j].0.clone(),
                });
            }
            values.push(v);
        }
    }

    Ok(Table {
        numeric: DMatrix::from_row_slice(n, numeric_cols.len(), &values),
        time_labels: time_col.map(|_| time_labels),
        group_labels: group_col.map(|_| group_labels),
        variable_names: numeric_cols.iter().map(|&j| bare[j].0.clone()).collect(),
        units: numeric_cols.iter().map(|&j| bare[j].1.clone()).collect(),
    })
}

fn split_unit(header: &str) -> (String, Option<String>) {
    let h = header.trim();
    if let (Some(open), true) = (h.rfind('['), h.ends_with(']')) {
        let name = h[..open].trim();
        if !name.is_empty() {
            return (name.to_owned(), Some(h[open + 1..h.len() - 1].trim().to_owned()));
        }
    }
    (h.to_owned(), None)
}

/// Partitions the rows by time level, in level order. Within a slice rows
/// keep their original order.
pub fn slice_by_time(d: &Dataset) -> Result<Vec<TimeSlice>> {
    let index: HashMap<&str, usize> = d
        .levels
        .iter()
        .enumerate()
        .map(|(k, l)| (l.as_str(), k))
        .collect();
    let mut rows = vec![Vec::new(); d.levels.len()];
    for (i, t) in d.time_labels.iter().enumerate() {
        let k = index
            .get(t.as_str())
            .ok_or_else(|| Error::Internal(format!("row {i} has unordered level `{t}`")))?;
        rows[*k].push(i);
    }
    d.levels
        .iter()
        .zip(rows)
        .map(|(level, row_indices)| {
            if row_indices.is_empty() {
                Err(Error::EmptyLevel(level.clone()))
            } else {
                Ok(TimeSlice {
                    level: level.clone(),
                    row_indices,
                })
            }
        })
        .collect()
}
