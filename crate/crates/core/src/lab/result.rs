//! Tabular experiment output and its CSV form.
//!
//! CSV layout: `experiment,cell,seed,<columns...>`, one record per
//! (cell, seed) in insertion order. Floats are written in shortest
//! round-trip form so a written file parses back to an identical result.

use std::io::{Read, Write};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub cell: String,
    pub seed: u64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnSummary {
    pub cell: String,
    pub column: String,
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation; zero for a single observation.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    /// Distinct seeds in order of first appearance.
    pub seeds_used: Vec<u64>,
}

const FIXED_COLUMNS: [&str; 3] = ["experiment", "cell", "seed"];

impl ExperimentResult {
    pub fn new<S: Into<String>>(name: impl Into<String>, columns: impl IntoIterator<Item = S>) -> Self {
        ExperimentResult {
            name: name.into(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            seeds_used: Vec::new(),
        }
    }

    pub fn push(&mut self, cell: impl Into<String>, seed: u64, values: Vec<f64>) -> Result<()> {
        if values.len() != self.columns.len() {
            return Err(Error::invalid(format!(
                "row has {} values for {} columns",
                values.len(),
                self.columns.len()
            )));
        }
        if !self.seeds_used.contains(&seed) {
            self.seeds_used.push(seed);
        }
        self.rows.push(Row {
            cell: cell.into(),
            seed,
            values,
        });
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Distinct cells in order of first appearance.
    pub fn cells(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.cell.as_str()) {
                out.push(&r.cell);
            }
        }
        out
    }

    pub fn values(&self, cell: &str, column: &str) -> Option<Vec<f64>> {
        let c = self.column(column)?;
        let v: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.cell == cell)
            .map(|r| r.values[c])
            .collect();
        (!v.is_empty()).then_some(v)
    }

    pub fn mean(&self, cell: &str, column: &str) -> Option<f64> {
        self.values(cell, column).map(|v| mean_std(&v).0)
    }

    pub fn summary(&self) -> Vec<ColumnSummary> {
        let mut out = Vec::new();
        for cell in self.cells() {
            for column in &self.columns {
                let v = self.values(cell, column).expect("cell and column exist");
                let (mean, std) = mean_std(&v);
                out.push(ColumnSummary {
                    cell: cell.to_string(),
                    column: column.clone(),
                    n: v.len(),
                    mean,
                    std,
                });
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(FIXED_COLUMNS.iter().copied().chain(self.columns.iter().map(String::as_str)))?;
        for r in &self.rows {
            let mut record = vec![self.name.clone(), r.cell.clone(), r.seed.to_string()];
            record.extend(r.values.iter().map(f64::to_string));
            w.write_record(&record)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Parses what [`write_csv`](Self::write_csv) wrote. A file without data
    /// rows yields an empty name.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        if headers.len() < FIXED_COLUMNS.len()
            || headers.iter().zip(FIXED_COLUMNS).any(|(h, f)| h != f)
        {
            return Err(Error::invalid(format!(
                "csv header must start with {}",
                FIXED_COLUMNS.join(",")
            )));
        }
        let mut result = ExperimentResult::new(String::new(), headers.iter().skip(FIXED_COLUMNS.len()));
        for (i, record) in r.records().enumerate() {
            let record = record?;
            let line = i + 2;
            let bad = |what: &str| Error::Parse {
                line,
                message: format!("bad {what}"),
            };
            if i == 0 {
                result.name = record[0].to_string();
            } else if record[0] != result.name {
                return Err(bad("experiment name"));
            }
            let seed = record[2].parse().map_err(|_| bad("seed"))?;
            let values = record
                .iter()
                .skip(FIXED_COLUMNS.len())
                .map(|v| v.parse::<f64>().map_err(|_| bad("number")))
                .collect::<Result<Vec<_>>>()?;
            result.push(&record[1], seed, values)?;
        }
        Ok(result)
    }
}

pub(crate) fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let std = if v.len() > 1 {
        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}
