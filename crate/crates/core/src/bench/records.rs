//! Benchmark CSV rows: writer, reader and the `mean +- std` summary.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

pub const HEADER: [&str; 12] = [
    "method",
    "generator",
    "N",
    "d",
    "s",
    "tol",
    "seed",
    "rep",
    "ms",
    "objective",
    "iterations",
    "status",
];

pub const SUMMARY_HEADER: [&str; 13] = [
    "method",
    "generator",
    "N",
    "d",
    "s",
    "tol",
    "seed",
    "reps",
    "ms_mean",
    "ms_std",
    "objective",
    "iterations",
    "status",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Converged,
    MaxIters,
    Skipped,
    /// The solver returned an error.
    Failed,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Converged => "Converged",
            Self::MaxIters => "MaxIters",
            Self::Skipped => "Skipped",
            Self::Failed => "Failed",
        })
    }
}

impl FromStr for Status {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Converged" => Ok(Self::Converged),
            "MaxIters" => Ok(Self::MaxIters),
            "Skipped" => Ok(Self::Skipped),
            "Failed" => Ok(Self::Failed),
            _ => invalid(format!("unknown status '{s}'")),
        }
    }
}

/// One timed solve.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub method: String,
    pub generator: String,
    pub n_samples: usize,
    pub n_features: usize,
    pub components: usize,
    pub tol: f64,
    pub seed: u64,
    pub rep: usize,
    pub ms: f64,
    /// Absent for skipped and failed runs.
    pub objective: Option<f64>,
    pub iterations: usize,
    pub status: Status,
}

impl BenchRecord {
    fn fields(&self) -> [String; 12] {
        [
            self.method.clone(),
            self.generator.clone(),
            self.n_samples.to_string(),
            self.n_features.to_string(),
            self.components.to_string(),
            format!("{:e}", self.tol),
            self.seed.to_string(),
            self.rep.to_string(),
            format!("{:.3}", self.ms),
            self.objective.map_or_else(String::new, |v| format!("{v:.17e}")),
            self.iterations.to_string(),
            self.status.to_string(),
        ]
    }

    /// Everything except the timing column.
    pub fn without_timing(&self) -> Self {
        Self { ms: 0.0, ..self.clone() }
    }
}

/// Writes the header, then one flushed line per [`RecordWriter::write`].
pub struct RecordWriter<W: Write> {
    inner: W,
}

fn to_line(fields: &[String]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(fields).map_err(|e| Error::Io(e.to_string()))?;
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

impl<W: Write> RecordWriter<W> {
    pub fn new(mut inner: W) -> Result<Self> {
        let header: Vec<String> = HEADER.iter().map(|s| s.to_string()).collect();
        inner.write_all(&to_line(&header)?)?;
        inner.flush()?;
        Ok(Self { inner })
    }

    /// Appends a whole row with a single write.
    pub fn write(&mut self, record: &BenchRecord) -> Result<()> {
        self.inner.write_all(&to_line(&record.fields())?)?;
        self.inner.flush()?;
        Ok(())
    }
}

fn field<T: FromStr>(raw: &str, line: usize, column: usize, name: &str) -> Result<T> {
    raw.parse().map_err(|_| Error::Parse {
        line,
        column,
        message: format!("bad {name} '{raw}'"),
    })
}

/// Reads and validates a benchmark CSV (header included).
pub fn read_records<R: Read>(input: R) -> Result<Vec<BenchRecord>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let mut out = Vec::new();
    let mut saw_header = false;
    for (idx, row) in reader.records().enumerate() {
        let line = idx + 1;
        let row = row.map_err(|e| Error::Parse {
            line,
            column: 1,
            message: e.to_string(),
        })?;
        if row.len() != HEADER.len() {
            return Err(Error::Parse {
                line,
                column: 1,
                message: format!("expected {} columns, found {}", HEADER.len(), row.len()),
            });
        }
        if idx == 0 {
            if row.iter().ne(HEADER.iter().copied()) {
                return Err(Error::Parse {
                    line,
                    column: 1,
                    message: format!("header must be {}", HEADER.join(",")),
                });
            }
            saw_header = true;
            continue;
        }
        let status: Status = field(&row[11], line, 12, "status")?;
        let objective = match &row[9] {
            "" => None,
            raw => Some(field::<f64>(raw, line, 10, "objective")?),
        };
        if status == Status::Skipped && objective.is_some() {
            return Err(Error::Parse {
                line,
                column: 10,
                message: "skipped row carries an objective".into(),
            });
        }
        out.push(BenchRecord {
            method: row[0].to_string(),
            generator: row[1].to_string(),
            n_samples: field(&row[2], line, 3, "N")?,
            n_features: field(&row[3], line, 4, "d")?,
            components: field(&row[4], line, 5, "s")?,
            tol: field(&row[5], line, 6, "tol")?,
            seed: field(&row[6], line, 7, "seed")?,
            rep: field(&row[7], line, 8, "rep")?,
            ms: field(&row[8], line, 9, "ms")?,
            objective,
            iterations: field(&row[10], line, 11, "iterations")?,
            status,
        });
    }
    if !saw_header {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "empty file".into(),
        });
    }
    Ok(out)
}

/// Aggregate over the repetitions of one (method, problem) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: String,
    pub generator: String,
    pub n_samples: usize,
    pub n_features: usize,
    pub components: usize,
    pub tol: f64,
    pub seed: u64,
    pub reps: usize,
    /// Over timed (non-skipped, non-failed) repetitions; `None` if there are none.
    pub ms_mean: Option<f64>,
    pub ms_std: Option<f64>,
    pub objective: Option<f64>,
    pub iterations: usize,
    /// Worst status among the repetitions.
    pub status: Status,
}

/// Groups records by method and problem, in first-seen order.
pub fn summarize(records: &[BenchRecord]) -> Vec<SummaryRow> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, Vec<&BenchRecord>> = BTreeMap::new();
    for r in records {
        let key = format!(
            "{}\u{0}{}\u{0}{}\u{0}{}\u{0}{}\u{0}{:e}\u{0}{}",
            r.method, r.generator, r.n_samples, r.n_features, r.components, r.tol, r.seed
        );
        groups
            .entry(key.clone())
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(r);
    }
    order
        .iter()
        .map(|key| {
            let rows = &groups[key];
            let first = rows[0];
            let timed: Vec<f64> = rows
                .iter()
                .filter(|r| matches!(r.status, Status::Converged | Status::MaxIters))
                .map(|r| r.ms)
                .collect();
            let (mean, std) = if timed.is_empty() {
                (None, None)
            } else {
                let m = timed.iter().sum::<f64>() / timed.len() as f64;
                let var = timed.iter().map(|t| (t - m) * (t - m)).sum::<f64>() / timed.len() as f64;
                (Some(m), Some(var.sqrt()))
            };
            let last_done = rows.iter().rev().find(|r| r.objective.is_some());
            SummaryRow {
                method: first.method.clone(),
                generator: first.generator.clone(),
                n_samples: first.n_samples,
                n_features: first.n_features,
                components: first.components,
                tol: first.tol,
                seed: first.seed,
                reps: rows.len(),
                ms_mean: mean,
                ms_std: std,
                objective: last_done.and_then(|r| r.objective),
                iterations: last_done.map_or(0, |r| r.iterations),
                status: rows.iter().map(|r| r.status).max().unwrap_or(Status::Skipped),
            }
        })
        .collect()
}

pub fn write_summary<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER).map_err(io)?;
    let opt = |v: Option<f64>, prec: usize| v.map_or_else(String::new, |x| format!("{x:.prec$}"));
    for r in rows {
        w.write_record([
            r.method.clone(),
            r.generator.clone(),
            r.n_samples.to_string(),
            r.n_features.to_string(),
            r.components.to_string(),
            format!("{:e}", r.tol),
            r.seed.to_string(),
            r.reps.to_string(),
            opt(r.ms_mean, 3),
            opt(r.ms_std, 3),
            r.objective.map_or_else(String::new, |v| format!("{v:.17e}")),
            r.iterations.to_string(),
            r.status.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
