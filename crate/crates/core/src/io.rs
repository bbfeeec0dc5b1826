//! File formats.
//!
//! | data            | format |
//! |-----------------|--------|
//! | mixture         | JSON `{"dim": d, "components": [{"weight": w, "mu": [..], "kappa": k}, ..]}` |
//! | samples         | CSV, `d` numeric columns plus an optional trailing integer label column |
//! | distance matrix | CSV, full `n x n`, no header |
//! | fit metadata    | JSON `{"loglik": .., "bic": .., "iterations": .., "converged": ..}` |
//! | reduction trace | JSON lines, see [`crate::reduction::ReductionTrace::write_jsonl`] |
//!
//! CSV numbers are written with 17 significant digits; JSON numbers use the
//! shortest representation that round-trips exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::FitResult;
use crate::geometry::DistanceMatrix;
use crate::vmf::{SampleSet, VmfMixture, VmfParams, NORM_TOLERANCE};

/// Formats a float with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Serialize, Deserialize)]
struct ComponentRecord {
    weight: f64,
    mu: Vec<f64>,
    kappa: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MixtureRecord {
    dim: usize,
    components: Vec<ComponentRecord>,
}

pub fn mixture_from_json(text: &str) -> Result<VmfMixture> {
    let record: MixtureRecord = serde_json::from_str(text)?;
    if record.components.is_empty() {
        return Err(Error::Empty("mixture file has no components"));
    }
    let mut comps = Vec::with_capacity(record.components.len());
    let mut weights = Vec::with_capacity(record.components.len());
    for (i, c) in record.components.into_iter().enumerate() {
        if c.mu.len() != record.dim {
            return Err(Error::Parse(format!("component {i}: mu has {} entries, dim is {}", c.mu.len(), record.dim)));
        }
        comps.push(VmfParams::new(c.mu, c.kappa)?);
        weights.push(c.weight);
    }
    VmfMixture::new(comps, weights)
}

pub fn mixture_to_json(m: &VmfMixture) -> Result<String> {
    let record = MixtureRecord {
        dim: m.dim(),
        components: m
            .components()
            .iter()
            .zip(m.weights())
            .map(|(c, &w)| ComponentRecord { weight: w, mu: c.mu().to_vec(), kappa: c.kappa() })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&record)?;
    s.push('\n');
    Ok(s)
}

pub fn read_mixture(path: &Path) -> Result<VmfMixture> {
    mixture_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_mixture(path: &Path, m: &VmfMixture) -> Result<()> {
    std::fs::write(path, mixture_to_json(m)?)?;
    Ok(())
}

/// How to interpret the last column of a samples CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelColumn {
    /// Labels iff the last column is integer valued and the remaining
    /// columns of every row have unit norm.
    #[default]
    Auto,
    Present,
    Absent,
}

fn csv_reader<R: Read>(input: R, header: bool) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(header).trim(csv::Trim::All).from_reader(input)
}

fn parse_field(s: &str, row: usize, col: usize) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::Parse(format!("row {row}, column {col}: '{s}' is not a number")))
}

fn read_numeric_rows<R: Read>(input: R, header: bool) -> Result<(Option<Vec<String>>, Vec<Vec<f64>>)> {
    let mut reader = csv_reader(input, header);
    let names = if header {
        Some(reader.headers().map_err(csv_error)?.iter().map(str::to_string).collect())
    } else {
        None
    };
    let mut rows = Vec::new();
    for (r, rec) in reader.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let row = rec.iter().enumerate().map(|(c, s)| parse_field(s, r, c)).collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((names, rows))
}

fn csv_error(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

pub fn read_samples<R: Read>(input: R, header: bool, labels: LabelColumn) -> Result<SampleSet> {
    let (names, rows) = read_numeric_rows(input, header)?;
    let width = rows.first().map(Vec::len).ok_or(Error::Empty("samples file has no rows"))?;
    let labelled = match (labels, &names) {
        (LabelColumn::Present, _) => true,
        (LabelColumn::Absent, _) => false,
        (LabelColumn::Auto, Some(n)) => n.last().is_some_and(|s| s == "label"),
        (LabelColumn::Auto, None) => {
            width > 2
                && rows.iter().all(|r| {
                    let last = r[r.len() - 1];
                    let head_norm = r[..r.len() - 1].iter().map(|v| v * v).sum::<f64>().sqrt();
                    last >= 0.0 && last.fract() == 0.0 && (head_norm - 1.0).abs() <= NORM_TOLERANCE
                })
        }
    };
    let d = if labelled { width - 1 } else { width };
    let mut points = Vec::with_capacity(rows.len() * d);
    let mut label_values = Vec::with_capacity(if labelled { rows.len() } else { 0 });
    for (i, r) in rows.iter().enumerate() {
        if r.len() != width {
            return Err(Error::Parse(format!("row {i} has {} columns, expected {width}", r.len())));
        }
        points.extend_from_slice(&r[..d]);
        if labelled {
            let l = r[d];
            if !(l >= 0.0 && l.fract() == 0.0 && l <= u32::MAX as f64) {
                return Err(Error::Parse(format!("row {i}: label {l} is not a non-negative integer")));
            }
            label_values.push(l as usize);
        }
    }
    SampleSet::new(d, points, labelled.then_some(label_values))
}

pub fn write_samples<W: Write>(out: W, data: &SampleSet, header: bool) -> Result<()> {
    let mut w = BufWriter::new(out);
    if header {
        let mut names: Vec<String> = (0..data.dim()).map(|j| format!("x{j}")).collect();
        if data.labels().is_some() {
            names.push("label".into());
        }
        writeln!(w, "{}", names.join(","))?;
    }
    for (i, row) in data.rows().enumerate() {
        let mut fields: Vec<String> = row.iter().map(|&v| format_f64(v)).collect();
        if let Some(l) = data.labels() {
            fields.push(l[i].to_string());
        }
        writeln!(w, "{}", fields.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_distance_matrix<R: Read>(input: R) -> Result<DistanceMatrix> {
    let (_, rows) = read_numeric_rows(input, false)?;
    let n = rows.len();
    if n == 0 {
        return Err(Error::Empty("distance matrix file has no rows"));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::Parse(format!("row {i} has {} columns in a {n}-row matrix", r.len())));
    }
    DistanceMatrix::new(n, rows.concat())
}

pub fn write_distance_matrix<W: Write>(out: W, dm: &DistanceMatrix) -> Result<()> {
    write_rows(out, dm.as_slice(), dm.len().max(1), None)
}

/// Writes a row-major table of `width` columns with an optional header line.
pub fn write_rows<W: Write>(out: W, values: &[f64], width: usize, header: Option<&[&str]>) -> Result<()> {
    let mut w = BufWriter::new(out);
    if let Some(h) = header {
        writeln!(w, "{}", h.join(","))?;
    }
    for row in values.chunks(width) {
        let line: Vec<String> = row.iter().map(|&v| format_f64(v)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitMetadata {
    pub loglik: f64,
    pub bic: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl From<&FitResult> for FitMetadata {
    fn from(f: &FitResult) -> Self {
        Self { loglik: f.log_likelihood, bic: f.bic, iterations: f.iterations, converged: f.converged }
    }
}

pub fn write_fit_metadata(path: &Path, meta: &FitMetadata) -> Result<()> {
    let mut s = serde_json::to_string_pretty(meta)?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

pub fn open_read(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

pub fn create_write(path: &Path) -> Result<File> {
    Ok(File::create(path)?)
}
