//! Headerless numeric CSV with `#` comment lines.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{CliError, CliResult};

/// Reads a rectangular table of numbers. Blank lines and lines starting with `#` are skipped.
pub fn read_matrix(path: &Path) -> CliResult<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        match cols {
            None => cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(CliError::Data(format!(
                    "{}: record {} has {} fields, expected {c}",
                    path.display(),
                    line + 1,
                    record.len()
                )))
            }
            _ => {}
        }
        for field in record.iter() {
            let v: f64 = field.parse().map_err(|_| {
                CliError::Data(format!(
                    "{}: record {}: `{field}` is not a number",
                    path.display(),
                    line + 1
                ))
            })?;
            if !v.is_finite() {
                return Err(CliError::Data(format!(
                    "{}: record {}: non-finite value",
                    path.display(),
                    line + 1
                )));
            }
            values.push(v);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| CliError::Data(format!("{}: no data rows", path.display())))?;
    Ok(DMatrix::from_row_slice(rows, cols, &values))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::Data(format!("{}: {other:?}", path.display())),
    }
}

/// Picks response and covariate columns out of a data table.
pub fn split_columns(
    table: &DMatrix<f64>,
    response: &[usize],
    covariates: &[usize],
) -> CliResult<(DMatrix<f64>, DMatrix<f64>)> {
    let ncols = table.ncols();
    if let Some(c) = response.iter().chain(covariates).find(|&&c| c >= ncols) {
        return Err(CliError::Config(format!("column {c} out of range for {ncols} columns")));
    }
    if let Some(c) = response.iter().find(|c| covariates.contains(c)) {
        return Err(CliError::Config(format!(
            "column {c} is both a response and a covariate"
        )));
    }
    let response: Vec<usize> = if response.is_empty() {
        (0..ncols).filter(|c| !covariates.contains(c)).collect()
    } else {
        response.to_vec()
    };
    if response.is_empty() {
        return Err(CliError::Config("no response columns".into()));
    }
    Ok((table.select_columns(&response), table.select_columns(covariates)))
}

/// Provenance written as comment lines at the top of every output file.
#[derive(Clone, Debug)]
pub struct Provenance {
    pub command: &'static str,
    pub seed: u64,
    pub config_hash: String,
}

impl Provenance {
    fn write_to(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "# command: {}", self.command)?;
        writeln!(out, "# seed: {}", self.seed)?;
        writeln!(out, "# config_hash: {}", self.config_hash)
    }
}

/// Writes a comma-separated table: provenance comments, an optional header line, then rows.
pub fn write_table(
    path: &Path,
    prov: &Provenance,
    comments: &[String],
    header: Option<&[String]>,
    rows: &[Vec<String>],
) -> CliResult<()> {
    let io = |e| CliError::io(path, e);
    ensure_parent(path)?;
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    prov.write_to(&mut out).map_err(io)?;
    for c in comments {
        writeln!(out, "# {c}").map_err(io)?;
    }
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    if let Some(h) = header {
        w.write_record(h).map_err(|e| csv_error(path, e))?;
    }
    for r in rows {
        w.write_record(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(io)
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    ensure_parent(path)?;
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn ensure_parent(path: &Path) -> CliResult<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e)),
        _ => Ok(()),
    }
}

/// Shortest decimal that round-trips.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}
