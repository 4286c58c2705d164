//! Text file formats.
//!
//! * dataset: one point per line, reals separated by whitespace and/or commas;
//! * labels: one non-negative integer per line;
//! * CSV traces and tables.
//!
//! Lines starting with `#` are comments. Every file written here starts with
//! a comment header naming the tool, the format version and the resolved
//! configuration of the command that produced it.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const FORMAT_VERSION: u32 = 1;

/// Rows of reals, all of the same length.
pub struct Table {
    pub cols: usize,
    pub values: Vec<f64>,
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn content_lines(path: &Path) -> CliResult<impl Iterator<Item = CliResult<(usize, String)>> + '_> {
    let reader = open(path)?;
    Ok(reader
        .lines()
        .enumerate()
        .filter_map(move |(i, line)| match line {
            Err(e) => Some(Err(CliError::data(format!(
                "{}:{}: {e}",
                path.display(),
                i + 1
            )))),
            Ok(l) => {
                let t = l.trim();
                if t.is_empty() || t.starts_with('#') {
                    None
                } else {
                    Some(Ok((i + 1, t.to_string())))
                }
            }
        }))
}

pub fn read_table(path: &Path) -> CliResult<Table> {
    let mut values = Vec::new();
    let mut cols = 0;
    for item in content_lines(path)? {
        let (line, text) = item?;
        let start = values.len();
        for (col, field) in text
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .enumerate()
        {
            let v: f64 = field.parse().map_err(|_| {
                CliError::data(format!(
                    "{}: line {line}, column {}: cannot parse '{field}' as a number",
                    path.display(),
                    col + 1
                ))
            })?;
            if !v.is_finite() {
                return Err(CliError::data(format!(
                    "{}: line {line}, column {}: non-finite value '{field}'",
                    path.display(),
                    col + 1
                )));
            }
            values.push(v);
        }
        let n = values.len() - start;
        if cols == 0 {
            cols = n;
        } else if n != cols {
            return Err(CliError::data(format!(
                "{}: line {line}: expected {cols} values, found {n}",
                path.display()
            )));
        }
    }
    if values.is_empty() {
        return Err(CliError::data(format!("{}: no data rows", path.display())));
    }
    Ok(Table { cols, values })
}

pub fn read_dataset(path: &Path) -> CliResult<dirstat::Dataset> {
    let t = read_table(path)?;
    dirstat::Dataset::from_flat(t.cols, t.values)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

pub fn read_labels(path: &Path) -> CliResult<Vec<usize>> {
    let mut labels = Vec::new();
    for item in content_lines(path)? {
        let (line, text) = item?;
        let v: usize = text.parse().map_err(|_| {
            CliError::data(format!(
                "{}: line {line}: '{text}' is not a non-negative integer label",
                path.display()
            ))
        })?;
        labels.push(v);
    }
    if labels.is_empty() {
        return Err(CliError::data(format!("{}: no labels", path.display())));
    }
    Ok(labels)
}

/// Comment lines identifying the producer and its configuration.
pub fn header<C: Serialize>(command: &str, config: &C) -> String {
    let json = serde_json::to_string(config).expect("configs serialize");
    format!(
        "# dirstat {} format {FORMAT_VERSION}\n# command: {command}\n# config: {json}\n",
        env!("CARGO_PKG_VERSION")
    )
}

pub fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)
                .map_err(|e| CliError::data(format!("{}: {e}", dir.display())))?;
        }
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn write_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::data(format!("{}: {e}", path.display()))
}

/// Shortest decimal that parses back to `v`, switching to exponent form for
/// very small or large magnitudes.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        serde_json::to_string(&v).expect("finite floats serialize")
    } else {
        v.to_string()
    }
}

/// Writes `header` then one row per line, values in shortest round-trip form.
pub fn write_rows<'a>(
    path: &Path,
    header: &str,
    rows: impl Iterator<Item = &'a [f64]>,
) -> CliResult<()> {
    let mut w = create(path)?;
    let err = write_err(path);
    w.write_all(header.as_bytes()).map_err(&err)?;
    let mut line = String::new();
    for row in rows {
        line.clear();
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                line.push(' ');
            }
            line.push_str(&fmt_f64(*v));
        }
        line.push('\n');
        w.write_all(line.as_bytes()).map_err(&err)?;
    }
    w.flush().map_err(&err)
}

pub fn write_labels(path: &Path, header: &str, labels: &[usize]) -> CliResult<()> {
    let mut w = create(path)?;
    let err = write_err(path);
    w.write_all(header.as_bytes()).map_err(&err)?;
    for l in labels {
        writeln!(w, "{l}").map_err(&err)?;
    }
    w.flush().map_err(&err)
}

/// Header, a column line and CSV records.
pub fn write_csv(
    path: &Path,
    header: &str,
    columns: &[&str],
    records: &[Vec<String>],
) -> CliResult<()> {
    let mut w = create(path)?;
    let err = write_err(path);
    w.write_all(header.as_bytes()).map_err(&err)?;
    w.write_all(csv_body(columns, records).as_bytes())
        .map_err(&err)?;
    w.flush().map_err(&err)
}

pub fn csv_body(columns: &[&str], records: &[Vec<String>]) -> String {
    let mut s = columns.join(",");
    s.push('\n');
    for r in records {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut w = create(path)?;
    let err = write_err(path);
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    w.write_all(b"\n").map_err(&err)?;
    w.flush().map_err(&err)
}
