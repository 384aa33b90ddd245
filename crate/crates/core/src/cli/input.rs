//! CSV ingestion. The header selects the schema.

use std::path::Path;

use crate::error::{Error, Result};
use crate::estimation::{
    BinaryDataset, BinaryRow, QuantalDataset, QuantalGroup, RegressionDataset,
};
use crate::fisher::WeibullSample;
use crate::models::Input;

#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    /// `time,event`
    Survival(WeibullSample),
    /// `dose,n,events`
    Quantal(QuantalDataset),
    /// `u[,u2],y`
    Regression(RegressionDataset),
    /// `x1[,x2],y`
    Binary(BinaryDataset),
    /// `u[,u2]` with no response, for information designs.
    Design(Vec<Input>),
}

struct Rows {
    header: Vec<String>,
    /// `(line number, fields)`; line numbers count the header as line 1.
    rows: Vec<(u64, Vec<String>)>,
}

fn read_rows(path: &Path) -> Result<Rows> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(|h| h.to_ascii_lowercase())
        .collect();
    if header.iter().all(|h| h.is_empty()) {
        return Err(Error::Parse(format!("{}: file is empty or has no header", path.display())));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push((line, rec.iter().map(str::to_string).collect()));
    }
    if rows.is_empty() {
        return Err(Error::Parse(format!("{}: no data rows", path.display())));
    }
    Ok(Rows { header, rows })
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    if let csv::ErrorKind::Io(_) = e.kind() {
        return Error::Parse(format!("{}: {e}", path.display()));
    }
    let line = e.position().map(|p| p.line());
    match line {
        Some(l) => Error::Parse(format!("{}: line {l}: {e}", path.display())),
        None => Error::Parse(format!("{}: {e}", path.display())),
    }
}

fn number(path: &Path, line: u64, col: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| {
            Error::Parse(format!(
                "{}: line {line}: column `{col}` value `{v}` is not a finite number",
                path.display()
            ))
        })
}

fn count(path: &Path, line: u64, col: &str, v: &str) -> Result<u64> {
    v.parse::<u64>().map_err(|_| {
        Error::Parse(format!(
            "{}: line {line}: column `{col}` value `{v}` is not a nonnegative integer",
            path.display()
        ))
    })
}

fn flag(path: &Path, line: u64, col: &str, v: &str) -> Result<bool> {
    match v {
        "1" | "true" => Ok(true),
        "0" | "false" => Ok(false),
        _ => Err(Error::Parse(format!(
            "{}: line {line}: column `{col}` value `{v}` must be 0 or 1",
            path.display()
        ))),
    }
}

/// Reads a CSV whose header is one of the known schemas.
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let Rows { header, rows } = read_rows(path)?;
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    let p = path;
    let ds = match h.as_slice() {
        ["time", "event"] => {
            let mut times = Vec::with_capacity(rows.len());
            let mut events = Vec::with_capacity(rows.len());
            for (line, r) in &rows {
                times.push(number(p, *line, "time", &r[0])?);
                events.push(flag(p, *line, "event", &r[1])?);
            }
            Dataset::Survival(WeibullSample::new(times, events)?)
        }
        ["dose", "n", "events"] => {
            let groups = rows
                .iter()
                .map(|(line, r)| {
                    Ok(QuantalGroup {
                        dose: number(p, *line, "dose", &r[0])?,
                        n: count(p, *line, "n", &r[1])?,
                        events: count(p, *line, "events", &r[2])?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Dataset::Quantal(QuantalDataset::new(groups)?)
        }
        ["u", "y"] | ["u", "u2", "y"] => {
            let two = h.len() == 3;
            let points = rows
                .iter()
                .map(|(line, r)| {
                    let u = number(p, *line, "u", &r[0])?;
                    let x = if two {
                        Input::pair(u, number(p, *line, "u2", &r[1])?)
                    } else {
                        Input::scalar(u)
                    };
                    Ok((x, number(p, *line, "y", &r[r.len() - 1])?))
                })
                .collect::<Result<Vec<_>>>()?;
            Dataset::Regression(RegressionDataset::new(points)?)
        }
        ["x1", "y"] | ["x1", "x2", "y"] => {
            let two = h.len() == 3;
            let out = rows
                .iter()
                .map(|(line, r)| {
                    Ok(BinaryRow {
                        x1: number(p, *line, "x1", &r[0])?,
                        x2: if two {
                            Some(number(p, *line, "x2", &r[1])?)
                        } else {
                            None
                        },
                        y: flag(p, *line, "y", &r[r.len() - 1])?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Dataset::Binary(BinaryDataset::new(out)?)
        }
        ["u"] | ["u", "u2"] => {
            let two = h.len() == 2;
            let pts = rows
                .iter()
                .map(|(line, r)| {
                    let u = number(p, *line, "u", &r[0])?;
                    Ok(if two {
                        Input::pair(u, number(p, *line, "u2", &r[1])?)
                    } else {
                        Input::scalar(u)
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Dataset::Design(pts)
        }
        _ => {
            return Err(Error::Parse(format!(
                "{}: line 1: unrecognized header `{}`; expected one of: time,event | \
                 dose,n,events | u[,u2],y | x1[,x2],y | u[,u2]",
                path.display(),
                header.join(",")
            )))
        }
    };
    Ok(ds)
}

/// Comma-separated numbers, as given to `--theta` and similar flags.
pub fn parse_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::invalid(format!("{what}: `{v}` is not a finite number")))
        })
        .collect()
}
