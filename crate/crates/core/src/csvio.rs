//! CSV formats for samples and evaluation results.
//!
//! Samples: header `x1,...,xd[,w]`, one row per point, unit weights when the
//! `w` column is absent. Results: header `z1,...,zd,value` for grid-aligned
//! values (`x1,...,xd,value` at sample or query points). Numbers are written
//! with 17 significant digits so every `f64` survives a round trip.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::domain::{Alignment, EvalResult, RectilinearGrid, Sample};
use crate::error::{Error, Result};

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            Error::Io(e.to_string())
        } else {
            Error::Parse(e.to_string())
        }
    }
}

/// Shortest of fixed or exponent notation carrying 17 significant digits,
/// trailing zeros trimmed.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.16e}");
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let s = format!("{:.*}", (16 - exp) as usize, x);
        trim_zeros(&s).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mant))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn parse_f64(field: &str, row: usize, col: usize) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("row {row}, column {}: not a number: {field:?}", col + 1)))
}

fn expect_prefixed(headers: &[String], prefix: char, count: usize) -> Result<()> {
    for (k, h) in headers.iter().take(count).enumerate() {
        if *h != format!("{prefix}{}", k + 1) {
            return Err(Error::Parse(format!(
                "column {} should be named {prefix}{}, found {h:?}",
                k + 1,
                k + 1
            )));
        }
    }
    Ok(())
}

pub fn read_sample<R: Read>(reader: R) -> Result<Sample> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let weighted = headers.last().is_some_and(|h| h == "w");
    let d = headers.len() - usize::from(weighted);
    if d == 0 {
        return Err(Error::Parse("sample CSV has no coordinate columns".into()));
    }
    expect_prefixed(&headers, 'x', d)?;
    let mut columns = vec![Vec::new(); d];
    let mut weights = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        for (k, col) in columns.iter_mut().enumerate() {
            col.push(parse_f64(&rec[k], r + 1, k)?);
        }
        weights.push(if weighted { parse_f64(&rec[d], r + 1, d)? } else { 1.0 });
    }
    Sample::from_columns(columns, weights)
}

pub fn write_sample<W: Write>(writer: W, sample: &Sample, with_weights: bool) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (1..=sample.dim()).map(|k| format!("x{k}")).collect();
    if with_weights {
        header.push("w".into());
    }
    wtr.write_record(&header)?;
    for i in 0..sample.len() {
        let mut row: Vec<String> = (0..sample.dim()).map(|k| format_f64(sample.coord(i, k))).collect();
        if with_weights {
            row.push(format_f64(sample.weights()[i]));
        }
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Values tagged with the coordinates they belong to, as read back from CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub headers: Vec<String>,
    pub coords: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

/// Writes `result` next to its coordinates: grid points for grid-aligned
/// values, otherwise the rows of `points`.
pub fn write_result<W: Write>(
    writer: W,
    result: &EvalResult,
    grid: Option<&RectilinearGrid>,
    points: Option<&[Vec<f64>]>,
) -> Result<()> {
    let (prefix, rows): (char, Vec<Vec<f64>>) = match (result.alignment, grid, points) {
        (Alignment::Grid, Some(g), _) => ('z', g.points()),
        (Alignment::Sample | Alignment::Queries, _, Some(p)) => ('x', p.to_vec()),
        _ => {
            return Err(Error::Precondition(format!(
                "no coordinates supplied for {:?}-aligned values",
                result.alignment
            )))
        }
    };
    if rows.len() != result.len() {
        return Err(Error::Shape {
            expected: rows.len(),
            got: result.len(),
        });
    }
    let d = rows.first().map_or(0, Vec::len);
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (1..=d).map(|k| format!("{prefix}{k}")).collect();
    header.push("value".into());
    wtr.write_record(&header)?;
    for (row, v) in rows.iter().zip(&result.values) {
        let mut rec: Vec<String> = row.iter().map(|&x| format_f64(x)).collect();
        rec.push(format_f64(*v));
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_result<R: Read>(reader: R) -> Result<ResultTable> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if headers.last().map(String::as_str) != Some("value") {
        return Err(Error::Parse("result CSV must end with a value column".into()));
    }
    let d = headers.len() - 1;
    let mut coords = Vec::new();
    let mut values = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        coords.push((0..d).map(|k| parse_f64(&rec[k], r + 1, k)).collect::<Result<Vec<_>>>()?);
        values.push(parse_f64(&rec[d], r + 1, d)?);
    }
    Ok(ResultTable {
        headers,
        coords,
        values,
    })
}

pub fn read_sample_file(path: impl AsRef<Path>) -> Result<Sample> {
    read_sample(BufReader::new(open(path.as_ref())?))
}

pub fn write_sample_file(path: impl AsRef<Path>, sample: &Sample, with_weights: bool) -> Result<()> {
    write_sample(BufWriter::new(create(path.as_ref())?), sample, with_weights)
}

pub fn read_result_file(path: impl AsRef<Path>) -> Result<ResultTable> {
    read_result(BufReader::new(open(path.as_ref())?))
}

pub fn write_result_file(
    path: impl AsRef<Path>,
    result: &EvalResult,
    grid: Option<&RectilinearGrid>,
    points: Option<&[Vec<f64>]>,
) -> Result<()> {
    write_result(BufWriter::new(create(path.as_ref())?), result, grid, points)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
