//! Plain-text measure files.
//!
//! Both layouts start with the header `n <n> <grid|torus>`. The sparse layout
//! follows with one `<a> <b> <mass>` line per atom (unlisted cells are zero);
//! the dense layout follows with `n` rows of `n` whitespace-separated values.

use std::io::Write;

use ndarray::Array2;

use super::{Domain, SignedMeasure, Topology};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureFormat {
    Sparse,
    Dense,
}

impl std::str::FromStr for MeasureFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sparse" => Ok(MeasureFormat::Sparse),
            "dense" => Ok(MeasureFormat::Dense),
            other => Err(Error::Config(format!("unknown measure format '{other}'"))),
        }
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parses a measure file. With `format == None` the layout is inferred: any
/// data line whose token count is not 3 means dense; otherwise the file is
/// sparse unless it is exactly `n == 3` rows of three values that do not all
/// read as in-range integer coordinates.
pub fn read_measure(text: &str, format: Option<MeasureFormat>) -> Result<SignedMeasure> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() != 3 || tokens[0] != "n" {
        return Err(parse_err(hline, "expected header `n <n> <grid|torus>`"));
    }
    let n: usize = tokens[1]
        .parse()
        .map_err(|_| parse_err(hline, format!("bad side length '{}'", tokens[1])))?;
    let topology: Topology = tokens[2]
        .parse()
        .map_err(|_| parse_err(hline, format!("bad topology '{}'", tokens[2])))?;
    let domain = Domain::new(n, topology)?;

    let rows: Vec<(usize, Vec<&str>)> = lines
        .map(|(i, l)| (i, l.split_whitespace().collect()))
        .collect();
    let format = format.unwrap_or_else(|| infer_format(n, &rows));
    match format {
        MeasureFormat::Sparse => parse_sparse(domain, &rows),
        MeasureFormat::Dense => parse_dense(domain, &rows),
    }
}

fn infer_format(n: usize, rows: &[(usize, Vec<&str>)]) -> MeasureFormat {
    if rows.iter().any(|(_, t)| t.len() != 3) {
        return MeasureFormat::Dense;
    }
    if n == 3 && rows.len() == 3 {
        let coords_ok = rows.iter().all(|(_, t)| {
            t[..2]
                .iter()
                .all(|s| s.parse::<usize>().map_or(false, |v| v < n))
        });
        if !coords_ok {
            return MeasureFormat::Dense;
        }
    }
    MeasureFormat::Sparse
}

fn parse_value(line: usize, s: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| parse_err(line, format!("bad number '{s}'")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite value '{s}'")));
    }
    Ok(v)
}

fn parse_sparse(domain: Domain, rows: &[(usize, Vec<&str>)]) -> Result<SignedMeasure> {
    let n = domain.n();
    let mut mass = Array2::zeros((n, n));
    for (line, t) in rows {
        if t.len() != 3 {
            return Err(parse_err(*line, "expected `<a> <b> <mass>`"));
        }
        let coord = |s: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| parse_err(*line, format!("bad coordinate '{s}'")))
        };
        let (a, b) = (coord(t[0])?, coord(t[1])?);
        if a >= n || b >= n {
            return Err(parse_err(*line, format!("cell ({a}, {b}) out of range")));
        }
        mass[[a, b]] += parse_value(*line, t[2])?;
    }
    SignedMeasure::from_dense(domain, mass)
}

fn parse_dense(domain: Domain, rows: &[(usize, Vec<&str>)]) -> Result<SignedMeasure> {
    let n = domain.n();
    if rows.len() != n {
        let line = rows.last().map_or(1, |r| r.0);
        return Err(parse_err(line, format!("expected {n} rows, found {}", rows.len())));
    }
    let mut mass = Array2::zeros((n, n));
    for (a, (line, t)) in rows.iter().enumerate() {
        if t.len() != n {
            return Err(parse_err(*line, format!("expected {n} values, found {}", t.len())));
        }
        for (b, s) in t.iter().enumerate() {
            mass[[a, b]] = parse_value(*line, s)?;
        }
    }
    SignedMeasure::from_dense(domain, mass)
}

fn write_header<W: Write>(out: &mut W, domain: Domain) -> std::io::Result<()> {
    writeln!(out, "n {} {}", domain.n(), domain.topology().as_str())
}

/// Writes the non-zero cells in row-major order.
pub fn write_sparse<W: Write>(measure: &SignedMeasure, out: &mut W) -> Result<()> {
    write_header(out, measure.domain())?;
    for ((a, b), m) in measure.support() {
        writeln!(out, "{a} {b} {m}")?;
    }
    Ok(())
}

pub fn write_dense<W: Write>(measure: &SignedMeasure, out: &mut W) -> Result<()> {
    write_header(out, measure.domain())?;
    for row in measure.values().rows() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}
