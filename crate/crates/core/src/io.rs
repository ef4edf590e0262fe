//! Headerless CSV formats for series and events.
//!
//! Series files hold one observation per line with comma-separated
//! components; event files hold one `0` or `1` per line. Line `i` is time
//! `t = i`. A single trailing newline is allowed, blank lines elsewhere are
//! parse errors.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::series::{EventSeries, TimeSeries};

fn lines<R: BufRead>(reader: R) -> Result<Vec<String>> {
    let mut out = reader.lines().collect::<std::io::Result<Vec<_>>>()?;
    while out.last().is_some_and(|l| l.trim().is_empty()) {
        out.pop();
    }
    Ok(out)
}

pub fn parse_series<R: BufRead>(reader: R) -> Result<TimeSeries> {
    let mut dim = None;
    let mut values = Vec::new();
    for (idx, line) in lines(reader)?.iter().enumerate() {
        let line_no = idx + 1;
        let mut count = 0;
        for field in line.split(',') {
            let field = field.trim();
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("cannot parse {field:?} as a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("non-finite value {field:?}"),
                });
            }
            values.push(v);
            count += 1;
        }
        match dim {
            None => dim = Some(count),
            Some(d) if d != count => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected {d} components, found {count}"),
                })
            }
            _ => {}
        }
    }
    let dim = dim.ok_or(Error::EmptySeries)?;
    TimeSeries::new(dim, values)
}

pub fn parse_events<R: BufRead>(reader: R) -> Result<EventSeries> {
    let marks = lines(reader)?
        .iter()
        .enumerate()
        .map(|(idx, line)| match line.trim() {
            "0" => Ok(0u8),
            "1" => Ok(1u8),
            other => Err(Error::Parse {
                line: idx + 1,
                message: format!("expected 0 or 1, found {other:?}"),
            }),
        })
        .collect::<Result<Vec<_>>>()?;
    EventSeries::from_marks(&marks)
}

pub fn read_series(path: &Path) -> Result<TimeSeries> {
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_series(BufReader::new(file))
}

pub fn read_events(path: &Path) -> Result<EventSeries> {
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_events(BufReader::new(file))
}

pub fn write_series<W: Write>(series: &TimeSeries, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    for row in series.rows() {
        let fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", fields.join(","))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_events<W: Write>(events: &EventSeries, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    for &m in events.marks() {
        writeln!(out, "{}", u8::from(m))?;
    }
    out.flush()?;
    Ok(())
}
