//! CSV artifacts. Floats are written in shortest round-trip form, so a
//! re-read reproduces every value bit for bit.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::ErrorSeries;

pub const SERIES_HEADER: &str = "t,l2_abs,l2_rel,h1_rel,energy_residual";
pub const SPECTRUM_HEADER: &str = "k,energy";

fn comment_lines<W: Write>(w: &mut W, metadata: &[(String, String)]) -> std::io::Result<()> {
    for (key, value) in metadata {
        writeln!(w, "# {key} = {}", value.replace('\n', " "))?;
    }
    Ok(())
}

pub fn write_series_to<W: Write>(mut w: W, series: &ErrorSeries) -> std::io::Result<()> {
    comment_lines(&mut w, &series.metadata)?;
    writeln!(w, "{SERIES_HEADER}")?;
    for i in 0..series.len() {
        writeln!(
            w,
            "{:e},{:e},{:e},{:e},{:e}",
            series.times[i],
            series.l2_abs[i],
            series.l2_rel[i],
            series.h1_rel[i],
            series.energy_residuals[i]
        )?;
    }
    w.flush()
}

pub fn write_series(series: &ErrorSeries, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_series_to(BufWriter::new(file), series).map_err(|e| Error::io(path, e))
}

/// Reads a series written by [`write_series`]; comment lines become metadata.
pub fn read_series(path: &Path) -> Result<ErrorSeries> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_series(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_series(text: &str) -> Result<ErrorSeries> {
    let metadata = text
        .lines()
        .filter_map(|l| l.strip_prefix("# "))
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    let mut series = ErrorSeries::new(metadata);
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::Config(format!("header: {e}")))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != SERIES_HEADER {
        return Err(Error::Config(format!(
            "header: expected `{SERIES_HEADER}`, got `{header}`"
        )));
    }
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Config(format!("row {}: {e}", row + 1)))?;
        let values = record
            .iter()
            .map(|field| field.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Config(format!("row {}: {e}", row + 1)))?;
        if values.len() != 5 {
            return Err(Error::Config(format!(
                "row {}: expected 5 columns, got {}",
                row + 1,
                values.len()
            )));
        }
        series.times.push(values[0]);
        series.l2_abs.push(values[1]);
        series.l2_rel.push(values[2]);
        series.h1_rel.push(values[3]);
        series.energy_residuals.push(values[4]);
    }
    Ok(series)
}

pub fn write_spectrum_to<W: Write>(
    mut w: W,
    spectrum: &[(usize, f64)],
    metadata: &[(String, String)],
) -> std::io::Result<()> {
    comment_lines(&mut w, metadata)?;
    writeln!(w, "{SPECTRUM_HEADER}")?;
    for (k, e) in spectrum {
        writeln!(w, "{k},{e:e}")?;
    }
    w.flush()
}

pub fn write_spectrum(
    spectrum: &[(usize, f64)],
    metadata: &[(String, String)],
    path: &Path,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_spectrum_to(BufWriter::new(file), spectrum, metadata).map_err(|e| Error::io(path, e))
}
