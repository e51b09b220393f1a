// SPDX-License-Identifier: MIT OR Apache-2.0

//! Wide-format series CSV input and output.
//!
//! The first column is a timestamp (ISO-8601 or an integer index) and is
//! only used for ordering; rows are treated as uniform unit steps. Every
//! other column is one series named by its header. Missing cells are
//! forward-filled from the previous observation of the same column; a
//! column that starts with missing cells is back-filled from its first
//! observation.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geo::{load_stations, StationMetadata};
use crate::series::TimeSeries;

const MISSING: [&str; 6] = ["", "na", "n/a", "nan", "null", "none"];

fn parse_cell(cell: &str, row: usize, column: &str) -> Result<Option<f64>> {
    let trimmed = cell.trim();
    if MISSING.contains(&trimmed.to_ascii_lowercase().as_str()) {
        return Ok(None);
    }
    match trimmed.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(Error::UnparseableCell { row, column: column.to_string(), value: cell.to_string() }),
    }
}

/// Fills gaps from the most recent prior value; leading gaps take the first
/// observed value.
pub fn forward_fill(column: &[Option<f64>], id: &str) -> Result<Vec<f64>> {
    let first = column.iter().flatten().next().copied().ok_or_else(|| Error::AllMissingColumn(id.to_string()))?;
    let mut last = first;
    Ok(column
        .iter()
        .map(|cell| {
            if let Some(v) = cell {
                last = *v;
            }
            last
        })
        .collect())
}

pub fn read_wide_csv<R: Read>(reader: R) -> Result<Vec<TimeSeries>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let ids: Vec<String> = r.headers()?.iter().skip(1).map(|s| s.trim().to_string()).collect();
    if ids.is_empty() {
        return Err(Error::IdMismatch("series CSV has no series columns".into()));
    }
    let mut seen = HashSet::new();
    if let Some(dup) = ids.iter().find(|id| !seen.insert(id.as_str())) {
        return Err(Error::IdMismatch(format!("duplicate series column `{dup}`")));
    }
    let mut columns: Vec<Vec<Option<f64>>> = vec![Vec::new(); ids.len()];
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        for (j, cell) in rec.iter().skip(1).enumerate() {
            columns[j].push(parse_cell(cell, row + 1, &ids[j])?);
        }
    }
    ids.into_iter()
        .zip(columns)
        .map(|(id, col)| {
            let values = forward_fill(&col, &id)?;
            TimeSeries::new(id, values)
        })
        .collect()
}

pub fn load_wide_csv(path: impl AsRef<Path>) -> Result<Vec<TimeSeries>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_wide_csv(std::io::BufReader::new(file))
}

/// Writes equal-length series as a wide CSV with an integer `t` column.
pub fn write_wide_csv<W: Write>(writer: W, series: &[TimeSeries]) -> Result<()> {
    let len = series.first().map_or(0, TimeSeries::len);
    if let Some(s) = series.iter().find(|s| s.len() != len) {
        return Err(Error::InvalidSeries {
            id: s.id().to_string(),
            reason: format!("length {} differs from {len}", s.len()),
        });
    }
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["t".to_string()];
    header.extend(series.iter().map(|s| s.id().to_string()));
    w.write_record(&header)?;
    for t in 0..len {
        let mut rec = vec![t.to_string()];
        rec.extend(series.iter().map(|s| format!("{:?}", s.values()[t])));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<series csv>", e))?;
    Ok(())
}

pub fn save_wide_csv(path: impl AsRef<Path>, series: &[TimeSeries]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_wide_csv(std::io::BufWriter::new(file), series)
}

/// Orders station metadata like `series`. A series without metadata is an
/// error; metadata without a series is reported as a warning.
pub fn match_stations(
    series: &[TimeSeries],
    stations: &[StationMetadata],
) -> Result<(Vec<StationMetadata>, Vec<String>)> {
    let mut matched = Vec::with_capacity(series.len());
    for s in series {
        let st = stations
            .iter()
            .find(|st| st.id() == s.id())
            .ok_or_else(|| Error::IdMismatch(format!("series `{}` has no station metadata", s.id())))?;
        matched.push(st.clone());
    }
    let warnings = stations
        .iter()
        .filter(|st| !series.iter().any(|s| s.id() == st.id()))
        .map(|st| format!("station `{}` has no series; ignored", st.id()))
        .collect();
    Ok((matched, warnings))
}

#[derive(Clone, Debug)]
pub struct Ingested {
    pub series: Vec<TimeSeries>,
    /// Station metadata in series order, when a metadata file was given.
    pub stations: Option<Vec<StationMetadata>>,
    pub warnings: Vec<String>,
}

pub fn ingest(series_path: impl AsRef<Path>, metadata_path: Option<&Path>) -> Result<Ingested> {
    let series = load_wide_csv(series_path)?;
    let (stations, warnings) = match metadata_path {
        Some(p) => {
            let (m, w) = match_stations(&series, &load_stations(p)?)?;
            (Some(m), w)
        }
        None => (None, Vec::new()),
    };
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(Ingested { series, stations, warnings })
}
