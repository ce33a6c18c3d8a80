//! File formats.
//!
//! * Spectrum CSV: header `f_mod_hz,intensity`.
//! * Scan series CSV: header `scan_index,f_mod_hz,counts`, one row per scan and
//!   bin, with a JSON sidecar for everything else.
//! * Fitted curves CSV: header `f_mod_hz,data,model,residual`.
//!
//! Floats are written in shortest round-trip form, so files are byte-stable and
//! re-read to the same values.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use cptsim_core::spectrum::{ScanSeries, Spectrum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const SPECTRUM_HEADER: [&str; 2] = ["f_mod_hz", "intensity"];
pub const SCANS_HEADER: [&str; 3] = ["scan_index", "f_mod_hz", "counts"];
pub const FIT_CURVE_HEADER: [&str; 4] = ["f_mod_hz", "data", "model", "residual"];

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let row = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::io(path, source),
        other => CliError::Csv {
            path: path.into(),
            row,
            reason: format!("{other:?}"),
        },
    }
}

fn write_rows<W: Write>(w: W, path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> CliResult<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        out.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    out.flush().map_err(|e| CliError::io(path, e))
}

/// Reads a CSV with exactly the given header into rows of fields.
fn read_rows<R: Read>(r: R, path: &Path, header: &[&str]) -> CliResult<Vec<(u64, Vec<String>)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let found = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(CliError::Csv {
            path: path.into(),
            row: 1,
            reason: format!("expected header `{}`, found `{}`", header.join(","), found.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        rows.push((line, rec.iter().map(str::to_owned).collect()));
    }
    Ok(rows)
}

fn parse<T: std::str::FromStr>(path: &Path, row: u64, column: &str, s: &str) -> CliResult<T> {
    s.parse().map_err(|_| CliError::Csv {
        path: path.into(),
        row,
        reason: format!("cannot parse {column} value `{s}`"),
    })
}

pub fn write_spectrum<W: Write>(w: W, path: &Path, s: &Spectrum) -> CliResult<()> {
    let rows = s.points().map(|(f, y)| vec![f.to_string(), y.to_string()]);
    write_rows(w, path, &SPECTRUM_HEADER, rows)
}

pub fn read_spectrum<R: Read>(r: R, path: &Path) -> CliResult<Spectrum> {
    let mut f = Vec::new();
    let mut y = Vec::new();
    for (row, rec) in read_rows(r, path, &SPECTRUM_HEADER)? {
        f.push(parse(path, row, "f_mod_hz", &rec[0])?);
        y.push(parse(path, row, "intensity", &rec[1])?);
    }
    Spectrum::new(f, y).map_err(|e| CliError::Csv {
        path: path.into(),
        row: 0,
        reason: e.to_string(),
    })
}

pub fn write_scans<W: Write>(w: W, path: &Path, series: &ScanSeries) -> CliResult<()> {
    let rows = series.counts.iter().enumerate().flat_map(|(k, scan)| {
        series
            .grid
            .iter()
            .zip(scan)
            .map(move |(f, c)| vec![k.to_string(), f.to_string(), c.to_string()])
    });
    write_rows(w, path, &SCANS_HEADER, rows)
}

/// Reads counts back; `active` flags and seed come from the sidecar.
pub fn read_scans<R: Read>(r: R, path: &Path) -> CliResult<(Vec<f64>, Vec<Vec<u64>>)> {
    let mut grid: Vec<f64> = Vec::new();
    let mut counts: Vec<Vec<u64>> = Vec::new();
    for (row, rec) in read_rows(r, path, &SCANS_HEADER)? {
        let k: usize = parse(path, row, "scan_index", &rec[0])?;
        let f: f64 = parse(path, row, "f_mod_hz", &rec[1])?;
        let c: u64 = parse(path, row, "counts", &rec[2])?;
        if k == counts.len() {
            counts.push(Vec::new());
        } else if k + 1 != counts.len() {
            return Err(CliError::Csv {
                path: path.into(),
                row,
                reason: format!("scan_index {k} out of order"),
            });
        }
        let bin = counts[k].len();
        if k == 0 {
            grid.push(f);
        } else if grid.get(bin) != Some(&f) {
            return Err(CliError::Csv {
                path: path.into(),
                row,
                reason: "scan grid differs from scan 0".into(),
            });
        }
        counts[k].push(c);
    }
    if let Some(k) = counts.iter().position(|c| c.len() != grid.len()) {
        return Err(CliError::Csv {
            path: path.into(),
            row: 0,
            reason: format!("scan {k} has {} bins, expected {}", counts[k].len(), grid.len()),
        });
    }
    Ok((grid, counts))
}

pub fn write_fit_curve<W: Write>(w: W, path: &Path, s: &Spectrum, model: &[f64], residual: &[f64]) -> CliResult<()> {
    let rows = (0..s.len()).map(|k| {
        vec![
            s.f_mod[k].to_string(),
            s.intensity[k].to_string(),
            model[k].to_string(),
            residual[k].to_string(),
        ]
    });
    write_rows(w, path, &FIT_CURVE_HEADER, rows)
}

pub fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

pub fn open(path: &Path) -> CliResult<File> {
    File::open(path).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Json {
        path: path.into(),
        reason: e.to_string(),
    })?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    serde_json::from_reader(std::io::BufReader::new(open(path)?)).map_err(|e| CliError::Json {
        path: path.into(),
        reason: e.to_string(),
    })
}

pub fn spectrum_to_file(path: &Path, s: &Spectrum) -> CliResult<()> {
    write_spectrum(create(path)?, path, s)
}

pub fn spectrum_from_file(path: &Path) -> CliResult<Spectrum> {
    read_spectrum(open(path)?, path)
}

/// Resolves `p` against `base` unless it is already absolute.
pub fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}
