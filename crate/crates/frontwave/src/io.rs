//! Artifact files. Reals are written with 17 significant digits so that
//! re-reading is lossless.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use frontwave_core::front::{front_derivatives, front_residual};
use frontwave_core::{StripGrid, TemperatureField, TravelingWave};

use crate::error::CliError;

pub const FRONT: &str = "front.csv";
pub const TRACE: &str = "trace.csv";
pub const FIELD_DAT: &str = "field.dat";
pub const FIELD_CSV: &str = "field.csv";
pub const MANIFEST: &str = "manifest.json";
pub const DIAGNOSTICS: &str = "diagnostics.json";

pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>, CliError> {
    csv::Writer::from_path(path).map_err(|e| CliError::format(path, e.to_string()))
}

fn write_rows(
    path: &Path,
    header: &[&str],
    rows: impl Iterator<Item = Vec<f64>>,
) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    let fail = |e: csv::Error| CliError::format(path, e.to_string());
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(row.into_iter().map(real)).map_err(fail)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// `y, psi, psi_y, H, residual`.
pub fn write_front(path: &Path, wave: &TravelingWave) -> Result<(), CliError> {
    let (slope, _) = front_derivatives(&wave.psi);
    let residual = front_residual(&wave.psi, wave.c, &wave.forcing)?;
    let psi = wave.psi.values();
    let h = wave.forcing.values();
    let ny = psi.len();
    write_rows(
        path,
        &["y", "psi", "psi_y", "H", "residual"],
        (0..ny).map(|j| vec![j as f64 / ny as f64, psi[j], slope[j], h[j], residual[j]]),
    )
}

/// `y, theta, K(theta)` with the law the wave solves.
pub fn write_trace(path: &Path, wave: &TravelingWave) -> Result<(), CliError> {
    let ny = wave.theta.len();
    let rows = wave
        .theta
        .iter()
        .enumerate()
        .map(|(j, t)| {
            Ok(vec![
                j as f64 / ny as f64,
                *t,
                wave.kinetics.eval(t.max(0.0))?,
            ])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    write_rows(path, &["y", "theta", "K(theta)"], rows.into_iter())
}

/// Heatmap grid: header `Nx Ny L`, then `N_x + 1` rows of `N_y` values,
/// row `i = 0` (far field) first.
pub fn write_field_dat(path: &Path, field: &TemperatureField) -> Result<(), CliError> {
    let g = field.grid();
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| CliError::io(path, e);
    writeln!(w, "{} {} {}", g.nx, g.ny, g.length).map_err(io)?;
    for i in 0..=g.nx {
        let line: Vec<String> = field.row(i).iter().map(|v| real(*v)).collect();
        writeln!(w, "{}", line.join(" ")).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Long format `X, y, v` of the mapped field.
pub fn write_field_csv(path: &Path, field: &TemperatureField) -> Result<(), CliError> {
    let g = *field.grid();
    write_rows(
        path,
        &["X", "y", "v"],
        (0..=g.nx).flat_map(move |i| (0..g.ny).map(move |j| vec![g.x(i), g.y(j), field.at(i, j)])),
    )
}

pub fn read_field_dat(path: &Path, c: f64) -> Result<TemperatureField, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::format(path, "empty file"))?
        .map_err(|e| CliError::io(path, e))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    let bad_header =
        || CliError::format(path, format!("expected header `Nx Ny L`, found `{header}`"));
    if h.len() != 3 {
        return Err(bad_header());
    }
    let nx: usize = h[0].parse().map_err(|_| bad_header())?;
    let ny: usize = h[1].parse().map_err(|_| bad_header())?;
    let l: f64 = h[2].parse().map_err(|_| bad_header())?;
    let grid = StripGrid::new(nx, ny, l).map_err(|e| CliError::format(path, e.to_string()))?;
    let mut values = Vec::with_capacity((nx + 1) * ny);
    for (k, line) in lines.enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let before = values.len();
        for tok in line.split_whitespace() {
            values.push(tok.parse::<f64>().map_err(|_| {
                CliError::format(path, format!("line {}: bad number `{tok}`", k + 2))
            })?);
        }
        if values.len() - before != ny {
            return Err(CliError::format(
                path,
                format!("line {}: expected {ny} values", k + 2),
            ));
        }
    }
    TemperatureField::from_values(grid, c, values)
        .map_err(|e| CliError::format(path, e.to_string()))
}

/// Reads the named columns of a CSV file written by this module.
pub fn read_columns(path: &Path, names: &[&str]) -> Result<Vec<Vec<f64>>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::format(path, format!("{other:?}")),
    })?;
    let headers = r
        .headers()
        .map_err(|e| CliError::format(path, e.to_string()))?
        .clone();
    let index = names
        .iter()
        .map(|n| {
            headers
                .iter()
                .position(|h| h == *n)
                .ok_or_else(|| CliError::format(path, format!("missing column `{n}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = vec![Vec::new(); names.len()];
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::format(path, e.to_string()))?;
        for (col, &i) in out.iter_mut().zip(&index) {
            let v = rec
                .get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| CliError::format(path, format!("row {}: bad value", k + 1)))?;
            col.push(v);
        }
    }
    Ok(out)
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| CliError::format(path, e.to_string()))?;
    writeln!(w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::format(path, e.to_string()))
}
