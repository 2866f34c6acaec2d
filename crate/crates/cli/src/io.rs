//! Text formats: terrain rasters, observation and event CSVs, and CSV
//! output with a header row.

use std::fs;
use std::path::{Path, PathBuf};

use bridgesmc_core::models::{CtcrwtObservation, TerrainRaster};

use crate::error::{CliError, Result};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> CliError + '_ {
    move |source| CliError::Csv { path: path.to_path_buf(), source }
}

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(io_err(path))
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(io_err(path))
}

pub fn write_string(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_err(path))
}

const RASTER_HEADER: [&str; 5] = ["ncols", "nrows", "cellsize", "origin_x", "origin_y"];

/// Reads a raster: five `name value` header lines (`ncols`, `nrows`,
/// `cellsize`, `origin_x`, `origin_y`, in that order) followed by `nrows`
/// comma-separated rows of coefficients, northmost row first. The origin is
/// the south-west corner.
pub fn read_raster(path: &Path) -> Result<TerrainRaster> {
    let text = read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let mut header = [0.0f64; 5];
    for (slot, name) in header.iter_mut().zip(RASTER_HEADER) {
        let line = lines.next().ok_or_else(|| CliError::format(path, format!("missing `{name}` header line")))?;
        let mut parts = line.split(|c: char| c.is_whitespace() || c == ',').filter(|p| !p.is_empty());
        if parts.next() != Some(name) {
            return Err(CliError::format(path, format!("expected header `{name}`, found `{line}`")));
        }
        let value = parts.next().ok_or_else(|| CliError::format(path, format!("`{name}` has no value")))?;
        *slot =
            value.parse().map_err(|_| CliError::format(path, format!("`{name}` value `{value}` is not a number")))?;
    }
    let body: String = lines.collect::<Vec<_>>().join("\n");
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(body.as_bytes());
    let mut values = Vec::new();
    let mut rows = 0usize;
    for record in reader.records() {
        let record = record.map_err(csv_err(path))?;
        for field in record.iter() {
            values
                .push(field.parse::<f64>().map_err(|_| CliError::format(path, format!("`{field}` is not a number")))?);
        }
        rows += 1;
    }
    let (ncols, nrows) = (header[0] as usize, header[1] as usize);
    if header[0] != ncols as f64 || header[1] != nrows as f64 || rows != nrows {
        return Err(CliError::format(path, format!("expected {nrows} rows of {ncols} values, found {rows} rows")));
    }
    Ok(TerrainRaster::new(ncols, nrows, header[2], (header[3], header[4]), values)?)
}

pub fn write_raster(path: &Path, raster: &TerrainRaster) -> Result<()> {
    let (ox, oy) = raster.origin();
    let mut out = format!(
        "ncols {}\nnrows {}\ncellsize {}\norigin_x {}\norigin_y {}\n",
        raster.ncols(),
        raster.nrows(),
        raster.cellsize(),
        ox,
        oy
    );
    for row in raster.values().chunks(raster.ncols()) {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    write_string(path, &out)
}

/// Reads a CSV with a header row and returns the requested numeric columns.
pub fn read_columns(path: &Path, columns: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(csv_err(path))?;
    let headers = reader.headers().map_err(csv_err(path))?.clone();
    let idx: Vec<usize> = columns
        .iter()
        .map(|c| {
            headers.iter().position(|h| h == *c).ok_or_else(|| CliError::format(path, format!("missing column `{c}`")))
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err(path))?;
        let row = idx
            .iter()
            .map(|&i| {
                let f = &record[i];
                f.parse::<f64>().map_err(|_| CliError::format(path, format!("`{f}` is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        out.push(row);
    }
    Ok(out)
}

/// `time,x,y` rows.
pub fn read_observations(path: &Path) -> Result<Vec<CtcrwtObservation>> {
    let rows = read_columns(path, &["time", "x", "y"])?;
    if rows.is_empty() {
        return Err(CliError::format(path, "no observations"));
    }
    Ok(rows.into_iter().map(|r| CtcrwtObservation { time: r[0], x: r[1], y: r[2] }).collect())
}

pub fn write_observations(path: &Path, obs: &[CtcrwtObservation]) -> Result<()> {
    let mut w = CsvOut::create(path, &["time", "x", "y"])?;
    for o in obs {
        w.row(&[o.time.to_string(), o.x.to_string(), o.y.to_string()])?;
    }
    w.finish()
}

/// `time` rows, sorted on return.
pub fn read_events(path: &Path) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = read_columns(path, &["time"])?.into_iter().map(|r| r[0]).collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// A CSV writer with a fixed header.
pub struct CsvOut {
    path: PathBuf,
    writer: csv::Writer<fs::File>,
}

impl CsvOut {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self> {
        let mut writer = csv::Writer::from_path(path).map_err(csv_err(path))?;
        writer.write_record(header).map_err(csv_err(path))?;
        Ok(CsvOut { path: path.to_path_buf(), writer })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        let path = self.path.clone();
        self.writer.write_record(fields).map_err(csv_err(&path))
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush().map_err(io_err(&self.path))
    }
}
