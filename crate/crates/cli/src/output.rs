use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// One line of scan output. Numeric fields that do not apply to a scenario
/// are left empty (`None`).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScanRow {
    pub trial: u64,
    pub alpha: f64,
    pub beta_re: Option<f64>,
    pub beta_im: Option<f64>,
    pub d_sand: Option<f64>,
    pub d_petz: Option<f64>,
    pub d_rel: Option<f64>,
    pub dpi_gap: Option<f64>,
    pub t1: Option<f64>,
    pub t1_geo: Option<f64>,
    /// Largest residual over the β grid; `beta_re`/`beta_im` locate it.
    pub t3: Option<f64>,
    pub petz_beta: Option<f64>,
    pub necessary2: Option<f64>,
    pub commutator: Option<f64>,
    pub recovery_err: Option<f64>,
    pub dpi_ok: bool,
    pub saturated: bool,
    pub variational_gap: Option<f64>,
    pub omega_trace_dist: Option<f64>,
    pub integral_err: Option<f64>,
    /// Set when the trial failed; the row is then counted as a failure.
    pub error: Option<String>,
}

impl ScanRow {
    /// CSV header, in column order.
    pub const HEADER: [&'static str; 21] = [
        "trial",
        "alpha",
        "beta_re",
        "beta_im",
        "d_sand",
        "d_petz",
        "d_rel",
        "dpi_gap",
        "t1",
        "t1_geo",
        "t3",
        "petz_beta",
        "necessary2",
        "commutator",
        "recovery_err",
        "dpi_ok",
        "saturated",
        "variational_gap",
        "omega_trace_dist",
        "integral_err",
        "error",
    ];

    pub fn failed(trial: u64, alpha: f64, err: impl ToString) -> Self {
        ScanRow { trial, alpha, error: Some(err.to_string()), ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::Config(format!("unknown format '{other}'"))),
        }
    }
}

pub fn write_rows<W: Write>(rows: &[ScanRow], format: Format, out: W) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
            w.write_record(ScanRow::HEADER)?;
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows).map_err(|e| CliError::Io(e.to_string()))?;
            out.write_all(b"\n")?;
            out.flush()?;
        }
    }
    Ok(())
}

/// Writes rows to `path`, or to stdout when `path` is `None`.
pub fn emit(rows: &[ScanRow], format: Format, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            write_rows(rows, format, BufWriter::new(f))
        }
        None => write_rows(rows, format, io::stdout().lock()),
    }
}

pub fn parse_rows<R: Read>(input: R, format: Format) -> Result<Vec<ScanRow>, CliError> {
    match format {
        Format::Csv => {
            let mut r = csv::Reader::from_reader(input);
            let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
            if header != ScanRow::HEADER {
                return Err(CliError::Io("unexpected CSV header".into()));
            }
            r.deserialize().map(|row| row.map_err(CliError::from)).collect()
        }
        Format::Json => serde_json::from_reader(input).map_err(|e| CliError::Io(e.to_string())),
    }
}

pub fn read_rows(path: &Path, format: Format) -> Result<Vec<ScanRow>, CliError> {
    let f = File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_rows(BufReader::new(f), format)
}
