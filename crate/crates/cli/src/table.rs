//! Result rows, CSV / JSON-lines emission and the manifest sidecar.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub const COLUMNS: [&str; 10] =
    ["experiment", "n", "j", "h", "depth", "seed", "momentum_index", "quantity_name", "value_real", "value_imag"];

/// One number. `momentum_index` holds the momentum label, or the site,
/// bin, level or parameter index where the quantity name says so.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub experiment: String,
    pub n: usize,
    pub j: f64,
    pub h: f64,
    pub depth: Option<usize>,
    pub seed: Option<u64>,
    pub momentum_index: Option<usize>,
    pub quantity_name: String,
    pub value_real: f64,
    pub value_imag: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<Row>,
}

/// Seventeen significant digits, enough to round-trip any double.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    #[value(name = "jsonl", alias = "json-lines")]
    Jsonl,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }
}

impl Row {
    fn fields(&self) -> Result<[Option<String>; 10], CliError> {
        for (name, v) in [("j", self.j), ("h", self.h), ("value_real", self.value_real), ("value_imag", self.value_imag)] {
            if !v.is_finite() {
                return Err(CliError::Core(tfim_wannier::Error::Consistency(format!(
                    "non-finite {name} in row {}",
                    self.quantity_name
                ))));
            }
        }
        Ok([
            Some(self.experiment.clone()),
            Some(self.n.to_string()),
            Some(format_float(self.j)),
            Some(format_float(self.h)),
            self.depth.map(|d| d.to_string()),
            self.seed.map(|s| s.to_string()),
            self.momentum_index.map(|m| m.to_string()),
            Some(self.quantity_name.clone()),
            Some(format_float(self.value_real)),
            Some(format_float(self.value_imag)),
        ])
    }
}

const STRING_COLUMNS: [usize; 2] = [0, 7];

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes the table. CSV gets a header row with the schema columns (and
/// nothing else for an empty table); JSON lines get one object per row
/// with exactly the schema keys. Missing values are empty / `null`.
pub fn write_table(table: &ResultTable, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(COLUMNS).map_err(|e| CliError::Io(e.to_string()))?;
            for row in &table.rows {
                let fields = row.fields()?;
                w.write_record(fields.iter().map(|f| f.as_deref().unwrap_or("")))
                    .map_err(|e| CliError::Io(e.to_string()))?;
            }
            w.flush().map_err(|e| CliError::Io(e.to_string()))?;
        }
        Format::Jsonl => {
            for row in &table.rows {
                let fields = row.fields()?;
                let body: Vec<String> = COLUMNS
                    .iter()
                    .zip(fields.iter())
                    .enumerate()
                    .map(|(i, (key, value))| {
                        let v = match value {
                            None => "null".to_string(),
                            Some(s) if STRING_COLUMNS.contains(&i) => serde_json::to_string(s).expect("string"),
                            Some(s) => s.clone(),
                        };
                        format!("\"{key}\":{v}")
                    })
                    .collect();
                writeln!(out, "{{{}}}", body.join(",")).map_err(|e| CliError::Io(e.to_string()))?;
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a, C: Serialize> {
    pub artifact: &'static str,
    pub version: &'static str,
    pub schema_version: u32,
    pub command: &'a str,
    pub config: &'a C,
    pub seed: u64,
    pub threads: usize,
    pub format: Format,
    pub data_file: String,
    pub rows: usize,
    pub started_unix_seconds: f64,
    pub wall_clock_seconds: f64,
}

/// Path of the manifest written next to `data`.
pub fn manifest_path(data: &Path) -> PathBuf {
    let mut name = data.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    data.with_file_name(name)
}

/// Writes the data file and its manifest sidecar.
pub fn emit<C: Serialize>(
    table: &ResultTable,
    format: Format,
    path: &Path,
    manifest: &Manifest<'_, C>,
) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = BufWriter::new(file);
    write_table(table, format, &mut w)?;
    w.flush().map_err(|e| io_error(path, e))?;
    let mpath = manifest_path(path);
    let text = serde_json::to_string_pretty(manifest).map_err(|e| io_error(&mpath, e))?;
    std::fs::write(&mpath, text + "\n").map_err(|e| io_error(&mpath, e))?;
    Ok(())
}
