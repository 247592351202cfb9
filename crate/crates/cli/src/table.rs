//! Result tables: CSV rows plus a JSON sidecar carrying the metadata.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    /// The predictor is not defined for this observation count.
    Undefined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub predictor: String,
    pub n: usize,
    pub status: CellStatus,
    pub mean: Option<f64>,
    pub std_err: Option<f64>,
    pub n_samples: u64,
    pub n_undefined: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMetadata {
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    pub library_version: String,
    pub n_samples: u64,
    pub shards: u32,
    pub model: String,
    pub random_numbers: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub metadata: TableMetadata,
    pub rows: Vec<ResultRow>,
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_path(path)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CliError> {
    let mut reader = csv::Reader::from_path(path)?;
    reader.deserialize().map(|r| r.map_err(CliError::from)).collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut writer = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut writer, value)?;
    writeln!(writer)?;
    writer.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

impl ResultTable {
    /// Writes `<stem>.csv` and `<stem>.json`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<(), CliError> {
        write_csv(&dir.join(format!("{stem}.csv")), &self.rows)?;
        write_json(&dir.join(format!("{stem}.json")), self)
    }

    /// Reads the metadata from the JSON sidecar and the rows from the CSV.
    pub fn read(dir: &Path, stem: &str) -> Result<Self, CliError> {
        let mut table: ResultTable = read_json(&dir.join(format!("{stem}.json")))?;
        table.rows = read_csv(&dir.join(format!("{stem}.csv")))?;
        Ok(table)
    }
}
