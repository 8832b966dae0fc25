//! CSV and JSON result files.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::{PointStats, RunConfig};
use crate::error::Result;

pub const CSV_HEADER: &str = "ebn0_db,blocks,block_errors,bler,ci_halfwidth,ber,mean_teps,mean_ms,wins_bit,wins_byte";

/// Append-only CSV writer; the header is written only to an empty file and each
/// row is flushed as soon as it is written.
pub struct CsvSink {
    file: File,
}

impl CsvSink {
    pub fn open(path: &Path) -> Result<Self> {
        let mut file = OpenOptions::new().create(true).append(true).open(path)?;
        if file.metadata()?.len() == 0 {
            writeln!(file, "{CSV_HEADER}")?;
        }
        Ok(Self { file })
    }

    pub fn write(&mut self, s: &PointStats) -> Result<()> {
        writeln!(
            self.file,
            "{},{},{},{:.6e},{:.6e},{:.6e},{:.3},{:.4},{},{}",
            s.ebn0_db, s.blocks, s.block_errors, s.bler, s.ci_halfwidth, s.ber, s.mean_teps, s.mean_ms, s.wins_bit, s.wins_byte
        )?;
        self.file.flush()?;
        Ok(())
    }
}

#[derive(Serialize)]
struct Report<'a> {
    config: &'a RunConfig,
    points: &'a [PointStats],
}

pub fn write_json(path: &Path, cfg: &RunConfig, points: &[PointStats]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, &Report { config: cfg, points })?;
    w.flush()?;
    Ok(())
}
