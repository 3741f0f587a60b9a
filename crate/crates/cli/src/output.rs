//! Output directory handling. Data files are deterministic; wall-clock
//! timestamps go only to the sidecar `run.log`.

use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use abcd_core::io::{to_json, write_profile_csv, write_profile_dat, OutputFormat};
use abcd_core::model::WaveProfile;
use serde::Serialize;

use crate::error::CliError;

pub const LOG_NAME: &str = "run.log";

#[derive(Debug, Clone)]
pub struct Output {
    dir: PathBuf,
    formats: Vec<OutputFormat>,
    log: PathBuf,
}

impl Output {
    /// Creates `dir`; the log lives in the top-level directory and is shared
    /// by any job subdirectories.
    pub fn create(dir: &Path, formats: Vec<OutputFormat>) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            formats,
            log: dir.join(LOG_NAME),
        })
    }

    /// Output rooted at `dir/name`, same formats, same log.
    pub fn job(&self, name: &str) -> Result<Self, CliError> {
        let dir = self.dir.join(name);
        fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            formats: self.formats.clone(),
            log: self.log.clone(),
        })
    }

    pub fn wants(&self, f: OutputFormat) -> bool {
        self.formats.contains(&f)
    }

    /// Writes `stem.csv` and/or `stem.dat` as selected; returns the paths.
    pub fn profile(&self, stem: &str, p: &WaveProfile) -> Result<Vec<PathBuf>, CliError> {
        let mut written = Vec::new();
        if self.wants(OutputFormat::Csv) {
            let path = self.dir.join(format!("{stem}.csv"));
            let mut w = BufWriter::new(File::create(&path)?);
            write_profile_csv(&mut w, p)?;
            w.flush()?;
            written.push(path);
        }
        if self.wants(OutputFormat::GnuplotDat) {
            let path = self.dir.join(format!("{stem}.dat"));
            let mut w = BufWriter::new(File::create(&path)?);
            write_profile_dat(&mut w, p)?;
            w.flush()?;
            written.push(path);
        }
        Ok(written)
    }

    /// Writes `name.json` when JSON output is selected.
    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<Option<PathBuf>, CliError> {
        if !self.wants(OutputFormat::Json) {
            return Ok(None);
        }
        let path = self.dir.join(format!("{name}.json"));
        fs::write(&path, to_json(value)?)?;
        Ok(Some(path))
    }

    /// Appends a timestamped line to the sidecar log. Logging is best effort.
    pub fn log(&self, msg: &str) {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default();
        if let Ok(mut f) = OpenOptions::new().create(true).append(true).open(&self.log) {
            let _ = writeln!(f, "[{}.{:03}] {msg}", now.as_secs(), now.subsec_millis());
        }
    }
}
