//! Output directory with overwrite protection and a manifest of what was written.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const MANIFEST: &str = "manifest.json";

pub struct OutputDir {
    dir: PathBuf,
    force: bool,
    written: Vec<String>,
}

impl OutputDir {
    /// Creates the directory if needed. Refuses a directory holding an earlier
    /// run unless `force` is set.
    pub fn create(dir: &Path, force: bool) -> CliResult<Self> {
        std::fs::create_dir_all(dir)?;
        if !force && dir.join(MANIFEST).exists() {
            return Err(CliError::usage(format!(
                "{} already holds a run; pass --force to overwrite",
                dir.display()
            )));
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            force,
            written: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    fn target(&mut self, name: &str) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        if !self.force && path.exists() {
            return Err(CliError::usage(format!(
                "{} exists; pass --force to overwrite",
                path.display()
            )));
        }
        self.written.push(name.to_string());
        Ok(path)
    }

    pub fn write_csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> CliResult<PathBuf> {
        let path = self.target(name)?;
        let mut w = csv::Writer::from_path(&path)?;
        for row in rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(path)
    }

    /// Like [`write_csv`](Self::write_csv), but an empty table still gets
    /// its header line.
    pub fn write_csv_headed<T: Serialize>(&mut self, name: &str, header: &[&str], rows: &[T]) -> CliResult<PathBuf> {
        if !rows.is_empty() {
            return self.write_csv(name, rows);
        }
        let path = self.target(name)?;
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        w.flush()?;
        Ok(path)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> CliResult<PathBuf> {
        let path = self.target(name)?;
        std::fs::write(&path, text)?;
        Ok(path)
    }

    /// Writes `manifest.json`: the configuration echo, seed, version and the
    /// list of files written by this run.
    pub fn finish(mut self, config: &RunConfig) -> CliResult<Vec<String>> {
        let manifest = serde_json::json!({
            "tool": "ssmt",
            "version": env!("CARGO_PKG_VERSION"),
            "command": config.command,
            "seed": config.seed,
            "config": config,
            "outputs": self.written,
        });
        let path = self.dir.join(MANIFEST);
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
        self.written.push(MANIFEST.to_string());
        Ok(self.written)
    }
}
