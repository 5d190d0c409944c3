use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::{Error, Result};

/// Collects the artifacts of one run inside its output directory.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    /// Artifact names are fixed by the commands, never taken from user input,
    /// so every file lands directly inside the output directory.
    fn path(&mut self, name: &str) -> PathBuf {
        debug_assert!(!name.contains('/') && !name.contains(".."));
        self.written.push(name.to_string());
        self.root.join(name)
    }

    pub fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let mut w = csv::Writer::from_path(self.path(name))?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut w = BufWriter::new(File::create(self.path(name))?);
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    pub fn jsonl<T: Serialize>(&mut self, name: &str, values: &[T]) -> Result<()> {
        let mut w = BufWriter::new(File::create(self.path(name))?);
        for v in values {
            serde_json::to_writer(&mut w, v)?;
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `manifest.json` listing everything written so far.
    pub fn finish(mut self, config: &RunConfig) -> Result<Manifest> {
        let manifest = Manifest {
            library: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            outputs: self.written.clone(),
        };
        self.json("manifest.json", &manifest)?;
        Ok(manifest)
    }
}

/// Record of a completed run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub library: String,
    pub version: String,
    pub config: RunConfig,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read { path: path.to_path_buf(), source })?;
        Ok(serde_json::from_str(&text)?)
    }
}
