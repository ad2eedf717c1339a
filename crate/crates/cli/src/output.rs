//! Output directory bookkeeping: resolved config copy and JSON sidecar.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::{RunConfig, SCHEMA_VERSION};

pub struct OutDir {
    pub root: PathBuf,
    written: Vec<String>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    schema_version: u32,
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: u64,
    config: &'static str,
    outputs: &'a [String],
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    /// Path for a new artifact, recorded in the sidecar listing.
    pub fn file(&mut self, name: &str) -> PathBuf {
        self.written.push(name.to_string());
        self.root.join(name)
    }

    pub fn csv_writer(&mut self, name: &str) -> Result<csv::Writer<std::fs::File>> {
        let path = self.file(name);
        csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))
    }

    pub fn create_file(&mut self, name: &str) -> Result<std::io::BufWriter<std::fs::File>> {
        let path = self.file(name);
        let f = std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok(std::io::BufWriter::new(f))
    }

    pub fn finish(self, command: &str, cfg: &RunConfig) -> Result<()> {
        let text = toml::to_string(cfg).context("serializing resolved config")?;
        std::fs::write(self.root.join("config.toml"), text)?;
        let sidecar = Sidecar {
            schema_version: SCHEMA_VERSION,
            tool: "longread",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: cfg.seed,
            config: "config.toml",
            outputs: &self.written,
        };
        let json = serde_json::to_string_pretty(&sidecar)?;
        std::fs::write(self.root.join("run.json"), json + "\n")?;
        Ok(())
    }
}

/// Fixed-precision float formatting for CSV cells.
pub fn f(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.10e}")
    }
}
