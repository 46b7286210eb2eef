//! `manifest.json` written into every output directory.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::config::hex_digest;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub core_version: &'static str,
    pub command: String,
    /// SHA-256 of the compact JSON of `config`.
    pub config_hash: String,
    pub config: Value,
}

impl Manifest {
    pub fn new(command: &str, config: Value) -> Result<Self> {
        let config_hash = hex_digest(&serde_json::to_vec(&config)?);
        Ok(Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            core_version: contagion_core::VERSION,
            command: command.to_string(),
            config_hash,
            config,
        })
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut w = BufWriter::new(File::create(dir.join("manifest.json"))?);
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SweepConfig;

    #[test]
    fn sweep_manifest_hash_matches_config_hash() {
        let cfg = SweepConfig::default();
        let m = Manifest::new("sweep", serde_json::to_value(cfg.canonical()).unwrap()).unwrap();
        assert_eq!(m.config_hash, cfg.hash());
        let dir = tempfile::tempdir().unwrap();
        m.write(dir.path()).unwrap();
        let back: Value = serde_json::from_reader(File::open(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(back["config_hash"], Value::String(cfg.hash()));
    }
}
