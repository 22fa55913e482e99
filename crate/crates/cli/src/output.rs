//! Run directories: output files plus the manifest that reproduces them.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments after the program name, without `--out`.
    pub argv: Vec<String>,
    pub alpha: Option<String>,
    /// Guard bits added to each angle reduction.
    pub precision_bits: u64,
    pub n_min: u64,
    pub parameters: Value,
    pub tolerances: Value,
    pub outputs: Vec<String>,
    /// Version of the SVG markup; SVG files are only comparable at equal versions.
    pub svg_style_version: u32,
}

pub struct RunWriter {
    dir: PathBuf,
    outputs: Vec<String>,
}

impl RunWriter {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            outputs: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    fn record(&mut self, name: &str) -> PathBuf {
        if !self.outputs.iter().any(|o| o == name) {
            self.outputs.push(name.to_string());
        }
        self.dir.join(name)
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.text(name, &text)
    }

    pub fn text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.record(name);
        fs::write(path, text)?;
        Ok(())
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
        let path = self.record(name);
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn finish(self, mut manifest: ExperimentManifest) -> Result<ExperimentManifest, CliError> {
        manifest.outputs = self.outputs;
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(self.dir.join(MANIFEST_FILE), text)?;
        Ok(manifest)
    }
}

pub fn read_manifest(dir: &Path) -> Result<ExperimentManifest, CliError> {
    let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
    Ok(serde_json::from_str(&text)?)
}
