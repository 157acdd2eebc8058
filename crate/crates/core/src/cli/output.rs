use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use super::config::ExperimentConfig;

/// Schema version of the comparison, scan and search CSV tables.
pub const TABLE_SCHEMA_VERSION: u32 = 1;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance shared by every file of one invocation.
#[derive(Clone, Debug)]
pub struct Provenance {
    pub command: String,
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub config_json: String,
}

impl Provenance {
    pub fn new(command: &str, config: &ExperimentConfig, seeds: Vec<u64>) -> Self {
        Provenance {
            command: command.to_string(),
            config_hash: config.hash(),
            seeds,
            config_json: serde_json::to_string(config).expect("configuration serializes"),
        }
    }

    /// Header lines, without comment markers.
    pub fn lines(&self) -> Vec<String> {
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        vec![
            format!("wulffmc {VERSION}"),
            format!("command: {}", self.command),
            format!("config_sha256: {}", self.config_hash),
            format!("seeds: {}", seeds.join(" ")),
            format!("config: {}", self.config_json),
        ]
    }

    pub fn json(&self) -> serde_json::Value {
        json!({
            "version": VERSION,
            "command": self.command,
            "config_sha256": self.config_hash,
            "seeds": self.seeds,
            "config": serde_json::from_str::<serde_json::Value>(&self.config_json).expect("valid json"),
        })
    }
}

/// Files of one invocation, all inside a single directory.
pub struct OutputDir {
    root: PathBuf,
    pub provenance: Provenance,
}

impl OutputDir {
    pub fn create(root: PathBuf, provenance: Provenance) -> io::Result<Self> {
        fs::create_dir_all(&root)?;
        Ok(OutputDir { root, provenance })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Path of a file directly inside the directory.
    pub fn path(&self, name: &str) -> PathBuf {
        assert!(
            !name.contains(['/', '\\']) && name != ".." && !name.is_empty(),
            "output names are plain file names"
        );
        self.root.join(name)
    }

    pub fn create_file(&self, name: &str) -> io::Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.path(name))?))
    }

    pub fn write_text(&self, name: &str, comment: &str, body: &str) -> io::Result<()> {
        let mut f = self.create_file(name)?;
        for line in self.provenance.lines() {
            writeln!(f, "{comment} {line}")?;
        }
        f.write_all(body.as_bytes())?;
        f.flush()
    }

    /// CSV with a `#` provenance header and schema version.
    pub fn write_csv(&self, name: &str, columns: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
        let mut body = format!("# schema_version: {TABLE_SCHEMA_VERSION}\n{}\n", columns.join(","));
        for r in rows {
            body.push_str(&r.join(","));
            body.push('\n');
        }
        self.write_text(name, "#", &body)
    }

    /// JSON object `{"provenance": ..., <key>: value}`.
    pub fn write_json(&self, name: &str, key: &str, value: &impl Serialize) -> io::Result<()> {
        let doc = json!({ "provenance": self.provenance.json(), key: value });
        let mut f = self.create_file(name)?;
        serde_json::to_writer_pretty(&mut f, &doc)?;
        writeln!(f)?;
        f.flush()
    }

    pub fn write_svg(&self, name: &str, svg: &str) -> io::Result<()> {
        let mut f = self.create_file(name)?;
        for line in self.provenance.lines() {
            writeln!(f, "<!-- {} -->", line.replace("--", "- -"))?;
        }
        f.write_all(svg.as_bytes())?;
        f.flush()
    }
}
