//! Run manifests: everything needed to replay a run bit for bit.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::Command;

/// Bumped whenever the manifest layout changes incompatibly.
pub const SCHEMA_VERSION: u32 = 1;
pub const FILE_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    /// The process arguments as typed.
    pub command_line: Vec<String>,
    /// Fully resolved arguments, including any seed drawn at start-up.
    pub invocation: Command,
    pub seed: Option<u64>,
    /// `flag`, `entropy`, or `none` for commands without randomness.
    pub seed_source: String,
    pub threads: Option<usize>,
    pub started_at: String,
    pub finished_at: String,
    /// Files written next to the manifest, relative to its directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let manifest: RunManifest =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if manifest.schema_version != SCHEMA_VERSION {
            return Err(crate::UsageError(format!(
                "manifest schema {} is not supported (expected {SCHEMA_VERSION})",
                manifest.schema_version
            ))
            .into());
        }
        Ok(manifest)
    }

    /// The recorded command, redirected to `out`.
    pub fn replay(&self, out: PathBuf) -> Result<Command> {
        if self.version != env!("CARGO_PKG_VERSION") {
            eprintln!(
                "warning: manifest written by version {}, replaying with {}",
                self.version,
                env!("CARGO_PKG_VERSION")
            );
        }
        let mut command = self.invocation.clone();
        *command.out_mut() = out;
        Ok(command)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(FILE_NAME);
        let text = serde_json::to_string_pretty(self)?;
        fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }
}
