use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{io, CliError};

/// Written next to every output. `args` re-runs the command exactly; only
/// `timestamp` differs between two runs with the same arguments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    /// Fully resolved settings, including input and output paths.
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, args: &[String], config: serde_json::Value, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            args: args.to_vec(),
            config,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        io::write_json(path, self)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }
}

/// Replaces the value of `--out` in a recorded argument list.
pub fn override_out(args: &[String], out: &Path) -> Vec<String> {
    let out = out.to_string_lossy().into_owned();
    let mut result = Vec::with_capacity(args.len() + 2);
    let mut replaced = false;
    let mut iter = args.iter();
    while let Some(a) = iter.next() {
        if a == "--out" {
            iter.next();
            result.push(a.clone());
            result.push(out.clone());
            replaced = true;
        } else if a.starts_with("--out=") {
            result.push(format!("--out={out}"));
            replaced = true;
        } else {
            result.push(a.clone());
        }
    }
    if !replaced {
        result.push("--out".into());
        result.push(out);
    }
    result
}
