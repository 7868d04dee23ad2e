use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::args::{Command, Global};
use crate::CliError;

/// Run metadata attached to every output.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub backend: String,
    pub config_hash: String,
}

impl Meta {
    /// The hash covers everything that can change the output; `--jobs`
    /// and `--out` are excluded.
    pub fn new(global: &Global, command: &Command, backend: String) -> Self {
        let config = json!({ "global": global, "command": command });
        let digest = Sha256::digest(config.to_string().as_bytes());
        Meta {
            tool: "mol",
            version: env!("CARGO_PKG_VERSION"),
            seed: global.seed,
            backend,
            config_hash: hex::encode(digest),
        }
    }

    pub fn csv_line(&self) -> String {
        format!(
            "# {} {} seed={} backend={} config={}\n",
            self.tool, self.version, self.seed, self.backend, self.config_hash
        )
    }

    /// `{"meta": ..., <payload fields>}`.
    pub fn wrap_json(&self, payload: impl Serialize) -> Result<String, CliError> {
        let mut obj = Map::new();
        obj.insert("meta".into(), serde_json::to_value(self).map_err(internal)?);
        match serde_json::to_value(payload).map_err(internal)? {
            Value::Object(fields) => obj.extend(fields),
            other => {
                obj.insert("result".into(), other);
            }
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(obj)).map_err(internal)?;
        s.push('\n');
        Ok(s)
    }
}

fn internal(e: serde_json::Error) -> CliError {
    CliError::Config(format!("serialization failed: {e}"))
}

pub fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

/// Formats a float for CSV; `None` leaves the field empty.
pub fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}
