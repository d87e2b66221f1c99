//! Config-file loading and CLI > file > default merging.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::args::Format;
use crate::error::CliError;

/// Parsed TOML config: optional global keys plus one table per subcommand.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    pub globals: Globals,
    tables: Map<String, Value>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct Globals {
    pub format: Option<Format>,
    pub workers: Option<usize>,
    pub out_dir: Option<String>,
}

const COMMANDS: [&str; 10] =
    ["phase", "gamma", "law", "be", "threshold", "concentration", "cramer", "mdp", "stein", "sample"];

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let table: toml::Table = toml::from_str(text).map_err(|e| e.to_string())?;
        let mut globals = Map::new();
        let mut tables = Map::new();
        for (key, value) in table {
            let json = serde_json::to_value(&value).map_err(|e| e.to_string())?;
            if COMMANDS.contains(&key.as_str()) {
                if !json.is_object() {
                    return Err(format!("[{key}] must be a table"));
                }
                tables.insert(key, json);
            } else if value.is_table() {
                return Err(format!("unknown section [{key}]; expected one of {}", COMMANDS.join(", ")));
            } else {
                globals.insert(key, json);
            }
        }
        let globals = serde_json::from_value(Value::Object(globals)).map_err(|e| format!("top-level keys: {e}"))?;
        Ok(Self { globals, tables })
    }

    fn table(&self, command: &str) -> Option<&Map<String, Value>> {
        self.tables.get(command).and_then(Value::as_object)
    }
}

/// Overlays the non-empty CLI values of `cli` on the `[command]` table.
/// Boolean flags only ever switch a setting on, so `false` counts as unset.
pub fn resolve<T: Serialize + DeserializeOwned>(cli: &T, file: &ConfigFile, command: &str) -> Result<T, CliError> {
    let mut merged = file.table(command).cloned().unwrap_or_default();
    let cli_value = serde_json::to_value(cli).map_err(|e| CliError::Usage(e.to_string()))?;
    if let Value::Object(fields) = cli_value {
        for (k, v) in fields {
            if !(v.is_null() || v == Value::Bool(false)) {
                merged.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Usage(format!("[{command}] config: {e}")))
}

/// SHA-256 of the compact JSON of the effective config, hex encoded.
pub fn config_hash(effective: &Value) -> String {
    let digest = Sha256::digest(effective.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
