//! Flag/config-file layering and the exit-code error type.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

pub const SEED_ENV: &str = "POPCAST_SEED";

/// Errors split by exit code: 1 for data problems, 2 for configuration.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(anyhow::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Data(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Data(e)
    }
}

impl From<popcast::Error> for CliError {
    fn from(e: popcast::Error) -> Self {
        match e {
            popcast::Error::InvalidConfig(m) => CliError::Config(m),
            other => CliError::Data(other.into()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(e.into())
    }
}

pub type CmdResult<T> = Result<T, CliError>;

pub fn config_error<T>(message: impl Into<String>) -> CmdResult<T> {
    Err(CliError::Config(message.into()))
}

/// Parsed `--config` file: a TOML table, or a run manifest written earlier.
#[derive(Debug, Default)]
pub struct ConfigSource {
    path: Option<PathBuf>,
    top: Map<String, Value>,
    manifest_command: Option<String>,
}

const COMMANDS: [&str; 7] = ["ingest", "label", "rank", "train", "eval", "cross-eval", "synth"];

impl ConfigSource {
    pub fn load(path: Option<&Path>) -> CmdResult<Self> {
        let Some(path) = path else {
            return Ok(ConfigSource::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("--config {}: {e}", path.display())))?;
        let bad = |e: &dyn fmt::Display| CliError::Config(format!("--config {}: {e}", path.display()));
        if path.extension().is_some_and(|e| e == "json") {
            let value: Value = serde_json::from_str(&text).map_err(|e| bad(&e))?;
            let command = value.get("command").and_then(Value::as_str).map(str::to_string);
            let config = value.get("config").and_then(Value::as_object).cloned();
            match (command, config) {
                (Some(command), Some(config)) => Ok(ConfigSource {
                    path: Some(path.to_path_buf()),
                    top: config,
                    manifest_command: Some(command),
                }),
                _ => Err(bad(&"JSON config must be a run manifest with `command` and `config`")),
            }
        } else {
            let table: toml::Table = toml::from_str(&text).map_err(|e| bad(&e))?;
            let Value::Object(top) = serde_json::to_value(table).map_err(|e| bad(&e))? else {
                return Err(bad(&"expected a table"));
            };
            let unknown: Vec<&String> = top
                .keys()
                .filter(|k| k.as_str() != "seed" && !COMMANDS.contains(&k.as_str()))
                .collect();
            if !unknown.is_empty() {
                return Err(bad(&format!("unknown keys: {unknown:?}")));
            }
            Ok(ConfigSource {
                path: Some(path.to_path_buf()),
                top,
                manifest_command: None,
            })
        }
    }

    /// Settings for one subcommand. The top-level `seed` applies to every
    /// command that takes one.
    pub fn section(&self, command: &str, takes_seed: bool) -> CmdResult<Map<String, Value>> {
        if let Some(m) = &self.manifest_command {
            if m != command {
                return config_error(format!(
                    "--config {}: manifest is for `{m}`, not `{command}`",
                    self.display()
                ));
            }
            return Ok(self.top.clone());
        }
        let mut out = match self.top.get(command) {
            None => Map::new(),
            Some(Value::Object(m)) => m.clone(),
            Some(_) => return config_error(format!("--config {}: [{command}] must be a table", self.display())),
        };
        if takes_seed && !out.contains_key("seed") {
            if let Some(seed) = self.top.get("seed") {
                out.insert("seed".into(), seed.clone());
            }
        }
        Ok(out)
    }

    fn display(&self) -> String {
        self.path.as_ref().map_or("<none>".into(), |p| p.display().to_string())
    }
}

/// Overlays flags that were given (non-null, non-false) on the file values.
pub fn layer<T: Serialize + DeserializeOwned>(flags: &T, file: Map<String, Value>) -> CmdResult<T> {
    let Value::Object(given) = serde_json::to_value(flags)? else {
        unreachable!("argument structs serialize to objects");
    };
    let mut merged = file;
    for (k, v) in given {
        if !v.is_null() && v != Value::Bool(false) {
            merged.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Config(format!("config file: {e}")))
}

/// Flag or config value, then `POPCAST_SEED`, then 0.
pub fn resolve_seed(given: Option<u64>) -> CmdResult<u64> {
    if let Some(seed) = given {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

pub fn require<'a, T>(value: &'a Option<T>, flag: &str) -> CmdResult<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| CliError::Config(format!("missing required --{flag}")))
}
