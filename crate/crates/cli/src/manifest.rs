//! Run manifests: the effective config, its fingerprint and file digests.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::CmdResult;

pub const MANIFEST_SCHEMA_VERSION: &str = "popcast.manifest.v1";

#[derive(Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema_version: &'a str,
    tool_version: &'a str,
    command: &'a str,
    fingerprint: String,
    config: Value,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 of the config with object keys in sorted order.
pub fn fingerprint(config: &Value) -> String {
    hex(&Sha256::digest(config.to_string().as_bytes()))
}

fn digest(path: &Path) -> CmdResult<FileDigest> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: hex(&Sha256::digest(&bytes)),
    })
}

/// `<path>.<suffix>`, keeping the full original file name.
pub fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".");
    name.push(suffix);
    path.with_file_name(name)
}

/// Writes `<primary>.manifest.json` next to the primary output.
pub fn write_manifest(
    command: &str,
    config: &impl Serialize,
    inputs: &[&Path],
    outputs: &[&Path],
) -> CmdResult<PathBuf> {
    let config = serde_json::to_value(config)?;
    let manifest = Manifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        command,
        fingerprint: fingerprint(&config),
        config,
        inputs: inputs.iter().map(|p| digest(p)).collect::<CmdResult<_>>()?,
        outputs: outputs.iter().map(|p| digest(p)).collect::<CmdResult<_>>()?,
    };
    let path = with_suffix(outputs[0], "manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

pub fn write_json(path: &Path, value: &impl Serialize) -> CmdResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
