use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_sha256(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::input(path, e))?;
    Ok(sha256_hex(&bytes))
}

/// Hashes of the input files, keyed by role.
pub fn input_hashes(inputs: &[(&str, &Path)]) -> Result<Value, CliError> {
    let mut map = serde_json::Map::new();
    for (role, path) in inputs {
        map.insert(role.to_string(), json!({ "path": path.display().to_string(), "sha256": file_sha256(path)? }));
    }
    Ok(Value::Object(map))
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Timestamps and tool identity shared by every manifest.
pub struct Clock {
    started: String,
}

impl Clock {
    pub fn start() -> Self {
        Self { started: now() }
    }

    /// Manifest body: `fields` plus tool, timestamps and output hashes.
    pub fn manifest(&self, command: &str, fields: Value, outputs: &[(&str, &[u8])]) -> Value {
        let hashes: serde_json::Map<String, Value> =
            outputs.iter().map(|(name, bytes)| (name.to_string(), Value::String(sha256_hex(bytes)))).collect();
        let mut manifest = json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "started_at": self.started,
            "finished_at": now(),
            "threads": rayon::current_num_threads(),
            "outputs": hashes,
        });
        if let (Value::Object(m), Value::Object(extra)) = (&mut manifest, fields) {
            m.extend(extra);
        }
        manifest
    }
}

/// Refuses to clobber `path` unless `force` is set.
pub fn check_target(path: &Path, force: bool) -> Result<(), CliError> {
    if path.exists() && !force {
        return Err(CliError::Validation(format!("{} already exists; pass --force to overwrite", path.display())));
    }
    Ok(())
}

fn staging_path(target: &Path) -> PathBuf {
    let name = target.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    target.with_file_name(format!(".{name}.partial-{}", std::process::id()))
}

fn remove_any(path: &Path) -> std::io::Result<()> {
    if path.is_dir() {
        fs::remove_dir_all(path)
    } else {
        fs::remove_file(path)
    }
}

/// Writes `files` into a fresh directory at `dir`. Files are written to a
/// staging directory first, so a failure leaves nothing behind.
pub fn publish_dir(dir: &Path, force: bool, files: &[(&str, Vec<u8>)]) -> Result<(), CliError> {
    check_target(dir, force)?;
    let staging = staging_path(dir);
    let write_all = || -> std::io::Result<()> {
        if staging.exists() {
            remove_any(&staging)?;
        }
        fs::create_dir_all(&staging)?;
        for (name, bytes) in files {
            fs::write(staging.join(name), bytes)?;
        }
        if dir.exists() {
            remove_any(dir)?;
        }
        fs::rename(&staging, dir)
    };
    write_all().map_err(|e| {
        let _ = remove_any(&staging);
        CliError::output(dir, e)
    })
}

/// Writes several sibling files, each through a temporary name.
pub fn publish_files(force: bool, files: &[(&Path, Vec<u8>)]) -> Result<(), CliError> {
    for (path, _) in files {
        check_target(path, force)?;
    }
    let staged: Vec<PathBuf> = files.iter().map(|(p, _)| staging_path(p)).collect();
    let result = (|| -> std::io::Result<()> {
        for ((_, bytes), tmp) in files.iter().zip(&staged) {
            fs::write(tmp, bytes)?;
        }
        for ((path, _), tmp) in files.iter().zip(&staged) {
            fs::rename(tmp, path)?;
        }
        Ok(())
    })();
    result.map_err(|e| {
        for tmp in &staged {
            let _ = fs::remove_file(tmp);
        }
        CliError::output(files[0].0, e)
    })
}
