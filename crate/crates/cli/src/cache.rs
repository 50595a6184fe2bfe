//! Exposure fields cached beside the map file, keyed by map content.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use losplan::{ExposureField, GridEnvironment};
use sha2::{Digest, Sha256};

/// Hex digest of the map bytes and the observer offset, the only inputs
/// line-of-sight depends on.
pub fn cache_key(map_bytes: &[u8], offset: f64) -> String {
    let mut hasher = Sha256::new();
    hasher.update(map_bytes);
    hasher.update(offset.to_le_bytes());
    hasher.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
}

pub fn cache_path(map_path: &Path, key: &str) -> PathBuf {
    let mut name = map_path.file_name().unwrap_or_default().to_os_string();
    name.push(format!(".{key}.expf"));
    map_path.with_file_name(name)
}

pub fn read_field(path: &Path, env: &GridEnvironment) -> Result<ExposureField> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let field =
        ExposureField::read_cache(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))?;
    if field.len() != env.len() {
        bail!(
            "{} holds {} regions but the map has {}",
            path.display(),
            field.len(),
            env.len()
        );
    }
    Ok(field)
}

pub fn write_field(path: &Path, field: &ExposureField) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    field
        .write_cache(BufWriter::new(file))
        .with_context(|| format!("writing {}", path.display()))
}

/// Loads the cached field for this map, computing and storing it on a miss.
/// Returns the field and whether it came from the cache.
pub fn load_or_compute(
    map_path: &Path,
    map_bytes: &[u8],
    env: &GridEnvironment,
) -> Result<(ExposureField, PathBuf, bool)> {
    let path = cache_path(map_path, &cache_key(map_bytes, env.params().offset));
    if path.exists() {
        if let Ok(field) = read_field(&path, env) {
            return Ok((field, path, true));
        }
        eprintln!("ignoring unreadable cache {}", path.display());
    }
    let field = ExposureField::compute(env);
    if let Err(err) = write_field(&path, &field) {
        eprintln!("could not write cache: {err:#}");
    }
    Ok((field, path, false))
}
