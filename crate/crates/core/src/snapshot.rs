//! Versioned JSON files for precomputed bounds and index trees.
//!
//! Each file wraps its payload with a format version and the dataset epoch it was
//! built from; loading checks both.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::IndexTree;
use crate::precompute::OfflineBounds;

pub const FORMAT_VERSION: u32 = 1;
pub const BOUNDS_FILE: &str = "bounds.json";
pub const INDEX_FILE: &str = "index.json";

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    version: u32,
    kind: String,
    epoch: String,
    payload: T,
}

fn save<T: Serialize>(path: &Path, kind: &str, epoch: &str, payload: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(
        &mut w,
        &Envelope {
            version: FORMAT_VERSION,
            kind: kind.to_owned(),
            epoch: epoch.to_owned(),
            payload,
        },
    )?;
    w.flush()?;
    Ok(())
}

fn load<T: DeserializeOwned>(path: &Path, kind: &str, epoch: Option<&str>) -> Result<T> {
    let env: Envelope<T> = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    if env.version != FORMAT_VERSION || env.kind != kind {
        return Err(Error::InvalidParams(format!(
            "{}: expected {kind} v{FORMAT_VERSION}, found {} v{}",
            path.display(),
            env.kind,
            env.version
        )));
    }
    if let Some(e) = epoch {
        if e != env.epoch {
            return Err(Error::EpochMismatch {
                expected: e.to_owned(),
                found: env.epoch,
            });
        }
    }
    Ok(env.payload)
}

pub fn save_bounds(path: &Path, b: &OfflineBounds) -> Result<()> {
    save(path, "bounds", &b.epoch, b)
}

/// Loads bounds, requiring `epoch` when given.
pub fn load_bounds(path: &Path, epoch: Option<&str>) -> Result<OfflineBounds> {
    load(path, "bounds", epoch)
}

pub fn save_tree(path: &Path, t: &IndexTree) -> Result<()> {
    save(path, "index", &t.epoch, t)
}

pub fn load_tree(path: &Path, epoch: Option<&str>) -> Result<IndexTree> {
    load(path, "index", epoch)
}
