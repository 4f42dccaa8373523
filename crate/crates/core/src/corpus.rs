//! Seed corpora: a flat directory of `.java` files, one method per file.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ast::{parse, ParseError};
use crate::engine::Seed;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{error}")]
    Parse { path: PathBuf, error: ParseError },
    #[error("no .java files in {0}")]
    Empty(PathBuf),
    #[error("no file in {0} parses as a Java method")]
    NothingParses(PathBuf),
}

#[derive(Clone, Debug)]
pub struct Skipped {
    pub path: PathBuf,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct Corpus {
    pub seeds: Vec<Seed>,
    pub skipped: Vec<Skipped>,
    /// Hex SHA-256 over every file name and its bytes, in load order.
    pub fingerprint: String,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io { path: path.to_path_buf(), source }
}

/// Parses one file; the seed id is the file stem.
pub fn load_file(path: &Path) -> Result<Seed, CorpusError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let unit = parse(&text).map_err(|error| CorpusError::Parse { path: path.to_path_buf(), error })?;
    let id = path.file_stem().map_or_else(|| "seed".to_string(), |s| s.to_string_lossy().into_owned());
    Ok(Seed { id, unit })
}

/// Loads every `*.java` file directly inside `dir`, sorted by path. Files that
/// fail to parse are skipped and reported; the corpus must keep at least one.
pub fn load_dir(dir: &Path) -> Result<Corpus, CorpusError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(io_err(dir))?;
    paths.retain(|p| p.is_file() && p.extension().is_some_and(|e| e == "java"));
    paths.sort();
    if paths.is_empty() {
        return Err(CorpusError::Empty(dir.to_path_buf()));
    }
    let mut hasher = Sha256::new();
    let mut seeds = Vec::new();
    let mut skipped = Vec::new();
    for path in paths {
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        hasher.update((name.len() as u64).to_le_bytes());
        hasher.update(name.as_bytes());
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(&bytes);
        match load_file(&path) {
            Ok(seed) => seeds.push(seed),
            Err(e) => {
                log::warn!("skipping {e}");
                skipped.push(Skipped { path, reason: e.to_string() });
            }
        }
    }
    if seeds.is_empty() {
        return Err(CorpusError::NothingParses(dir.to_path_buf()));
    }
    Ok(Corpus { seeds, skipped, fingerprint: hex::encode(hasher.finalize()) })
}
