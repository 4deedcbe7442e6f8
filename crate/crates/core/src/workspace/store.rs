//! On-disk workspaces: one directory per dataset under a root.
//!
//! ```text
//! <root>/<dataset>/manifest.json
//!                 /features.csv     raw values, committed columns included
//!                 /commits.jsonl    one CommitRecord per line
//!                 /layout.json
//!                 /checksums.json   SHA-256 of each file above
//! ```
//!
//! A directory holding only `manifest.json` and `features.csv` is a fresh
//! dataset and is ingested on first open.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::features::{Axis, Provenance};
use crate::layout::Layout;
use crate::{Error, Result};

use super::io::{read_features_csv, read_manifest, write_features_csv, write_manifest};
use super::{load_workspace, CommitRecord, Workspace};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const FEATURES_FILE: &str = "features.csv";
pub const COMMITS_FILE: &str = "commits.jsonl";
pub const LAYOUT_FILE: &str = "layout.json";
pub const CHECKSUMS_FILE: &str = "checksums.json";

const TRACKED: [&str; 4] = [MANIFEST_FILE, FEATURES_FILE, COMMITS_FILE, LAYOUT_FILE];

#[derive(Clone, Debug)]
pub struct WorkspaceStore {
    root: PathBuf,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id != "."
        && id != ".."
        && !id.contains(['/', '\\'])
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

impl WorkspaceStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn dir(&self, id: &str) -> PathBuf {
        self.root.join(id)
    }

    /// Dataset ids (directories with a manifest), sorted.
    pub fn list(&self) -> Result<Vec<String>> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.root)? {
            let entry = entry?;
            if entry.path().join(MANIFEST_FILE).is_file() {
                ids.push(entry.file_name().to_string_lossy().into_owned());
            }
        }
        ids.sort();
        Ok(ids)
    }

    /// Opens a saved workspace, verifying checksums, or ingests a fresh dataset.
    pub fn reload(&self, id: &str, seed: u64) -> Result<Workspace> {
        let dir = self.dir(id);
        if !valid_id(id) || !dir.join(MANIFEST_FILE).is_file() {
            return Err(Error::NotFound(id.to_string()));
        }
        if !dir.join(CHECKSUMS_FILE).is_file() {
            let mut ws = load_workspace(&dir.join(MANIFEST_FILE), &dir.join(FEATURES_FILE), seed)?;
            ws.dataset_id = id.to_string();
            return Ok(ws);
        }

        let sums: BTreeMap<String, String> =
            serde_json::from_slice(&fs::read(dir.join(CHECKSUMS_FILE))?)?;
        for (name, expected) in &sums {
            if !TRACKED.contains(&name.as_str()) {
                continue;
            }
            let bytes = fs::read(dir.join(name))?;
            if &sha256_hex(&bytes) != expected {
                return Err(Error::ChecksumMismatch(name.clone()));
            }
        }
        for name in [MANIFEST_FILE, FEATURES_FILE, COMMITS_FILE] {
            if !sums.contains_key(name) {
                return Err(Error::ChecksumMismatch(name.to_string()));
            }
        }

        let items = read_manifest(&dir.join(MANIFEST_FILE))?;
        let mut raw = read_features_csv(&dir.join(FEATURES_FILE), items.len())?;
        let commits = read_commits(&dir.join(COMMITS_FILE))?;
        for record in &commits {
            for (axis, &col) in [Axis::X, Axis::Y].iter().zip(&record.columns) {
                if col >= raw.cols() {
                    return Err(Error::Domain(format!(
                        "commit references column {col} but only {} exist",
                        raw.cols()
                    )));
                }
                raw.set_provenance(
                    col,
                    Provenance::Committed {
                        session_id: record.session_id.clone(),
                        axis: *axis,
                    },
                );
            }
        }
        let layout_path = dir.join(LAYOUT_FILE);
        let layout: Option<Layout> = if layout_path.is_file() {
            Some(serde_json::from_slice(&fs::read(layout_path)?)?)
        } else {
            None
        };
        Workspace::restore(id.to_string(), items, raw, commits, layout, seed)
    }

    /// Writes every workspace file, then the checksum index.
    pub fn save(&self, ws: &Workspace) -> Result<()> {
        if !valid_id(ws.dataset_id()) {
            return Err(Error::Domain(format!("invalid dataset id `{}`", ws.dataset_id())));
        }
        let dir = self.dir(ws.dataset_id());
        fs::create_dir_all(&dir)?;

        write_manifest(&dir.join("manifest.json.tmp"), ws.items())?;
        fs::rename(dir.join("manifest.json.tmp"), dir.join(MANIFEST_FILE))?;
        write_features_csv(&dir.join("features.csv.tmp"), ws.raw_features())?;
        fs::rename(dir.join("features.csv.tmp"), dir.join(FEATURES_FILE))?;

        let mut commits = String::new();
        for record in ws.commits() {
            commits.push_str(&serde_json::to_string(record)?);
            commits.push('\n');
        }
        write_atomic(&dir.join(COMMITS_FILE), commits.as_bytes())?;
        write_atomic(&dir.join(LAYOUT_FILE), &serde_json::to_vec(ws.layout())?)?;

        let mut sums = BTreeMap::new();
        for name in TRACKED {
            sums.insert(name.to_string(), sha256_hex(&fs::read(dir.join(name))?));
        }
        write_atomic(&dir.join(CHECKSUMS_FILE), &serde_json::to_vec_pretty(&sums)?)?;
        Ok(())
    }
}

fn read_commits(path: &Path) -> Result<Vec<CommitRecord>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                detail: e.to_string(),
            })
        })
        .collect()
}
