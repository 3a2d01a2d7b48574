//! On-disk corpus layout: `<root>/<script_label>/*.pgm`.
//!
//! The train/test split is either sorted-filename parity (even index trains,
//! odd index tests) or an explicit manifest of `path,split` lines.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::{extract_word_features, WordFeatures};
use crate::imaging::{load_word_matrix, save_pgm, BinaryImage};

const IMAGE_EXTENSIONS: [&str; 4] = ["pgm", "pnm", "ppm", "png"];

pub type LabeledPaths = BTreeMap<String, Vec<PathBuf>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetSplit {
    pub train: LabeledPaths,
    pub test: LabeledPaths,
}

fn read_dir_sorted(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut entries = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|e| Error::io(dir, e)))
        .collect::<Result<Vec<_>>>()?;
    entries.sort();
    Ok(entries)
}

fn is_image(path: &Path) -> bool {
    path.is_file()
        && path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

/// Image files per label subdirectory, filenames sorted.
pub fn scan(root: &Path) -> Result<LabeledPaths> {
    let mut out = BTreeMap::new();
    for dir in read_dir_sorted(root)? {
        if !dir.is_dir() {
            continue;
        }
        let Some(label) = dir.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        let files: Vec<PathBuf> = read_dir_sorted(&dir)?.into_iter().filter(|p| is_image(p)).collect();
        if !files.is_empty() {
            out.insert(label.to_string(), files);
        }
    }
    Ok(out)
}

pub fn split_by_parity(all: &LabeledPaths) -> DatasetSplit {
    let mut split = DatasetSplit::default();
    for (label, files) in all {
        let (train, test): (Vec<_>, Vec<_>) = files.iter().enumerate().partition(|(i, _)| i % 2 == 0);
        split
            .train
            .insert(label.clone(), train.into_iter().map(|(_, p)| p.clone()).collect());
        let test: Vec<PathBuf> = test.into_iter().map(|(_, p)| p.clone()).collect();
        if !test.is_empty() {
            split.test.insert(label.clone(), test);
        }
    }
    split
}

/// Parses `path,split` lines. Relative paths resolve against `root`; the label
/// is the name of the file's parent directory. Blank lines, `#` comments and
/// a `path,split` header are skipped.
pub fn parse_manifest(text: &str, root: &Path) -> Result<DatasetSplit> {
    let mut split = DatasetSplit::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = idx + 1;
        if line.is_empty() || line.starts_with('#') || line == "path,split" {
            continue;
        }
        let err = |reason: &str| Error::Manifest {
            line: lineno,
            reason: reason.to_string(),
        };
        let (path, which) = line.rsplit_once(',').ok_or_else(|| err("expected `path,split`"))?;
        let which = match which.trim() {
            "train" => Split::Train,
            "test" => Split::Test,
            other => return Err(err(&format!("unknown split {other:?}"))),
        };
        let path = Path::new(path.trim());
        let path = if path.is_absolute() {
            path.to_path_buf()
        } else {
            root.join(path)
        };
        let label = path
            .parent()
            .and_then(Path::file_name)
            .and_then(|n| n.to_str())
            .ok_or_else(|| err("cannot infer a label from the parent directory"))?
            .to_string();
        let bucket = match which {
            Split::Train => &mut split.train,
            Split::Test => &mut split.test,
        };
        bucket.entry(label).or_default().push(path);
    }
    Ok(split)
}

pub fn load_split(root: &Path, manifest: Option<&Path>) -> Result<DatasetSplit> {
    match manifest {
        Some(m) => {
            let text = std::fs::read_to_string(m).map_err(|e| Error::io(m, e))?;
            parse_manifest(&text, root).map_err(|e| Error::in_file(m, e))
        }
        None => Ok(split_by_parity(&scan(root)?)),
    }
}

/// Loads, binarizes, normalizes and featurizes every image. Input order is
/// preserved within each label.
pub fn featurize(paths: &LabeledPaths, side: usize) -> Result<BTreeMap<String, Vec<WordFeatures>>> {
    paths
        .iter()
        .map(|(label, files)| {
            let feats = files
                .par_iter()
                .map(|p| {
                    load_word_matrix(p, side)
                        .and_then(|m| extract_word_features(&m))
                        .map_err(|e| Error::in_file(p, e))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((label.clone(), feats))
        })
        .collect()
}

/// Writes `<dir>/<label>/<label>_NNNN.pgm`, ink black on white.
pub fn write_corpus(dir: &Path, corpus: &BTreeMap<String, Vec<BinaryImage>>) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (label, images) in corpus {
        let sub = dir.join(label);
        std::fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;
        for (i, img) in images.iter().enumerate() {
            let path = sub.join(format!("{label}_{i:04}.pgm"));
            save_pgm(&img.to_gray(), &path)?;
            written.push(path);
        }
    }
    Ok(written)
}
