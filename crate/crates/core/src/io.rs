//! Manifest + CSV pool format.
//!
//! ```text
//! manifest.json   {"classes": [...], "labels_path": "...", "models": [{"id", "name", "predictions_path"}]}
//! labels.csv      sample_id,true_label
//! <model>.csv     sample_id,p_<class0>,...,p_<classC-1>
//! ```
//!
//! Relative paths in the manifest resolve against the manifest's directory.
//! Samples are joined across files by id; sample order follows the labels file.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pool::{ModelRecord, PredictionPool};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub classes: Vec<String>,
    pub labels_path: PathBuf,
    pub models: Vec<ManifestModel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestModel {
    pub id: usize,
    pub name: String,
    pub predictions_path: PathBuf,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn malformed(path: &Path, line: u64, reason: impl Into<String>) -> Error {
    Error::MalformedRow {
        path: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => malformed(path, line, format!("{other:?}")),
    }
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| Error::Manifest {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads and validates the pool described by a manifest.
///
/// Model ids are assigned `0..M` in ascending order of the ids declared in
/// the manifest; declared ids must be unique but may have gaps.
pub fn load_pool<T: Scalar>(manifest_path: &Path) -> Result<PredictionPool<T>> {
    let manifest = read_manifest(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let resolve = |p: &Path| {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    };

    let classes = manifest.classes;
    let class_index: HashMap<&str, usize> = classes
        .iter()
        .enumerate()
        .map(|(k, c)| (c.as_str(), k))
        .collect();
    if class_index.len() != classes.len() {
        return Err(Error::InvalidPool(
            "duplicate class names in manifest".into(),
        ));
    }

    let labels_path = resolve(&manifest.labels_path);
    let (sample_ids, truth) = read_labels(&labels_path, &class_index)?;
    let position: HashMap<&str, usize> = sample_ids
        .iter()
        .enumerate()
        .map(|(j, s)| (s.as_str(), j))
        .collect();

    let mut entries = manifest.models;
    entries.sort_by_key(|m| m.id);
    if entries.windows(2).any(|w| w[0].id == w[1].id) {
        return Err(Error::InvalidPool("duplicate model id in manifest".into()));
    }
    if entries.len() < 2 {
        return Err(Error::InvalidPool(format!(
            "manifest lists {} model(s), need at least 2",
            entries.len()
        )));
    }

    let (n, c) = (sample_ids.len(), classes.len());
    let mut probs = vec![T::zero(); entries.len() * n * c];
    let mut models = Vec::with_capacity(entries.len());
    for (i, entry) in entries.into_iter().enumerate() {
        let path = resolve(&entry.predictions_path);
        let block = &mut probs[i * n * c..(i + 1) * n * c];
        read_predictions(&path, &entry.name, &classes, &position, block)?;
        models.push(ModelRecord {
            model_id: i,
            name: entry.name,
            predictions_path: path,
        });
    }
    PredictionPool::new(models, classes, sample_ids, truth, probs)
}

fn read_labels(
    path: &Path,
    class_index: &HashMap<&str, usize>,
) -> Result<(Vec<String>, Vec<usize>)> {
    let mut rdr = csv_reader(path)?;
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.len() != 2 || &header[0] != "sample_id" || &header[1] != "true_label" {
        return Err(malformed(path, 1, "expected header sample_id,true_label"));
    }
    let mut ids = Vec::new();
    let mut truth = Vec::new();
    let mut seen = HashSet::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != 2 {
            return Err(malformed(
                path,
                line,
                format!("expected 2 fields, got {}", rec.len()),
            ));
        }
        let (id, label) = (&rec[0], &rec[1]);
        if !seen.insert(id.to_string()) {
            return Err(malformed(path, line, format!("duplicate sample id {id:?}")));
        }
        let k = *class_index.get(label).ok_or_else(|| Error::UnknownClass {
            sample_id: id.to_string(),
            label: label.to_string(),
        })?;
        ids.push(id.to_string());
        truth.push(k);
    }
    Ok((ids, truth))
}

fn read_predictions<T: Scalar>(
    path: &Path,
    model_name: &str,
    classes: &[String],
    position: &HashMap<&str, usize>,
    block: &mut [T],
) -> Result<()> {
    let c = classes.len();
    let mut rdr = csv_reader(path)?;
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let expected: Vec<String> = std::iter::once("sample_id".to_string())
        .chain(classes.iter().map(|k| format!("p_{k}")))
        .collect();
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(malformed(
            path,
            1,
            format!("expected header {}", expected.join(",")),
        ));
    }
    let mut filled = vec![false; position.len()];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != c + 1 {
            return Err(malformed(
                path,
                line,
                format!("expected {} fields, got {}", c + 1, rec.len()),
            ));
        }
        let id = &rec[0];
        let j = *position.get(id).ok_or_else(|| Error::Coverage {
            sample_id: id.to_string(),
            detail: format!("appears in model {model_name:?} but not in the labels file"),
        })?;
        if std::mem::replace(&mut filled[j], true) {
            return Err(malformed(path, line, format!("duplicate sample id {id:?}")));
        }
        for k in 0..c {
            let field = &rec[k + 1];
            block[j * c + k] = field
                .parse::<T>()
                .map_err(|_| malformed(path, line, format!("not a number: {field:?}")))?;
        }
    }
    if let Some(j) = filled.iter().position(|f| !f) {
        let id = position
            .iter()
            .find(|(_, &p)| p == j)
            .map(|(s, _)| *s)
            .unwrap_or("?");
        return Err(Error::Coverage {
            sample_id: id.to_string(),
            detail: format!("is missing from model {model_name:?}"),
        });
    }
    Ok(())
}

/// File name a model's predictions are written under.
pub fn predictions_file_name(model_id: usize) -> String {
    format!("model_{model_id:02}.csv")
}

/// Writes `pool` into `dir` as `manifest.json`, `labels.csv` and one CSV per
/// model; returns the manifest path. Reloading yields the same fingerprint.
pub fn write_pool<T: Scalar>(pool: &PredictionPool<T>, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let labels_name = PathBuf::from("labels.csv");
    {
        let path = dir.join(&labels_name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
        w.write_record(["sample_id", "true_label"])
            .map_err(|e| csv_error(&path, e))?;
        for (id, &t) in pool.sample_ids().iter().zip(pool.truth()) {
            w.write_record([id.as_str(), pool.classes()[t].as_str()])
                .map_err(|e| csv_error(&path, e))?;
        }
        w.flush().map_err(io_err(&path))?;
    }
    let mut models = Vec::with_capacity(pool.n_models());
    for rec in pool.models() {
        let name = PathBuf::from(predictions_file_name(rec.model_id));
        let path = dir.join(&name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
        let header: Vec<String> = std::iter::once("sample_id".to_string())
            .chain(pool.classes().iter().map(|k| format!("p_{k}")))
            .collect();
        w.write_record(&header).map_err(|e| csv_error(&path, e))?;
        let mut fields = Vec::with_capacity(pool.n_classes() + 1);
        for (j, id) in pool.sample_ids().iter().enumerate() {
            fields.clear();
            fields.push(id.clone());
            fields.extend(pool.row(rec.model_id, j).iter().map(|p| p.to_string()));
            w.write_record(&fields).map_err(|e| csv_error(&path, e))?;
        }
        w.flush().map_err(io_err(&path))?;
        models.push(ManifestModel {
            id: rec.model_id,
            name: rec.name.clone(),
            predictions_path: name,
        });
    }
    let manifest = Manifest {
        classes: pool.classes().to_vec(),
        labels_path: labels_name,
        models,
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(io_err(&path))?;
    Ok(path)
}
