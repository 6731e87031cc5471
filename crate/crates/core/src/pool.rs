//! The immutable prediction pool and the correctness matrix derived from it.

use std::collections::HashMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bits::BitRow;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Tolerance on per-row probability sums accepted by validation.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub model_id: usize,
    pub name: String,
    pub predictions_path: PathBuf,
}

/// Class probabilities of `M` models on `N` samples over `C` classes.
///
/// Probabilities are stored flat in `[model][sample][class]` order.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionPool<T> {
    models: Vec<ModelRecord>,
    classes: Vec<String>,
    sample_ids: Vec<String>,
    truth: Vec<usize>,
    probs: Vec<T>,
    sample_index: HashMap<String, usize>,
}

impl<T: Scalar> PredictionPool<T> {
    /// Assembles and validates a pool. Rows are checked against
    /// [`ROW_SUM_TOLERANCE`] and rescaled when they drift beyond rounding.
    pub fn new(
        models: Vec<ModelRecord>,
        classes: Vec<String>,
        sample_ids: Vec<String>,
        truth: Vec<usize>,
        mut probs: Vec<T>,
    ) -> Result<Self> {
        let (m, n, c) = (models.len(), sample_ids.len(), classes.len());
        if m < 2 {
            return Err(Error::InvalidPool(format!(
                "need at least 2 models, got {m}"
            )));
        }
        if c < 2 {
            return Err(Error::InvalidPool(format!(
                "need at least 2 classes, got {c}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidPool("no samples".into()));
        }
        for (i, rec) in models.iter().enumerate() {
            if rec.model_id != i {
                return Err(Error::InvalidPool(format!(
                    "model ids must be 0..{m} in order, found {} at position {i}",
                    rec.model_id
                )));
            }
        }
        if truth.len() != n {
            return Err(Error::InvalidPool(format!(
                "{} truth labels for {n} samples",
                truth.len()
            )));
        }
        if let Some((j, &t)) = truth.iter().enumerate().find(|(_, &t)| t >= c) {
            return Err(Error::UnknownClass {
                sample_id: sample_ids[j].clone(),
                label: t.to_string(),
            });
        }
        if probs.len() != m * n * c {
            return Err(Error::InvalidPool(format!(
                "probability tensor has {} cells, expected {m}x{n}x{c}",
                probs.len()
            )));
        }
        let mut sample_index = HashMap::with_capacity(n);
        for (j, id) in sample_ids.iter().enumerate() {
            if sample_index.insert(id.clone(), j).is_some() {
                return Err(Error::InvalidPool(format!("duplicate sample id {id:?}")));
            }
        }
        for (row_no, row) in probs.chunks_mut(c).enumerate() {
            let (i, j) = (row_no / n, row_no % n);
            normalize_row(row).map_err(|sum| Error::Normalization {
                path: models[i].predictions_path.clone(),
                sample_id: sample_ids[j].clone(),
                sum,
            })?;
        }
        Ok(Self {
            models,
            classes,
            sample_ids,
            truth,
            probs,
            sample_index,
        })
    }

    pub fn n_models(&self) -> usize {
        self.models.len()
    }

    pub fn n_samples(&self) -> usize {
        self.sample_ids.len()
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn models(&self) -> &[ModelRecord] {
        &self.models
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn truth(&self) -> &[usize] {
        &self.truth
    }

    pub fn sample_position(&self, sample_id: &str) -> Option<usize> {
        self.sample_index.get(sample_id).copied()
    }

    /// Probability vector of `model` on `sample`.
    #[inline]
    pub fn row(&self, model: usize, sample: usize) -> &[T] {
        let c = self.n_classes();
        let start = (model * self.n_samples() + sample) * c;
        &self.probs[start..start + c]
    }

    pub fn model_by_name(&self, name: &str) -> Option<&ModelRecord> {
        self.models.iter().find(|m| m.name == name)
    }

    /// Content hash over classes, samples, truth, model names and the exact
    /// bits of every probability.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        let put_str = |h: &mut Sha256, s: &str| {
            h.update((s.len() as u64).to_le_bytes());
            h.update(s.as_bytes());
        };
        h.update((self.n_models() as u64).to_le_bytes());
        h.update((self.n_samples() as u64).to_le_bytes());
        h.update((self.n_classes() as u64).to_le_bytes());
        for c in &self.classes {
            put_str(&mut h, c);
        }
        for m in &self.models {
            put_str(&mut h, &m.name);
        }
        for (id, &t) in self.sample_ids.iter().zip(&self.truth) {
            put_str(&mut h, id);
            h.update((t as u64).to_le_bytes());
        }
        for p in &self.probs {
            h.update(p.as_f64().to_bits().to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

/// Validates one probability row and rescales it if its sum drifted past
/// accumulated rounding. Returns the offending sum on failure.
fn normalize_row<T: Scalar>(row: &mut [T]) -> std::result::Result<(), f64> {
    let mut sum = T::zero();
    for &p in row.iter() {
        if !(p >= T::zero() && p <= T::one()) {
            return Err(p.as_f64());
        }
        sum = sum + p;
    }
    let s = sum.as_f64();
    if (s - 1.0).abs() > ROW_SUM_TOLERANCE {
        return Err(s);
    }
    let rounding = T::epsilon() * T::of_usize(4 * row.len());
    if (sum - T::one()).abs() > rounding {
        for p in row.iter_mut() {
            *p = *p / sum;
        }
    }
    Ok(())
}

/// Index of the largest entry; ties go to the lowest index.
#[inline]
pub fn argmax<T: PartialOrd + Copy>(row: &[T]) -> usize {
    let mut best = 0;
    for (k, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = k;
        }
    }
    best
}

/// Per-model argmax labels and the correctness bits they imply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrectnessMatrix {
    bits: Vec<BitRow>,
    labels: Vec<Vec<u32>>,
    derived_from: String,
}

impl CorrectnessMatrix {
    /// Builds a matrix directly from correctness bits, for callers that have
    /// no probabilities. Labels are synthesized: truth is taken as class 0
    /// and a wrong prediction as class 1.
    pub fn from_bits(rows: Vec<BitRow>) -> Result<Self> {
        let n = rows.first().map(BitRow::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidPool(
                "correctness rows differ in length".into(),
            ));
        }
        let labels = rows
            .iter()
            .map(|r| r.iter().map(|b| if b { 0 } else { 1 }).collect())
            .collect();
        Ok(Self {
            bits: rows,
            labels,
            derived_from: String::new(),
        })
    }

    pub fn n_models(&self) -> usize {
        self.bits.len()
    }

    pub fn n_samples(&self) -> usize {
        self.bits.first().map(BitRow::len).unwrap_or(0)
    }

    #[inline]
    pub fn is_correct(&self, model: usize, sample: usize) -> bool {
        self.bits[model].get(sample)
    }

    pub fn row(&self, model: usize) -> &BitRow {
        &self.bits[model]
    }

    /// Predicted (argmax) labels of `model`.
    pub fn labels(&self, model: usize) -> &[u32] {
        &self.labels[model]
    }

    /// Fingerprint of the pool this matrix was derived from; empty when built
    /// from raw bits.
    pub fn derived_from(&self) -> &str {
        &self.derived_from
    }

    pub fn check_model(&self, id: usize) -> Result<()> {
        if id < self.n_models() {
            Ok(())
        } else {
            Err(Error::UnknownModel {
                id,
                models: self.n_models(),
            })
        }
    }
}

/// Marks `bits[i][j]` true iff model `i`'s argmax on sample `j` equals the truth.
pub fn correctness<T: Scalar>(pool: &PredictionPool<T>) -> CorrectnessMatrix {
    let n = pool.n_samples();
    let mut bits = Vec::with_capacity(pool.n_models());
    let mut labels = Vec::with_capacity(pool.n_models());
    for i in 0..pool.n_models() {
        let mut row = BitRow::zeros(n);
        let mut lab = Vec::with_capacity(n);
        for j in 0..n {
            let k = argmax(pool.row(i, j));
            row.set(j, k == pool.truth()[j]);
            lab.push(k as u32);
        }
        bits.push(row);
        labels.push(lab);
    }
    CorrectnessMatrix {
        bits,
        labels,
        derived_from: pool.fingerprint(),
    }
}

/// Fraction of samples `model_id` gets right.
pub fn model_accuracy<T: Scalar>(cm: &CorrectnessMatrix, model_id: usize) -> Result<T> {
    cm.check_model(model_id)?;
    let n = cm.n_samples();
    if n == 0 {
        return Ok(T::zero());
    }
    Ok(T::ratio(cm.row(model_id).count_ones() as i128, n as i128))
}
