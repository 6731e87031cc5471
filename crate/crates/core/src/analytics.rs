//! Diversity-vs-accuracy scatter data, correlations, and per-sample inspection.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::consensus::{soft_vote_probs, team_accuracy_table, vote_sample, ConsensusMethod};
use crate::diversity::Metric;
use crate::error::{Error, Result};
use crate::pool::{argmax, CorrectnessMatrix, PredictionPool};
use crate::scalar::Scalar;
use crate::scoring::{score_teams, EvalConfig};
use crate::selection::SizeBounds;
use crate::team::EnsembleTeam;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterRow<T> {
    pub team: EnsembleTeam,
    pub size: usize,
    pub score: T,
    pub accuracy: T,
}

/// Scatter rows for several metrics over one shared set of teams.
#[derive(Debug, Clone, PartialEq)]
pub struct Scatter<T> {
    pub consensus: ConsensusMethod,
    pub metrics: BTreeMap<Metric, Vec<ScatterRow<T>>>,
}

/// One row per candidate team: its size, `metric` score and consensus accuracy.
pub fn scatter_export<T: Scalar>(
    pool: &PredictionPool<T>,
    cm: &CorrectnessMatrix,
    metric: Metric,
    cfg: &EvalConfig<T>,
    method: ConsensusMethod,
    bounds: SizeBounds,
) -> Result<Vec<ScatterRow<T>>> {
    let mut s = scatter_many(pool, cm, &[metric], cfg, method, bounds)?;
    Ok(s.metrics.remove(&metric).unwrap_or_default())
}

/// Like [`scatter_export`] for several metrics, computing accuracies once.
pub fn scatter_many<T: Scalar>(
    pool: &PredictionPool<T>,
    cm: &CorrectnessMatrix,
    metrics: &[Metric],
    cfg: &EvalConfig<T>,
    method: ConsensusMethod,
    bounds: SizeBounds,
) -> Result<Scatter<T>> {
    let teams = bounds.teams(pool.n_models())?;
    let acc = team_accuracy_table(pool, &teams, method);
    let mut out = BTreeMap::new();
    for &metric in metrics {
        let scores = score_teams(cm, &teams, metric, cfg)?;
        let rows = teams
            .iter()
            .zip(scores)
            .map(|(t, s)| ScatterRow {
                team: t.clone(),
                size: t.size(),
                score: s.value,
                accuracy: acc[t.key()],
            })
            .collect();
        out.insert(metric, rows);
    }
    Ok(Scatter {
        consensus: method,
        metrics: out,
    })
}

pub fn write_scatter_csv<T: Scalar, W: Write>(
    rows: &[ScatterRow<T>],
    out: W,
) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["team", "size", "score", "accuracy"])?;
    for r in rows {
        w.write_record([
            r.team.key().to_string(),
            r.size.to_string(),
            r.score.to_string(),
            r.accuracy.to_string(),
        ])?;
    }
    w.flush()
}

/// Pearson product-moment correlation.
pub fn pearson<T: Scalar>(xs: &[T], ys: &[T]) -> Result<T> {
    if xs.len() != ys.len() {
        return Err(Error::UndefinedCorrelation("sequences differ in length"));
    }
    if xs.len() < 2 {
        return Err(Error::UndefinedCorrelation("fewer than two points"));
    }
    let n = T::of_usize(xs.len());
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx == T::zero() || syy == T::zero() {
        return Err(Error::UndefinedCorrelation("zero variance"));
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Ok(r.max(-T::one()).min(T::one()))
}

/// Ranks starting at 1, ties sharing their mean rank.
pub fn fractional_ranks<T: Scalar>(xs: &[T]) -> Vec<T> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| {
        xs[a]
            .partial_cmp(&xs[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut ranks = vec![T::zero(); xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        // positions i..=j share ranks i+1..=j+1
        let mean = T::of((i + j) as f64 / 2.0 + 1.0);
        for &k in &idx[i..=j] {
            ranks[k] = mean;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation (Pearson on fractional ranks).
pub fn spearman<T: Scalar>(xs: &[T], ys: &[T]) -> Result<T> {
    if xs.len() != ys.len() {
        return Err(Error::UndefinedCorrelation("sequences differ in length"));
    }
    pearson(&fractional_ranks(xs), &fractional_ranks(ys))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationMethod {
    #[default]
    Pearson,
    Spearman,
}

impl FromStr for CorrelationMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "pearson" => Ok(Self::Pearson),
            "spearman" => Ok(Self::Spearman),
            other => Err(format!("unknown correlation {other:?} (pearson|spearman)")),
        }
    }
}

impl fmt::Display for CorrelationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pearson => "pearson",
            Self::Spearman => "spearman",
        })
    }
}

impl CorrelationMethod {
    pub fn apply<T: Scalar>(self, xs: &[T], ys: &[T]) -> Result<T> {
        match self {
            Self::Pearson => pearson(xs, ys),
            Self::Spearman => spearman(xs, ys),
        }
    }
}

/// Correlation of each metric's scores with team accuracy; `None` where the
/// correlation is undefined (e.g. constant scores).
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport<T> {
    pub method: CorrelationMethod,
    pub coefficients: BTreeMap<Metric, Option<T>>,
}

impl<T: Scalar> CorrelationReport<T> {
    pub fn from_scatter(scatter: &Scatter<T>, method: CorrelationMethod) -> Self {
        let coefficients = scatter
            .metrics
            .iter()
            .map(|(&m, rows)| {
                let xs: Vec<T> = rows.iter().map(|r| r.score).collect();
                let ys: Vec<T> = rows.iter().map(|r| r.accuracy).collect();
                (m, method.apply(&xs, &ys).ok())
            })
            .collect();
        Self {
            method,
            coefficients,
        }
    }

    pub fn get(&self, metric: Metric) -> Option<T> {
        self.coefficients.get(&metric).copied().flatten()
    }

    /// `{"ck": -0.42, "sq": 0.55, ...}` with `null` for undefined entries.
    pub fn to_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .coefficients
            .iter()
            .map(|(m, c)| (m.to_string(), c.map(|v| v.as_f64()).into()))
            .collect();
        serde_json::Value::Object(map)
    }
}

pub fn correlation_report<T: Scalar>(
    pool: &PredictionPool<T>,
    cm: &CorrectnessMatrix,
    metrics: &[Metric],
    cfg: &EvalConfig<T>,
    consensus: ConsensusMethod,
    bounds: SizeBounds,
    method: CorrelationMethod,
) -> Result<CorrelationReport<T>> {
    let scatter = scatter_many(pool, cm, metrics, cfg, consensus, bounds)?;
    if scatter.metrics.values().next().map_or(0, Vec::len) < 2 {
        return Err(Error::UndefinedCorrelation(
            "fewer than two candidate teams",
        ));
    }
    Ok(CorrelationReport::from_scatter(&scatter, method))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemberPrediction<T> {
    pub model_id: usize,
    pub name: String,
    pub probs: Vec<T>,
    pub label: String,
    pub correct: bool,
}

/// How one team handled one sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseStudy<T> {
    pub team: EnsembleTeam,
    pub sample_id: String,
    pub truth: String,
    pub consensus_method: ConsensusMethod,
    pub members: Vec<MemberPrediction<T>>,
    pub mean_probs: Vec<T>,
    pub consensus_label: String,
    pub consensus_correct: bool,
}

pub fn case_study<T: Scalar>(
    pool: &PredictionPool<T>,
    team: &EnsembleTeam,
    sample_id: &str,
    method: ConsensusMethod,
) -> Result<CaseStudy<T>> {
    let j = pool
        .sample_position(sample_id)
        .ok_or_else(|| Error::UnknownSample(sample_id.to_string()))?;
    if let Some(&id) = team.members().iter().find(|&&m| m >= pool.n_models()) {
        return Err(Error::UnknownModel {
            id,
            models: pool.n_models(),
        });
    }
    let truth = pool.truth()[j];
    let members = team
        .members()
        .iter()
        .map(|&m| {
            let probs = pool.row(m, j).to_vec();
            let k = argmax(&probs);
            MemberPrediction {
                model_id: m,
                name: pool.models()[m].name.clone(),
                label: pool.classes()[k].clone(),
                correct: k == truth,
                probs,
            }
        })
        .collect();
    let k = vote_sample(pool, team, j, method);
    Ok(CaseStudy {
        team: team.clone(),
        sample_id: sample_id.to_string(),
        truth: pool.classes()[truth].clone(),
        consensus_method: method,
        members,
        mean_probs: soft_vote_probs(pool, team, j),
        consensus_label: pool.classes()[k].clone(),
        consensus_correct: k == truth,
    })
}
