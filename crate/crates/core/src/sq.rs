//! Synergistic diversity (SQ).
//!
//! Each member in turn is the focal model. On the samples the focal model gets
//! wrong, the score rewards non-focal members that disagree with it (they are
//! right where it is wrong, SQ-ε) and that agree with each other (SQ-α):
//!
//! ```text
//! SQ(focal) = w_ε · SQ-ε + w_α · SQ-α
//! ```
//!
//! The team score is the mean over focals that have at least one error.

use serde::{Deserialize, Serialize};

use crate::diversity::{
    negative_samples, pair_contingency, DiversityScore, Metric, NegativeMode, NegativeSampleSet,
    ScoreNote,
};
use crate::error::{Error, Result};
use crate::pool::CorrectnessMatrix;
use crate::scalar::Scalar;
use crate::team::EnsembleTeam;

/// What non-focal agreement is measured on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaMode {
    /// Multi-class kappa on predicted labels.
    #[default]
    Labels,
    /// Binary kappa on correctness outcomes.
    Correctness,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqConfig<T> {
    pub w_epsilon: T,
    pub w_alpha: T,
    pub negative_cap: Option<usize>,
    pub seed: u64,
    pub alpha_mode: AlphaMode,
}

impl<T: Scalar> Default for SqConfig<T> {
    fn default() -> Self {
        Self {
            w_epsilon: T::one(),
            w_alpha: T::one(),
            negative_cap: None,
            seed: 0,
            alpha_mode: AlphaMode::Labels,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FocalRecord<T> {
    pub focal_id: usize,
    pub negative_count: usize,
    pub sq_epsilon: T,
    pub sq_alpha: T,
    pub combined: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SqBreakdown<T> {
    pub per_focal: Vec<FocalRecord<T>>,
    pub aggregate: T,
    pub skipped_focals: Vec<usize>,
    pub all_skipped: bool,
}

fn check_focal_set(focal_id: usize, neg: &NegativeSampleSet) -> Result<()> {
    if neg.mode() != NegativeMode::FocalErrs(focal_id) {
        return Err(Error::NegativeModeMismatch);
    }
    if neg.is_empty() {
        return Err(Error::FocalWithoutNegatives { focal: focal_id });
    }
    Ok(())
}

fn non_focal(team: &EnsembleTeam, focal_id: usize) -> Result<Vec<usize>> {
    if !team.contains(focal_id) {
        return Err(Error::InvalidTeam(format!(
            "focal {focal_id} is not a member of {team}"
        )));
    }
    Ok(team
        .members()
        .iter()
        .copied()
        .filter(|&m| m != focal_id)
        .collect())
}

/// Mean binary disagreement between each non-focal member and the focal model
/// on the focal model's negative samples.
pub fn sq_epsilon<T: Scalar>(
    cm: &CorrectnessMatrix,
    team: &EnsembleTeam,
    focal_id: usize,
    neg: &NegativeSampleSet,
) -> Result<T> {
    check_focal_set(focal_id, neg)?;
    let others = non_focal(team, focal_id)?;
    let sum = others
        .iter()
        .map(|&m| pair_contingency(cm, m, focal_id, neg).disagreement::<T>())
        .fold(T::zero(), |a, b| a + b);
    Ok(sum / T::of_usize(others.len()))
}

/// Cohen's kappa between two label sequences restricted to `samples`.
///
/// When chance agreement is certain (both emit one identical class
/// throughout) kappa is 1 if they agree everywhere and 0 otherwise.
pub fn label_kappa<T: Scalar>(a: &[u32], b: &[u32], samples: &[usize]) -> T {
    let n = samples.len() as i128;
    if n == 0 {
        return T::zero();
    }
    let classes = samples
        .iter()
        .map(|&j| a[j].max(b[j]) as usize + 1)
        .max()
        .unwrap_or(1);
    let mut ca = vec![0i128; classes];
    let mut cb = vec![0i128; classes];
    let mut matches = 0i128;
    for &j in samples {
        ca[a[j] as usize] += 1;
        cb[b[j] as usize] += 1;
        matches += (a[j] == b[j]) as i128;
    }
    let chance: i128 = ca.iter().zip(&cb).map(|(x, y)| x * y).sum();
    let den = n * n - chance;
    if den == 0 {
        return if matches == n { T::one() } else { T::zero() };
    }
    T::ratio(matches * n - chance, den)
}

/// Mean pairwise kappa among non-focal members on the focal model's negative
/// samples; zero when there is only one non-focal member.
pub fn sq_alpha<T: Scalar>(
    cm: &CorrectnessMatrix,
    team: &EnsembleTeam,
    focal_id: usize,
    neg: &NegativeSampleSet,
    mode: AlphaMode,
) -> Result<T> {
    check_focal_set(focal_id, neg)?;
    let others = non_focal(team, focal_id)?;
    if others.len() < 2 {
        return Ok(T::zero());
    }
    let mut sum = T::zero();
    let mut pairs = 0usize;
    for (i, &a) in others.iter().enumerate() {
        for &b in &others[i + 1..] {
            let k = match mode {
                AlphaMode::Labels => label_kappa::<T>(cm.labels(a), cm.labels(b), neg.indices()),
                AlphaMode::Correctness => pair_contingency(cm, a, b, neg).kappa::<T>(),
            };
            sum = sum + k;
            pairs += 1;
        }
    }
    Ok(sum / T::of_usize(pairs))
}

/// Round-robin SQ over every member as focal.
pub fn sq_score<T: Scalar>(
    cm: &CorrectnessMatrix,
    team: &EnsembleTeam,
    cfg: &SqConfig<T>,
) -> Result<SqBreakdown<T>> {
    if team.size() < 2 {
        return Err(Error::InvalidTeam(format!(
            "SQ needs at least 2 members, got {team}"
        )));
    }
    let mut per_focal = Vec::with_capacity(team.size());
    let mut skipped_focals = Vec::new();
    for &focal in team.members() {
        let neg = negative_samples(
            cm,
            team,
            NegativeMode::FocalErrs(focal),
            cfg.seed,
            cfg.negative_cap,
        )?;
        if neg.is_empty() {
            skipped_focals.push(focal);
            continue;
        }
        let eps = sq_epsilon::<T>(cm, team, focal, &neg)?;
        let alpha = sq_alpha::<T>(cm, team, focal, &neg, cfg.alpha_mode)?;
        per_focal.push(FocalRecord {
            focal_id: focal,
            negative_count: neg.len(),
            sq_epsilon: eps,
            sq_alpha: alpha,
            combined: cfg.w_epsilon * eps + cfg.w_alpha * alpha,
        });
    }
    let all_skipped = per_focal.is_empty();
    let aggregate = if all_skipped {
        T::zero()
    } else {
        per_focal
            .iter()
            .map(|r| r.combined)
            .fold(T::zero(), |a, b| a + b)
            / T::of_usize(per_focal.len())
    };
    Ok(SqBreakdown {
        per_focal,
        aggregate,
        skipped_focals,
        all_skipped,
    })
}

/// [`sq_score`] packaged as a [`DiversityScore`].
pub fn sq_diversity<T: Scalar>(
    cm: &CorrectnessMatrix,
    team: &EnsembleTeam,
    cfg: &SqConfig<T>,
) -> Result<DiversityScore<T>> {
    let detail = sq_score(cm, team, cfg)?;
    Ok(DiversityScore {
        metric: Metric::Sq,
        value: detail.aggregate,
        note: detail.all_skipped.then_some(ScoreNote::AllFocalsSkipped),
        detail: Some(detail),
    })
}
