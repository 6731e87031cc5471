//! One entry point that scores a team with any metric.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diversity::{
    binary_disagreement, cohen_kappa_diversity, generalized_diversity, kohavi_wolpert,
    negative_samples, q_statistic, DiversityScore, Metric, NegativeMode,
};
use crate::error::{Error, Result};
use crate::pool::CorrectnessMatrix;
use crate::scalar::Scalar;
use crate::sq::{sq_diversity, SqConfig};
use crate::team::EnsembleTeam;

/// Which samples the pairwise and non-pairwise measures see. SQ always uses
/// its own focal negative sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubsetScope {
    /// Samples where at least one member errs.
    #[default]
    Negatives,
    /// Every sample.
    FullSet,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig<T> {
    pub scope: SubsetScope,
    pub neg_cap: Option<usize>,
    pub seed: u64,
    pub sq: SqConfig<T>,
}

impl<T: Scalar> Default for EvalConfig<T> {
    fn default() -> Self {
        Self {
            scope: SubsetScope::Negatives,
            neg_cap: None,
            seed: 0,
            sq: SqConfig::default(),
        }
    }
}

impl<T: Scalar> EvalConfig<T> {
    /// Applies one cap and seed to both the Q measures and SQ.
    pub fn with_sampling(mut self, neg_cap: Option<usize>, seed: u64) -> Self {
        self.neg_cap = neg_cap;
        self.seed = seed;
        self.sq.negative_cap = neg_cap;
        self.sq.seed = seed;
        self
    }
}

pub fn score_team<T: Scalar>(
    cm: &CorrectnessMatrix,
    team: &EnsembleTeam,
    metric: Metric,
    cfg: &EvalConfig<T>,
) -> Result<DiversityScore<T>> {
    if metric == Metric::Sq {
        return sq_diversity(cm, team, &cfg.sq);
    }
    let mode = match cfg.scope {
        SubsetScope::Negatives => NegativeMode::AnyMemberErrs,
        SubsetScope::FullSet => NegativeMode::All,
    };
    let subset = negative_samples(cm, team, mode, cfg.seed, cfg.neg_cap)?;
    match metric {
        Metric::Ck => cohen_kappa_diversity(cm, team, &subset),
        Metric::Qs => q_statistic(cm, team, &subset),
        Metric::Bd => binary_disagreement(cm, team, &subset),
        Metric::Gd => generalized_diversity(cm, team, &subset),
        Metric::Kw => kohavi_wolpert(cm, team, &subset),
        Metric::Sq => unreachable!(),
    }
}

/// Scores every team in parallel; output order follows `teams`. The first
/// failing team in that order is reported, whatever the worker count.
pub fn score_teams<T: Scalar>(
    cm: &CorrectnessMatrix,
    teams: &[EnsembleTeam],
    metric: Metric,
    cfg: &EvalConfig<T>,
) -> Result<Vec<DiversityScore<T>>> {
    teams
        .par_iter()
        .map(|t| {
            score_team(cm, t, metric, cfg).map_err(|e| Error::TeamScoring {
                team: t.key().to_string(),
                metric,
                source: Box::new(e),
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}
