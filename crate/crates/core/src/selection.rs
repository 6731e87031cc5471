//! Ranking candidate teams by diversity and evaluating the winners.

use std::cmp::Ordering;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::consensus::{consensus, ConsensusMethod};
use crate::diversity::{Direction, Metric};
use crate::error::Result;
use crate::pool::{model_accuracy, CorrectnessMatrix, PredictionPool};
use crate::scalar::Scalar;
use crate::scoring::{score_teams, EvalConfig};
use crate::team::{enumerate_teams, EnsembleTeam};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SizeBounds {
    pub min: usize,
    pub max: usize,
}

impl SizeBounds {
    /// Sizes 2 through `pool_size`.
    pub fn full(pool_size: usize) -> Self {
        Self {
            min: 2,
            max: pool_size,
        }
    }

    pub fn teams(&self, pool_size: usize) -> Result<Vec<EnsembleTeam>> {
        Ok(enumerate_teams(pool_size, self.min, self.max)?.collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedEntry<T> {
    pub rank: usize,
    pub team: EnsembleTeam,
    pub metric: Metric,
    pub score: T,
    pub direction: Direction,
}

/// Total order used for ranking: more diverse first, then smaller teams,
/// then team key.
pub fn rank_order<T: Scalar>(
    direction: Direction,
    (ta, sa): (&EnsembleTeam, T),
    (tb, sb): (&EnsembleTeam, T),
) -> Ordering {
    let by_score = match direction {
        Direction::HigherIsDiverse => sb.partial_cmp(&sa),
        Direction::LowerIsDiverse => sa.partial_cmp(&sb),
    }
    .unwrap_or(Ordering::Equal);
    by_score
        .then(ta.size().cmp(&tb.size()))
        .then_with(|| ta.key().cmp(tb.key()))
}

/// Top `k` teams by `metric`; all of them when `k` exceeds the count.
pub fn rank_teams<T: Scalar>(
    scores: &[(EnsembleTeam, T)],
    metric: Metric,
    k: usize,
) -> Vec<RankedEntry<T>> {
    let direction = metric.direction();
    let mut order: Vec<&(EnsembleTeam, T)> = scores.iter().collect();
    order.sort_by(|a, b| rank_order(direction, (&a.0, a.1), (&b.0, b.1)));
    order
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(i, (team, score))| RankedEntry {
            rank: i + 1,
            team: team.clone(),
            metric,
            score: *score,
            direction,
        })
        .collect()
}

/// One row of a selection report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionRow<T> {
    pub rank: usize,
    pub team: EnsembleTeam,
    pub metric: Metric,
    pub score: T,
    pub ensemble_acc: T,
    pub best_single_acc: T,
    pub improvement: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionReport<T> {
    pub metric: Metric,
    pub consensus: ConsensusMethod,
    pub candidates: usize,
    pub rows: Vec<SelectionRow<T>>,
}

impl<T: Scalar> SelectionReport<T> {
    pub const CSV_HEADER: [&'static str; 7] = [
        "rank",
        "team",
        "metric",
        "score",
        "ensemble_acc",
        "best_single_acc",
        "improvement",
    ];

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::CSV_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.rank.to_string(),
                r.team.key().to_string(),
                r.metric.to_string(),
                r.score.to_string(),
                r.ensemble_acc.to_string(),
                r.best_single_acc.to_string(),
                r.improvement.to_string(),
            ])?;
        }
        w.flush()
    }
}

/// Best member accuracy and consensus accuracy of one team.
pub fn evaluate_team<T: Scalar>(
    pool: &PredictionPool<T>,
    cm: &CorrectnessMatrix,
    team: &EnsembleTeam,
    method: ConsensusMethod,
) -> Result<(T, T)> {
    let mut best = T::zero();
    for &m in team.members() {
        best = best.max(model_accuracy::<T>(cm, m)?);
    }
    Ok((consensus(pool, team, method).accuracy, best))
}

/// Scores every candidate with `metric`, ranks them and evaluates the top `k`.
pub fn select_and_evaluate<T: Scalar>(
    pool: &PredictionPool<T>,
    cm: &CorrectnessMatrix,
    metric: Metric,
    cfg: &EvalConfig<T>,
    k: usize,
    method: ConsensusMethod,
    bounds: SizeBounds,
) -> Result<SelectionReport<T>> {
    let teams = bounds.teams(pool.n_models())?;
    let scores = score_teams(cm, &teams, metric, cfg)?;
    let scored: Vec<(EnsembleTeam, T)> = teams
        .into_iter()
        .zip(scores)
        .map(|(t, s)| (t, s.value))
        .collect();
    let candidates = scored.len();
    let ranked = rank_teams(&scored, metric, k);
    let rows = ranked
        .into_par_iter()
        .map(|e| {
            let (ensemble_acc, best_single_acc) = evaluate_team(pool, cm, &e.team, method)?;
            Ok(SelectionRow {
                rank: e.rank,
                team: e.team,
                metric,
                score: e.score,
                ensemble_acc,
                best_single_acc,
                improvement: ensemble_acc - best_single_acc,
            })
        })
        .collect::<Vec<Result<_>>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(SelectionReport {
        metric,
        consensus: method,
        candidates,
        rows,
    })
}
