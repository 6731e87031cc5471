//! Fusing member predictions into one ensemble prediction.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::pool::{argmax, PredictionPool};
use crate::scalar::Scalar;
use crate::team::EnsembleTeam;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConsensusMethod {
    /// Average the members' probability vectors, take the argmax.
    #[default]
    SoftVoting,
    /// Plurality over member argmax labels.
    MajorityVoting,
}

impl fmt::Display for ConsensusMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::SoftVoting => "soft-voting",
            Self::MajorityVoting => "majority-voting",
        })
    }
}

impl FromStr for ConsensusMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "soft" | "soft-voting" => Ok(Self::SoftVoting),
            "majority" | "majority-voting" => Ok(Self::MajorityVoting),
            other => Err(format!(
                "unknown consensus method {other:?} (soft|majority)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusResult<T> {
    pub method: ConsensusMethod,
    pub predicted: Vec<usize>,
    pub accuracy: T,
}

/// Summed or averaged probabilities within this many machine epsilons of the
/// maximum count as tied; ties go to the lowest class index. Without it,
/// rounding in rescaled or reordered inputs could flip exact ties.
pub const TIE_EPSILONS: f64 = 64.0;

fn tie_tolerance<T: Scalar>() -> T {
    T::epsilon() * T::of(TIE_EPSILONS)
}

/// Lowest index whose value is within the tie tolerance of the maximum.
pub fn tolerant_argmax<T: Scalar>(xs: &[T]) -> usize {
    let max = xs.iter().copied().fold(T::neg_infinity(), T::max);
    let floor = max - tie_tolerance::<T>();
    xs.iter().position(|&x| x >= floor).unwrap_or(0)
}

/// Mean probability vector of the team on one sample.
pub fn soft_vote_probs<T: Scalar>(
    pool: &PredictionPool<T>,
    team: &EnsembleTeam,
    sample: usize,
) -> Vec<T> {
    let mut acc = vec![T::zero(); pool.n_classes()];
    for &m in team.members() {
        for (a, &p) in acc.iter_mut().zip(pool.row(m, sample)) {
            *a = *a + p;
        }
    }
    let s = T::of_usize(team.size());
    acc.iter_mut().for_each(|a| *a = *a / s);
    acc
}

/// Ensemble label for one sample.
pub fn vote_sample<T: Scalar>(
    pool: &PredictionPool<T>,
    team: &EnsembleTeam,
    sample: usize,
    method: ConsensusMethod,
) -> usize {
    match method {
        ConsensusMethod::SoftVoting => tolerant_argmax(&soft_vote_probs(pool, team, sample)),
        ConsensusMethod::MajorityVoting => majority_sample(pool, team, sample),
    }
}

fn majority_sample<T: Scalar>(
    pool: &PredictionPool<T>,
    team: &EnsembleTeam,
    sample: usize,
) -> usize {
    let c = pool.n_classes();
    let mut votes = vec![0usize; c];
    let mut mass = vec![T::zero(); c];
    for &m in team.members() {
        let row = pool.row(m, sample);
        votes[argmax(row)] += 1;
        for (a, &p) in mass.iter_mut().zip(row) {
            *a = *a + p;
        }
    }
    // most votes, then most summed probability, then lowest class index
    let top = votes.iter().copied().max().unwrap_or(0);
    let tied_mass: Vec<T> = (0..c)
        .map(|k| {
            if votes[k] == top {
                mass[k]
            } else {
                T::neg_infinity()
            }
        })
        .collect();
    tolerant_argmax(&tied_mass)
}

pub fn consensus<T: Scalar>(
    pool: &PredictionPool<T>,
    team: &EnsembleTeam,
    method: ConsensusMethod,
) -> ConsensusResult<T> {
    let predicted: Vec<usize> = (0..pool.n_samples())
        .map(|j| vote_sample(pool, team, j, method))
        .collect();
    let hits = predicted
        .iter()
        .zip(pool.truth())
        .filter(|(p, t)| p == t)
        .count();
    ConsensusResult {
        method,
        accuracy: T::ratio(hits as i128, predicted.len() as i128),
        predicted,
    }
}

pub fn soft_vote<T: Scalar>(pool: &PredictionPool<T>, team: &EnsembleTeam) -> ConsensusResult<T> {
    consensus(pool, team, ConsensusMethod::SoftVoting)
}

pub fn majority_vote<T: Scalar>(
    pool: &PredictionPool<T>,
    team: &EnsembleTeam,
) -> ConsensusResult<T> {
    consensus(pool, team, ConsensusMethod::MajorityVoting)
}

/// Consensus accuracy of every team, keyed by team key.
pub fn team_accuracy_table<T: Scalar>(
    pool: &PredictionPool<T>,
    teams: &[EnsembleTeam],
    method: ConsensusMethod,
) -> BTreeMap<String, T> {
    teams
        .par_iter()
        .map(|t| (t.key().to_string(), consensus(pool, t, method).accuracy))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}
