//! Classical team diversity measures over binary correctness outcomes.
//!
//! Every measure is evaluated on a subset of samples, normally the samples on
//! which at least one team member is wrong. Pairwise measures (kappa, Yule's Q,
//! disagreement) are averaged over unordered member pairs.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitRow;
use crate::error::{Error, Result};
use crate::pool::CorrectnessMatrix;
use crate::scalar::Scalar;
use crate::sq::SqBreakdown;
use crate::team::EnsembleTeam;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// Cohen's kappa, reported as `1 - kappa`.
    Ck,
    /// Yule's Q statistic, raw (lower is more diverse).
    Qs,
    /// Binary disagreement.
    Bd,
    /// Partridge-Krzanowski generalized diversity.
    Gd,
    /// Kohavi-Wolpert variance.
    Kw,
    /// Synergistic diversity.
    Sq,
}

impl Metric {
    pub const ALL: [Metric; 6] = [Self::Ck, Self::Qs, Self::Bd, Self::Gd, Self::Kw, Self::Sq];

    pub fn direction(self) -> Direction {
        match self {
            Self::Qs => Direction::LowerIsDiverse,
            _ => Direction::HigherIsDiverse,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Ck => "ck",
            Self::Qs => "qs",
            Self::Bd => "bd",
            Self::Gd => "gd",
            Self::Kw => "kw",
            Self::Sq => "sq",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim().to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown metric {s:?} (ck|qs|bd|gd|kw|sq)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    HigherIsDiverse,
    LowerIsDiverse,
}

/// Marks a score that fell back to its "no diversity information" value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreNote {
    /// Generalized diversity on a subset where no member fails.
    NoFailures,
    /// SQ where no member has a negative sample to act as focal.
    AllFocalsSkipped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiversityScore<T> {
    pub metric: Metric,
    pub value: T,
    pub note: Option<ScoreNote>,
    pub detail: Option<SqBreakdown<T>>,
}

impl<T> DiversityScore<T> {
    fn plain(metric: Metric, value: T) -> Self {
        Self {
            metric,
            value,
            note: None,
            detail: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NegativeMode {
    /// Samples where at least one team member is wrong.
    AnyMemberErrs,
    /// Samples where the given focal model is wrong.
    FocalErrs(usize),
    /// Every sample of the pool.
    All,
}

/// An ordered set of sample positions a measure is evaluated on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegativeSampleSet {
    indices: Vec<usize>,
    mask: BitRow,
    mode: NegativeMode,
    seed: u64,
    cap: Option<usize>,
}

impl NegativeSampleSet {
    /// Wraps explicit sample positions, e.g. for evaluating a hand-picked subset.
    pub fn from_indices(n_samples: usize, mut indices: Vec<usize>, mode: NegativeMode) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self {
            mask: BitRow::from_indices(n_samples, &indices),
            indices,
            mode,
            seed: 0,
            cap: None,
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn mask(&self) -> &BitRow {
        &self.mask
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn mode(&self) -> NegativeMode {
        self.mode
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn cap(&self) -> Option<usize> {
        self.cap
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream seed for one (team, mode) draw, so that teams sampled in any order
/// or in parallel get reproducible subsets.
fn draw_seed(seed: u64, team: &EnsembleTeam, mode: NegativeMode) -> u64 {
    let tag = match mode {
        NegativeMode::AnyMemberErrs => 1u64,
        NegativeMode::FocalErrs(f) => 2 + ((f as u64) << 8),
        NegativeMode::All => 3,
    };
    let mut h = splitmix64(seed ^ splitmix64(tag));
    for &m in team.members() {
        h = splitmix64(h ^ m as u64);
    }
    h
}

/// Collects the samples a team is evaluated on. Without a cap every
/// qualifying sample is used; with one, a uniform subset of size
/// `min(cap, qualifying)` is drawn deterministically from `seed`.
/// An empty result is not an error.
pub fn negative_samples(
    cm: &CorrectnessMatrix,
    team: &EnsembleTeam,
    mode: NegativeMode,
    seed: u64,
    cap: Option<usize>,
) -> Result<NegativeSampleSet> {
    for &m in team.members() {
        cm.check_model(m)?;
    }
    let n = cm.n_samples();
    let qualifying: Vec<usize> = match mode {
        NegativeMode::All => (0..n).collect(),
        NegativeMode::FocalErrs(f) => {
            if !team.contains(f) {
                return Err(Error::InvalidTeam(format!(
                    "focal {f} is not a member of {team}"
                )));
            }
            let row = cm.row(f);
            (0..n).filter(|&j| !row.get(j)).collect()
        }
        NegativeMode::AnyMemberErrs => {
            let mut any_wrong = vec![0u64; n.div_ceil(64)];
            for &m in team.members() {
                for (acc, w) in any_wrong.iter_mut().zip(cm.row(m).words()) {
                    *acc |= !w;
                }
            }
            (0..n)
                .filter(|&j| any_wrong[j / 64] >> (j % 64) & 1 == 1)
                .collect()
        }
    };
    let indices = match cap {
        Some(cap) if cap < qualifying.len() => {
            let mut rng = ChaCha8Rng::seed_from_u64(draw_seed(seed, team, mode));
            let mut picked: Vec<usize> = index::sample(&mut rng, qualifying.len(), cap)
                .into_iter()
                .map(|i| qualifying[i])
                .collect();
            picked.sort_unstable();
            picked
        }
        _ => qualifying,
    };
    Ok(NegativeSampleSet {
        mask: BitRow::from_indices(n, &indices),
        indices,
        mode,
        seed,
        cap,
    })
}

/// Joint correctness counts of two models over a subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PairContingency {
    /// both correct
    pub n11: u64,
    /// first correct, second wrong
    pub n10: u64,
    /// first wrong, second correct
    pub n01: u64,
    /// both wrong
    pub n00: u64,
}

impl PairContingency {
    pub fn total(&self) -> u64 {
        self.n11 + self.n10 + self.n01 + self.n00
    }

    /// Cohen's kappa on the 2x2 table; a zero denominator means the pair is
    /// perfectly redundant and kappa is 1.
    pub fn kappa<T: Scalar>(&self) -> T {
        let (a, b, c, d) = (
            self.n11 as i128,
            self.n10 as i128,
            self.n01 as i128,
            self.n00 as i128,
        );
        let den = (a + b) * (b + d) + (a + c) * (c + d);
        if den == 0 {
            return T::one();
        }
        T::ratio(2 * (a * d - c * b), den)
    }

    /// Yule's Q. When undefined it is 1 if the pair never disagrees and 0
    /// otherwise.
    pub fn yule_q<T: Scalar>(&self) -> T {
        let (a, b, c, d) = (
            self.n11 as i128,
            self.n10 as i128,
            self.n01 as i128,
            self.n00 as i128,
        );
        let den = a * d + c * b;
        if den == 0 {
            return if b + c == 0 { T::one() } else { T::zero() };
        }
        T::ratio(a * d - c * b, den)
    }

    pub fn disagreement<T: Scalar>(&self) -> T {
        let total = self.total();
        if total == 0 {
            return T::zero();
        }
        T::ratio((self.n10 + self.n01) as i128, total as i128)
    }
}

pub fn pair_contingency(
    cm: &CorrectnessMatrix,
    model_a: usize,
    model_b: usize,
    subset: &NegativeSampleSet,
) -> PairContingency {
    let (a, b, m) = (
        cm.row(model_a).words(),
        cm.row(model_b).words(),
        subset.mask().words(),
    );
    let mut t = PairContingency::default();
    for ((&a, &b), &m) in a.iter().zip(b).zip(m) {
        t.n11 += (a & b & m).count_ones() as u64;
        t.n10 += (a & !b & m).count_ones() as u64;
        t.n01 += (!a & b & m).count_ones() as u64;
        t.n00 += (!a & !b & m).count_ones() as u64;
    }
    t
}

fn require_subset(metric: Metric, subset: &NegativeSampleSet) -> Result<()> {
    if subset.is_empty() {
        Err(Error::UndefinedDiversity { metric })
    } else {
        Ok(())
    }
}

fn pairwise_mean<T: Scalar>(
    cm: &CorrectnessMatrix,
    team: &EnsembleTeam,
    subset: &NegativeSampleSet,
    per_pair: impl Fn(&PairContingency) -> T,
) -> T {
    let ids = team.members();
    let mut sum = T::zero();
    let mut pairs = 0usize;
    for (i, &a) in ids.iter().enumerate() {
        for &b in &ids[i + 1..] {
            sum = sum + per_pair(&pair_contingency(cm, a, b, subset));
            pairs += 1;
        }
    }
    sum / T::of_usize(pairs)
}

/// Mean over member pairs of `1 - kappa` on correctness outcomes.
pub fn cohen_kappa_diversity<T: Scalar>(
    cm: &CorrectnessMatrix,
    team: &EnsembleTeam,
    subset: &NegativeSampleSet,
) -> Result<DiversityScore<T>> {
    require_subset(Metric::Ck, subset)?;
    let v = pairwise_mean(cm, team, subset, |t| T::one() - t.kappa::<T>());
    Ok(DiversityScore::plain(Metric::Ck, v))
}

/// Mean over member pairs of Yule's Q.
pub fn q_statistic<T: Scalar>(
    cm: &CorrectnessMatrix,
    team: &EnsembleTeam,
    subset: &NegativeSampleSet,
) -> Result<DiversityScore<T>> {
    require_subset(Metric::Qs, subset)?;
    let v = pairwise_mean(cm, team, subset, PairContingency::yule_q::<T>);
    Ok(DiversityScore::plain(Metric::Qs, v))
}

/// Mean over member pairs of the fraction of samples where exactly one is right.
pub fn binary_disagreement<T: Scalar>(
    cm: &CorrectnessMatrix,
    team: &EnsembleTeam,
    subset: &NegativeSampleSet,
) -> Result<DiversityScore<T>> {
    require_subset(Metric::Bd, subset)?;
    let v = pairwise_mean(cm, team, subset, PairContingency::disagreement::<T>);
    Ok(DiversityScore::plain(Metric::Bd, v))
}

/// Number of team members correct on each subset sample.
fn correct_counts(
    cm: &CorrectnessMatrix,
    team: &EnsembleTeam,
    subset: &NegativeSampleSet,
) -> Vec<u64> {
    subset
        .indices()
        .iter()
        .map(|&j| {
            team.members()
                .iter()
                .filter(|&&m| cm.is_correct(m, j))
                .count() as u64
        })
        .collect()
}

/// `1 - p(2)/p(1)`, where p(1) is the probability that a randomly chosen
/// member fails and p(2) that two distinct randomly chosen members both fail.
pub fn generalized_diversity<T: Scalar>(
    cm: &CorrectnessMatrix,
    team: &EnsembleTeam,
    subset: &NegativeSampleSet,
) -> Result<DiversityScore<T>> {
    require_subset(Metric::Gd, subset)?;
    let size = team.size() as i128;
    let (mut f1, mut f2) = (0i128, 0i128);
    for l in correct_counts(cm, team, subset) {
        let fails = size - l as i128;
        f1 += fails;
        f2 += fails * (fails - 1);
    }
    if f1 == 0 {
        return Ok(DiversityScore {
            note: Some(ScoreNote::NoFailures),
            ..DiversityScore::plain(Metric::Gd, T::zero())
        });
    }
    // p(2)/p(1) = f2 / ((size - 1) * f1)
    let v = T::one() - T::ratio(f2, (size - 1) * f1);
    Ok(DiversityScore::plain(Metric::Gd, v))
}

/// `1/(n s^2) * sum_j l_j (s - l_j)` with `l_j` correct members on sample j.
pub fn kohavi_wolpert<T: Scalar>(
    cm: &CorrectnessMatrix,
    team: &EnsembleTeam,
    subset: &NegativeSampleSet,
) -> Result<DiversityScore<T>> {
    require_subset(Metric::Kw, subset)?;
    let size = team.size() as i128;
    let spread: i128 = correct_counts(cm, team, subset)
        .into_iter()
        .map(|l| l as i128 * (size - l as i128))
        .sum();
    let v = T::ratio(spread, subset.len() as i128 * size * size);
    Ok(DiversityScore::plain(Metric::Kw, v))
}
