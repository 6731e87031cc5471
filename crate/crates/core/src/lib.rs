//! Diversity-driven selection of classifier ensembles.
//!
//! Given the class probabilities a pool of models produced on a shared
//! evaluation set, the crate enumerates candidate teams, scores them with the
//! classical diversity measures (Cohen's kappa, Yule's Q, binary disagreement,
//! generalized diversity, Kohavi-Wolpert variance) and with synergistic
//! diversity (SQ), ranks them, fuses the winners by voting and reports how
//! each measure correlates with ensemble accuracy.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar for the common case.

pub mod analytics;
pub mod bits;
pub mod consensus;
pub mod diversity;
pub mod error;
pub mod io;
pub mod pool;
pub mod scalar;
pub mod scoring;
pub mod selection;
pub mod sq;
pub mod synth;
pub mod team;

pub use analytics::{
    case_study, correlation_report, pearson, scatter_export, scatter_many, spearman, CaseStudy,
    CorrelationMethod, CorrelationReport, Scatter, ScatterRow,
};
pub use consensus::{
    consensus, majority_vote, soft_vote, team_accuracy_table, ConsensusMethod, ConsensusResult,
};
pub use diversity::{
    binary_disagreement, cohen_kappa_diversity, generalized_diversity, kohavi_wolpert,
    negative_samples, pair_contingency, q_statistic, Direction, DiversityScore, Metric,
    NegativeMode, NegativeSampleSet, PairContingency, ScoreNote,
};
pub use error::{Error, Result};
pub use io::{load_pool, write_pool};
pub use pool::{correctness, model_accuracy, CorrectnessMatrix, ModelRecord, PredictionPool};
pub use scalar::Scalar;
pub use scoring::{score_team, score_teams, EvalConfig, SubsetScope};
pub use selection::{
    rank_teams, select_and_evaluate, RankedEntry, SelectionReport, SelectionRow, SizeBounds,
};
pub use sq::{sq_alpha, sq_epsilon, sq_score, AlphaMode, FocalRecord, SqBreakdown, SqConfig};
pub use synth::{generate, planted_best_team, SynthSpec};
pub use team::{enumerate_teams, EnsembleTeam};

pub type Pool = PredictionPool<f64>;
pub type Pool32 = PredictionPool<f32>;
pub type Score = DiversityScore<f64>;
pub type Breakdown = SqBreakdown<f64>;
pub type Report = SelectionReport<f64>;
pub type Config = EvalConfig<f64>;
