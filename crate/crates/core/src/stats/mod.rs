//! MOS aggregation, DMOS, the OVRL ~ SIG + BAK regression, and run-to-run
//! comparison statistics.

mod aggregate;
mod compare;
mod correlation;
mod rank;
mod regression;

use thiserror::Error;

pub use aggregate::{
    aggregate, aggregate_condition_votes, apply_dmos, attach_conditions, ci95_half_width, t_quantile_975,
    write_scores_csv, ConditionScore, ConditionVote, ScaleStat,
};
pub use compare::{compare_runs, compare_runs_ranked, ComparisonReport, ScaleComparison};
pub use correlation::{average_ranks, pearson, rmse, spearman};
pub use rank::{rank_transform, TransformedScore};
pub use regression::{fit_ovrl_regression, predict_ovrl, OvrlModel, RegressionFit};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("clip {0:?} has no known condition")]
    UnknownClip(String),
    #[error("no votes to aggregate")]
    NoVotes,
    #[error("baseline condition {0:?} not present")]
    MissingBaseline(String),
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("input vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("zero variance; correlation undefined")]
    ZeroVariance,
    #[error("predictors are collinear; regression is singular")]
    Singular,
    #[error("condition sets differ: only in first run {only_a:?}, only in second run {only_b:?}")]
    ConditionMismatch { only_a: Vec<String>, only_b: Vec<String> },
    #[error("duplicate condition {0:?}")]
    DuplicateCondition(String),
    #[error("scores CSV: {0}")]
    Csv(#[from] csv::Error),
}
