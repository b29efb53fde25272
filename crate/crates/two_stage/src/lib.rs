//! Two-stage stochastic stable matching: a first-stage market, second-stage
//! markets drawn from the same aggregate market, pair costs in both stages
//! and a penalty on students who end up worse off. The expected cost is
//! minimized with one minimum cut over the disjoint union of all markets.

pub mod market;
pub mod objective;
pub mod solve;
pub mod text;
pub mod union;

pub use market::{
    departure_sampler, Market, PairCosts, RankWeights, Sampler, Scenario, Scenarios, SubSpec, TwoStageInstance,
};
pub use objective::{
    add_f3, cost_weights, dissatisfaction, f3_sum_tables, f3_tables, interval_overlap, linear_part_tables,
    minimize_linear, pos, second_stage_best, second_stage_best_with, second_stage_weights, zero_tables,
};
pub use solve::{
    budgeted_sample_count, combine_tables, draw_samples, empirical, evaluate_tuple, hindsight_best, objective_terms,
    sample_count, solve_exp_2sto, solve_exp_2sto_on, solve_saa, two_stage_digraph, ExpSolution, FirstStageEvaluator,
    SaaSolution, SampleBudget,
};
pub use text::{
    parse_scenario_lines, parse_two_stage_text, write_scenario_lines, write_two_stage_text, ScenarioLines,
    ScenarioSource, TwoStageText,
};
pub use union::{disjoint_union, PsiMap, UnionInstance};

use matching_core::{InstanceError, ParseError};
use mincut_framework::FrameworkError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TwoStageError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Framework(#[from] FrameworkError),
    #[error("student {0} is not in the aggregate market")]
    UnknownStudent(usize),
    #[error("school {0} is not in the aggregate market or not kept")]
    UnknownSchool(usize),
    #[error("school `{school}` cannot have quota {quota}")]
    BadQuota { school: String, quota: usize },
    #[error("probabilities sum to {0}, not 1")]
    ProbabilitySum(String),
    #[error("`{0}` is not a probability")]
    BadProbability(String),
    #[error("the penalty coefficient is negative")]
    NegativeLambda,
    #[error("weights need one row per student and one column per school plus the outside option")]
    WeightShape,
    #[error("weights of `{0}` decrease down its preference list")]
    WeightNotMonotone(String),
    #[error("student {0} is not in both stages")]
    NotInBoth(usize),
    #[error("matching of part {0} is not stable")]
    NotStable(usize),
    #[error("matching size does not fit the market")]
    WrongSize,
    #[error("explicit scenarios are required")]
    NeedsExplicit,
    #[error("a sampler is required")]
    NeedsSampler,
    #[error("no scenarios")]
    NoScenarios,
    #[error("epsilon {0} must be positive")]
    BadEpsilon(String),
    #[error("alpha {0} must lie strictly between 0 and 1")]
    BadAlpha(String),
    #[error("cut value {cut} differs from the direct evaluation {direct}")]
    ValueMismatch { cut: String, direct: String },
}
