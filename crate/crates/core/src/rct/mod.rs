//! Outcomes and regressions for the randomized experiment, plus the
//! vocabulary and export format it shares with the experiment service.

mod bundle;
mod fit;
mod outcomes;
mod sim;
mod types;

use thiserror::Error;

use crate::classify::ClassifyError;
use crate::model::ModelError;
use crate::stats::StatsError;

pub use bundle::{
    AuthorKind, CommentExport, ExperimentBundle, ParticipantExport, Resolution, SurveyItemExport, SurveyStage,
    COMMENTS_FILE, COMMENT_COLUMNS, PARTICIPANTS_FILE, PARTICIPANT_COLUMNS, SURVEYS_FILE, SURVEY_COLUMNS,
};
pub use fit::{
    fit_grid, fit_rct, grid_report, rct_report, Mode, Outcome, RctFit, RctModel, BASELINE_IH, CUE, CUE_X_IA, CUE_X_IH,
    ENV_IA, ENV_IH, INTERCEPT,
};
pub use outcomes::{
    arm_summary, compute_outcomes, demonstrated_ih, ih_items, pooled_demonstrated_ih, read_outcomes,
    read_outcomes_file, self_reported_change, write_outcomes, Exclusion, LabelMode, OutcomeReport, OutcomeRow,
};
pub use sim::{simulate_outcomes, RctSimConfig};
pub use types::{
    coded_items, coded_mean, ih_item_key, interest_key, reverse_code, stance_key, CueArm, StanceSide, Topic, IH_ITEMS,
    REVERSED_ITEMS, SCALE_MAX, SCALE_MIN,
};

#[derive(Debug, Error)]
pub enum RctError {
    #[error("no attention-passing participants to fit")]
    EmptySample,
    #[error("interaction cell `{0}` has no observations")]
    EmptyCell(String),
    #[error("design is rank deficient; dependent columns: {}", .0.join(", "))]
    RankDeficient(Vec<String>),
    #[error("{0}")]
    InvalidValue(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
