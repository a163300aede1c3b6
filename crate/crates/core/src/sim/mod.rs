//! Closed-loop simulation: synthetic scenes, a surrogate predictor, a
//! disc-labeling oracle and annotation cost accounting.

mod budget;
mod run;
mod scene;
mod surrogate;

use thiserror::Error;

use crate::aggregation::AggregationError;
use crate::scene::SceneError;
use crate::selection::SelectionError;

pub use budget::{budget_report, BudgetReport, CostModel};
pub use run::{run_loop, ALState, Halt, LoopConfig, RunHistory, StepMetrics, Strategy};
pub use scene::{
    generate_scene, rare_classes, PlantedRegion, SceneParams, SpeedProfile, SyntheticScene, DEFAULT_CLASS_FREQUENCIES,
};
pub use surrogate::{predict, SurrogateModel, DEFAULT_PASS_COUNT};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid parameters: {0}")]
    BadParams(&'static str),
    #[error("initial disc {index} out of range for {candidates} candidates")]
    InitialDisc { index: usize, candidates: usize },
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Aggregation(#[from] AggregationError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
}
