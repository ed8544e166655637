//! Metrics, the cross-validation driver, rank statistics and the
//! hypersphere-volume analysis.

mod cv;
mod metrics;
mod ranks;
mod volume;

pub use cv::{mean_std, run_cv, Cell, CvConfig, CvOutcome, EvalReport, FoldResult, Grid, Method};
pub use metrics::{f1_macro, inside_rate};
pub use ranks::{average_ranks, friedman_nemenyi, RankResult, ScoreTable, SignificantPair};
pub use volume::hypersphere_volume;
