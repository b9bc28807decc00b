//! Score fusion, threshold decisions, ROC sweeps, video voting and
//! cross-fold accuracy.

mod crossval;
mod fusion;
mod roc;
mod voting;

pub use crossval::{crossval_evaluate, CrossValSummary, FoldResult};
pub use fusion::{fuse_average, fuse_max, FusionKind};
pub use roc::{classify_frame, roc_sweep, RocPoint, DEFAULT_THRESHOLD, ROC_THRESHOLDS};
pub use voting::{classify_video, classify_videos, VideoVerdict};
