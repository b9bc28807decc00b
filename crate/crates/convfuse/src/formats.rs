//! CSV files: manifests, per-frame scores, ROC curves, fold and training
//! reports.

use std::fs::File;
use std::path::Path;

use convfuse_core::data::{FrameRecord, Manifest};
use convfuse_core::evaluation::{CrossValSummary, RocPoint};
use convfuse_core::training::TrainReport;
use convfuse_core::{ClassLabel, ScorePair};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::files::write_bytes;

#[derive(Debug, Serialize, Deserialize)]
struct ManifestRow {
    video_id: String,
    shot_index: u32,
    image_path: String,
    label: String,
    fold: usize,
}

/// One scored keyframe.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub video_id: String,
    pub shot_index: u32,
    pub score: ScorePair,
}

#[derive(Debug, Deserialize)]
struct RawScoreRow {
    video_id: String,
    shot_index: u32,
    benign_score: f64,
    porn_score: f64,
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(Error::csv(path))
}

fn to_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let flush = |e: csv::Error| Error::data(format!("csv encoding: {e}"));
    w.write_record(header).map_err(flush)?;
    for row in rows {
        w.write_record(&row).map_err(flush)?;
    }
    w.into_inner().map_err(|e| Error::data(format!("csv encoding: {e}")))
}

/// Reads a manifest. Its fold count is one more than the largest fold
/// present, and at least `min_folds`.
pub fn read_manifest(path: &Path, min_folds: usize) -> Result<Manifest> {
    let mut records = Vec::new();
    for row in reader(path)?.deserialize() {
        let row: ManifestRow = row.map_err(Error::csv(path))?;
        let label: ClassLabel = row.label.parse().map_err(Error::file(path))?;
        records.push(FrameRecord {
            video_id: row.video_id,
            shot_index: row.shot_index,
            image_path: row.image_path,
            label,
            fold: row.fold,
        });
    }
    if records.is_empty() {
        return Err(Error::data(format!("{}: manifest has no frames", path.display())));
    }
    let folds = records.iter().map(|r| r.fold + 1).max().unwrap_or(1).max(min_folds);
    Manifest::new(records, folds).map_err(Error::file(path))
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    let rows = manifest.records().iter().map(|r| {
        vec![
            r.video_id.clone(),
            r.shot_index.to_string(),
            r.image_path.clone(),
            r.label.as_str().to_string(),
            r.fold.to_string(),
        ]
    });
    write_bytes(
        path,
        &to_csv(&["video_id", "shot_index", "image_path", "label", "fold"], rows)?,
    )
}

/// Scores are written with nine decimals; the porn column is the exact
/// decimal complement of the rounded benign column, so every row sums to
/// one.
pub fn write_scores(path: &Path, rows: &[ScoreRow]) -> Result<()> {
    let rows = rows.iter().map(|r| {
        let benign = format!("{:.9}", r.score.benign());
        let rounded: f64 = benign.parse().expect("formatted float parses");
        let nanos = (rounded * 1e9).round() as u64;
        let porn = 1_000_000_000 - nanos;
        vec![
            r.video_id.clone(),
            r.shot_index.to_string(),
            benign,
            format!("{}.{:09}", porn / 1_000_000_000, porn % 1_000_000_000),
        ]
    });
    write_bytes(
        path,
        &to_csv(&["video_id", "shot_index", "benign_score", "porn_score"], rows)?,
    )
}

pub fn read_scores(path: &Path) -> Result<Vec<ScoreRow>> {
    let mut out = Vec::new();
    for row in reader(path)?.deserialize() {
        let row: RawScoreRow = row.map_err(Error::csv(path))?;
        let score = ScorePair::new(row.benign_score, row.porn_score).map_err(Error::file(path))?;
        out.push(ScoreRow {
            video_id: row.video_id,
            shot_index: row.shot_index,
            score,
        });
    }
    Ok(out)
}

pub fn write_roc(path: &Path, roc: &[RocPoint]) -> Result<()> {
    let rows = roc.iter().map(|p| {
        vec![
            format!("{}", p.threshold),
            format!("{:.9}", p.benign_as_benign_rate),
            format!("{:.9}", p.porn_as_benign_rate),
        ]
    });
    write_bytes(
        path,
        &to_csv(&["threshold", "benign_as_benign_rate", "porn_as_benign_rate"], rows)?,
    )
}

/// Per-fold rows followed by the summary row `mean,<mean>,std,<std>`.
pub fn write_fold_report(path: &Path, summary: &CrossValSummary) -> Result<()> {
    let rows = summary
        .folds
        .iter()
        .map(|f| {
            vec![
                f.fold.to_string(),
                format!("{:.9}", f.benign_accuracy),
                format!("{:.9}", f.porn_accuracy),
                format!("{:.9}", f.balanced_accuracy),
            ]
        })
        .chain([vec![
            "mean".into(),
            format!("{:.9}", summary.mean),
            "std".into(),
            format!("{:.9}", summary.std),
        ]]);
    write_bytes(
        path,
        &to_csv(&["fold", "benign_acc", "porn_acc", "balanced_acc"], rows)?,
    )
}

pub fn write_train_report(path: &Path, report: &TrainReport) -> Result<()> {
    let rows = report
        .epoch_losses
        .iter()
        .enumerate()
        .map(|(e, l)| vec![(e + 1).to_string(), format!("{l:.12}")]);
    write_bytes(path, &to_csv(&["epoch", "mean_loss"], rows)?)
}
