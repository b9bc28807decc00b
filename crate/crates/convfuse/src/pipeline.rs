//! Pipeline stages behind the command line: corpus synthesis, fold
//! preparation, training, held-out scoring and reporting.
//!
//! A prepared corpus directory holds `manifest.csv` (image paths relative
//! to the directory) and one `mean_fold{N}.bin` per fold, each the mean
//! image of every frame outside fold N.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use convfuse_core::data::{
    compute_mean_image, crop_windows, make_folds, render_frame, resize_to, subtract_mean, synth_records, synth_videos,
    CropMode, FrameRecord, Manifest, MeanImage, SynthConfig,
};
use convfuse_core::evaluation::{
    classify_videos, crossval_evaluate, roc_sweep, CrossValSummary, FoldResult, FusionKind, RocPoint,
};
use convfuse_core::models::{build_named, predict, ModelParams, NetworkSpec, MINI_INPUT_SHAPE};
use convfuse_core::training::{
    featurize_dataset, train, train_classifier_head, TrainConfig, TrainMode, TrainReport, WindowDataset,
};
use convfuse_core::{ClassLabel, ScorePair, Tensor};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::files::{load_mean_image, load_ppm, save_mean_image, save_ppm};
use crate::formats::{read_manifest, write_manifest, ScoreRow};
use crate::parallel::Rayon;

pub const MANIFEST_FILE: &str = "manifest.csv";

pub fn mean_image_path(dir: &Path, fold: usize) -> PathBuf {
    dir.join(format!("mean_fold{fold}.bin"))
}

/// Side of the square windows the desk-scale networks take.
pub fn crop_side() -> usize {
    MINI_INPUT_SHAPE[1]
}

/// Renders the synthetic corpus into `out/frames/` and writes
/// `out/manifest.csv` with every video in fold 0.
pub fn synthesize(cfg: &SynthConfig, out: &Path) -> Result<Manifest> {
    let videos = synth_videos(cfg)?;
    let records = synth_records(cfg)?;
    let shots = cfg.shots_per_video;
    for (i, record) in records.iter().enumerate() {
        let img = render_frame(cfg, &videos[i / shots], i % shots)?;
        save_ppm(&out.join(&record.image_path), &img)?;
    }
    let manifest = Manifest::new(records, 1)?;
    write_manifest(&out.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

/// A manifest together with the directory its image paths are relative to.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub dir: PathBuf,
    pub manifest: Manifest,
}

impl Corpus {
    pub fn open(manifest_path: &Path) -> Result<Self> {
        let manifest = read_manifest(manifest_path, 1)?;
        let dir = manifest_path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self { dir, manifest })
    }

    pub fn image_path(&self, record: &FrameRecord) -> PathBuf {
        self.dir.join(&record.image_path)
    }

    pub fn load(&self, record: &FrameRecord) -> Result<Tensor> {
        load_ppm(&self.image_path(record))
    }

    pub fn mean_image(&self, fold: usize) -> Result<MeanImage> {
        load_mean_image(&mean_image_path(&self.dir, fold))
    }

    /// Resizes a frame to the mean image's side and subtracts the mean.
    pub fn preprocess(&self, record: &FrameRecord, mean: &MeanImage) -> Result<Tensor> {
        let path = self.image_path(record);
        let img = load_ppm(&path)?;
        let img = resize_to(&img, mean.side()).map_err(Error::file(&path))?;
        subtract_mean(&img, mean).map_err(Error::file(&path))
    }

    fn check_fold(&self, fold: usize) -> Result<()> {
        if fold >= self.manifest.fold_count() {
            return Err(Error::config(format!(
                "fold {fold} out of range, the manifest has {} folds",
                self.manifest.fold_count()
            )));
        }
        Ok(())
    }

    fn mean_of<'a>(&self, records: impl Iterator<Item = &'a FrameRecord>, side: usize) -> Result<MeanImage> {
        let mut failure = None;
        let images = records.map_while(|r| match self.load(r) {
            Ok(img) => Some(img),
            Err(e) => {
                failure = Some(e);
                None
            }
        });
        let mean = compute_mean_image(images, side);
        match failure {
            Some(e) => Err(e),
            None => Ok(mean?),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrepareConfig {
    pub folds: usize,
    pub seed: u64,
    pub side: usize,
}

/// Assigns video-grouped folds and computes per-fold mean images. Writes
/// `out/manifest.csv` with image paths rewritten relative to `out`.
pub fn prepare(manifest_path: &Path, cfg: &PrepareConfig, out: &Path) -> Result<Manifest> {
    if cfg.folds < 2 {
        return Err(Error::config("--folds must be at least 2"));
    }
    if cfg.side < crop_side() {
        return Err(Error::config(format!(
            "--side must be at least the {} pixel crop",
            crop_side()
        )));
    }
    let corpus = Corpus::open(manifest_path)?;
    std::fs::create_dir_all(out).map_err(Error::io(out))?;
    let out_abs = std::path::absolute(out).map_err(Error::io(out))?;
    let assignment = make_folds(&corpus.manifest.videos(), cfg.folds, cfg.seed)?;
    let records = corpus
        .manifest
        .records()
        .iter()
        .map(|r| {
            let image = corpus.image_path(r);
            let image = std::path::absolute(&image).map_err(Error::io(&image))?;
            let rel = pathdiff::diff_paths(&image, &out_abs).unwrap_or(image);
            let image_path = rel
                .to_str()
                .ok_or_else(|| Error::data(format!("{} is not valid UTF-8", rel.display())))?
                .replace('\\', "/");
            Ok(FrameRecord {
                image_path,
                fold: assignment[&r.video_id],
                ..r.clone()
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = Manifest::new(records, cfg.folds)?;
    let prepared = Corpus {
        dir: out.to_path_buf(),
        manifest,
    };
    for fold in 0..cfg.folds {
        let mean = prepared.mean_of(prepared.manifest.train_records(fold), cfg.side)?;
        save_mean_image(&mean_image_path(out, fold), &mean)?;
    }
    write_manifest(&out.join(MANIFEST_FILE), &prepared.manifest)?;
    Ok(prepared.manifest)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainRequest {
    pub net: String,
    pub fold: usize,
    pub config: TrainConfig,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub spec: NetworkSpec,
    pub params: ModelParams,
    pub report: TrainReport,
}

/// Builds the spec for `net` with trainable flags set for `mode`.
pub fn network_for(net: &str, mode: TrainMode) -> Result<NetworkSpec> {
    let spec = build_named(net, &MINI_INPUT_SHAPE)?;
    Ok(match mode {
        TrainMode::Full => spec.all_trainable(),
        TrainMode::FineTune => spec.last_layer_only(),
    })
}

/// Trains on every fold except `request.fold`, from a trunk initialized
/// with the config seed. Fine-tuning runs the frozen trunk once per window
/// and trains the classifier on the cached features.
pub fn train_fold(corpus: &Corpus, request: &TrainRequest) -> Result<TrainOutcome> {
    let config = &request.config;
    config.validate()?;
    let spec = network_for(&request.net, config.mode)?;
    corpus.check_fold(request.fold)?;
    let start = Instant::now();
    let mean = corpus.mean_image(request.fold)?;
    let records: Vec<&FrameRecord> = corpus.manifest.train_records(request.fold).collect();
    if records.is_empty() {
        return Err(Error::data(format!("no training frames outside fold {}", request.fold)));
    }
    let frames = records
        .par_iter()
        .map(|r| Ok((corpus.preprocess(r, &mean)?, r.label)))
        .collect::<Result<Vec<(Tensor, ClassLabel)>>>()?;
    let windows = WindowDataset::new(&frames, crop_side());
    let init = ModelParams::init(&spec, config.seed);
    let (params, mut report) = match config.mode {
        TrainMode::FineTune => {
            let layer = spec.feature_layer().expect("desk networks have a classifier");
            let features = featurize_dataset(&spec, &init, &windows, layer, &Rayon)?;
            drop(frames);
            train_classifier_head(&spec, &init, &features, config, &Rayon)?
        }
        TrainMode::Full => train(&spec, &init, &windows, config, &Rayon)?,
    };
    report.wall_time = start.elapsed();
    Ok(TrainOutcome { spec, params, report })
}

/// Scores the center window of every held-out frame of `fold`, in
/// manifest order.
pub fn score_fold(corpus: &Corpus, spec: &NetworkSpec, params: &ModelParams, fold: usize) -> Result<Vec<ScoreRow>> {
    corpus.check_fold(fold)?;
    let mean = corpus.mean_image(fold)?;
    let records: Vec<&FrameRecord> = corpus.manifest.test_records(fold).collect();
    if records.is_empty() {
        return Err(Error::data(format!("fold {fold} has no frames")));
    }
    records
        .par_iter()
        .map(|r| {
            let img = corpus.preprocess(r, &mean)?;
            let window = crop_windows(&img, crop_side(), CropMode::Test)?.remove(0);
            Ok(ScoreRow {
                video_id: r.video_id.clone(),
                shot_index: r.shot_index,
                score: predict(spec, params, &window)?,
            })
        })
        .collect()
}

type FrameKey = (String, u32);

fn key(row: &ScoreRow) -> FrameKey {
    (row.video_id.clone(), row.shot_index)
}

fn index_rows(rows: &[ScoreRow]) -> Result<BTreeMap<FrameKey, ScorePair>> {
    let mut map = BTreeMap::new();
    for row in rows {
        if map.insert(key(row), row.score).is_some() {
            return Err(Error::data(format!(
                "frame ({}, {}) is scored twice",
                row.video_id, row.shot_index
            )));
        }
    }
    Ok(map)
}

/// Fuses two networks' scores frame by frame. Both sets must cover exactly
/// the same frames; the output follows the order of `a`.
pub fn fuse_scores(a: &[ScoreRow], b: &[ScoreRow], kind: FusionKind) -> Result<Vec<ScoreRow>> {
    let other = index_rows(b)?;
    if index_rows(a)?.len() != other.len() {
        return Err(Error::data(format!(
            "score sets cover different frames ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    a.iter()
        .map(|row| {
            let s = other.get(&key(row)).ok_or_else(|| {
                Error::data(format!(
                    "frame ({}, {}) missing from the second score set",
                    row.video_id, row.shot_index
                ))
            })?;
            Ok(ScoreRow {
                score: kind.fuse(&row.score, s),
                ..row.clone()
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub summary: CrossValSummary,
    pub roc: Vec<RocPoint>,
}

/// Frame-level ROC over all rows and per-fold video accuracy, with folds
/// and labels taken from the manifest. A single scored fold reports a
/// standard deviation of zero.
pub fn evaluate_scores(manifest: &Manifest, rows: &[ScoreRow], threshold: f64) -> Result<Evaluation> {
    let by_frame: BTreeMap<(&str, u32), &FrameRecord> = manifest
        .records()
        .iter()
        .map(|r| ((r.video_id.as_str(), r.shot_index), r))
        .collect();
    index_rows(rows)?;
    let mut per_fold: BTreeMap<usize, Vec<(&str, ScorePair, ClassLabel)>> = BTreeMap::new();
    let mut items = Vec::with_capacity(rows.len());
    for row in rows {
        let record = by_frame.get(&(row.video_id.as_str(), row.shot_index)).ok_or_else(|| {
            Error::data(format!(
                "scored frame ({}, {}) is not in the manifest",
                row.video_id, row.shot_index
            ))
        })?;
        per_fold
            .entry(record.fold)
            .or_default()
            .push((row.video_id.as_str(), row.score, record.label));
        items.push((row.score, record.label));
    }
    if items.is_empty() {
        return Err(Error::data("no scored frames"));
    }
    let roc = roc_sweep(&items)?;
    let mut fold_ids = Vec::new();
    let mut pairs = Vec::new();
    for (fold, frames) in per_fold {
        let verdicts = classify_videos(frames, threshold)?;
        fold_ids.push(fold);
        pairs.push(verdicts.iter().map(|v| (v.truth, v.predicted)).collect::<Vec<_>>());
    }
    let summary = if pairs.len() == 1 {
        let fold = FoldResult::from_predictions(fold_ids[0], &pairs[0])?;
        CrossValSummary {
            mean: fold.balanced_accuracy,
            std: 0.0,
            folds: vec![fold],
        }
    } else {
        let mut summary = crossval_evaluate(&pairs)?;
        for (f, id) in summary.folds.iter_mut().zip(&fold_ids) {
            f.fold = *id;
        }
        summary
    };
    Ok(Evaluation { summary, roc })
}
