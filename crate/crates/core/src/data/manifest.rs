use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::score::ClassLabel;

pub const DEFAULT_FOLDS: usize = 5;

/// One keyframe of one video shot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameRecord {
    pub video_id: String,
    pub shot_index: u32,
    pub image_path: String,
    pub label: ClassLabel,
    pub fold: usize,
}

/// Corpus catalog. Every record of a video shares its label and fold, and
/// `(video_id, shot_index)` is unique.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    records: Vec<FrameRecord>,
    fold_count: usize,
}

impl Manifest {
    pub fn new(records: Vec<FrameRecord>, fold_count: usize) -> Result<Self> {
        if fold_count == 0 {
            return Err(Error::invalid("fold count must be positive"));
        }
        let mut seen = BTreeSet::new();
        let mut per_video: BTreeMap<&str, (ClassLabel, usize)> = BTreeMap::new();
        for r in &records {
            if !seen.insert((r.video_id.as_str(), r.shot_index)) {
                return Err(Error::invalid(alloc::format!(
                    "duplicate frame ({}, {})",
                    r.video_id,
                    r.shot_index
                )));
            }
            if r.fold >= fold_count {
                return Err(Error::invalid(alloc::format!(
                    "frame ({}, {}) has fold {} but there are {fold_count} folds",
                    r.video_id,
                    r.shot_index,
                    r.fold
                )));
            }
            let entry = per_video.entry(&r.video_id).or_insert((r.label, r.fold));
            if *entry != (r.label, r.fold) {
                return Err(Error::invalid(alloc::format!(
                    "video {} has frames with differing label or fold",
                    r.video_id
                )));
            }
        }
        Ok(Self { records, fold_count })
    }

    pub fn records(&self) -> &[FrameRecord] {
        &self.records
    }

    pub fn fold_count(&self) -> usize {
        self.fold_count
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Distinct videos with their labels, sorted by id.
    pub fn videos(&self) -> Vec<(String, ClassLabel)> {
        let map: BTreeMap<&str, ClassLabel> = self.records.iter().map(|r| (r.video_id.as_str(), r.label)).collect();
        map.into_iter().map(|(v, l)| (v.into(), l)).collect()
    }

    /// Rewrites every record's fold from a per-video assignment.
    pub fn with_folds(&self, assignment: &BTreeMap<String, usize>, fold_count: usize) -> Result<Self> {
        let records = self
            .records
            .iter()
            .map(|r| {
                let fold = *assignment
                    .get(&r.video_id)
                    .ok_or_else(|| Error::invalid(alloc::format!("video {} has no fold", r.video_id)))?;
                Ok(FrameRecord { fold, ..r.clone() })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(records, fold_count)
    }

    /// Held-out frames of `fold`.
    pub fn test_records(&self, fold: usize) -> impl Iterator<Item = &FrameRecord> {
        self.records.iter().filter(move |r| r.fold == fold)
    }

    /// Frames of every other fold.
    pub fn train_records(&self, fold: usize) -> impl Iterator<Item = &FrameRecord> {
        self.records.iter().filter(move |r| r.fold != fold)
    }
}
