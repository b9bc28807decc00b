use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::roc::classify_frame;
use crate::error::{Error, Result};
use crate::score::{ClassLabel, ScorePair};

/// Majority vote of per-frame decisions. Equal counts go to the class with
/// the larger score sum over all frames; if the sums are equal too, benign.
pub fn classify_video(frames: &[ScorePair], threshold: f64) -> Result<ClassLabel> {
    if frames.is_empty() {
        return Err(Error::Empty("video without frames"));
    }
    let mut votes = [0usize; 2];
    for f in frames {
        votes[classify_frame(f, threshold)?.index()] += 1;
    }
    Ok(if votes[0] > votes[1] {
        ClassLabel::Benign
    } else if votes[1] > votes[0] {
        ClassLabel::Porn
    } else {
        let benign: f64 = frames.iter().map(ScorePair::benign).sum();
        let porn: f64 = frames.iter().map(ScorePair::porn).sum();
        if porn > benign {
            ClassLabel::Porn
        } else {
            ClassLabel::Benign
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VideoVerdict {
    pub video_id: String,
    pub truth: ClassLabel,
    pub predicted: ClassLabel,
}

/// Groups frame scores by video and votes each video, sorted by id.
pub fn classify_videos<'a, I>(frames: I, threshold: f64) -> Result<Vec<VideoVerdict>>
where
    I: IntoIterator<Item = (&'a str, ScorePair, ClassLabel)>,
{
    let mut grouped: BTreeMap<&str, (ClassLabel, Vec<ScorePair>)> = BTreeMap::new();
    for (video, score, truth) in frames {
        let entry = grouped.entry(video).or_insert((truth, Vec::new()));
        if entry.0 != truth {
            return Err(Error::invalid(alloc::format!(
                "video {video} has frames with differing labels"
            )));
        }
        entry.1.push(score);
    }
    grouped
        .into_iter()
        .map(|(video, (truth, scores))| {
            Ok(VideoVerdict {
                video_id: video.into(),
                truth,
                predicted: classify_video(&scores, threshold)?,
            })
        })
        .collect()
}
