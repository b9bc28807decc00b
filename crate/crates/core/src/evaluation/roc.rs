use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::score::{ClassLabel, ScorePair};

pub const DEFAULT_THRESHOLD: f64 = 50.0;

/// Integer thresholds swept by [`roc_sweep`].
pub const ROC_THRESHOLDS: core::ops::RangeInclusive<u32> = 0..=100;

/// One operating point: rates of benign and of porn items accepted as
/// benign at `threshold` percent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub benign_as_benign_rate: f64,
    pub porn_as_benign_rate: f64,
}

/// Benign iff the benign score reaches `threshold` percent. An exact 0.5
/// tie at threshold 50 resolves to benign.
pub fn classify_frame(score: &ScorePair, threshold: f64) -> Result<ClassLabel> {
    if !(0.0..=100.0).contains(&threshold) {
        return Err(Error::invalid(alloc::format!("threshold {threshold} outside [0,100]")));
    }
    Ok(if score.benign() >= threshold / 100.0 {
        ClassLabel::Benign
    } else {
        ClassLabel::Porn
    })
}

pub fn roc_sweep(items: &[(ScorePair, ClassLabel)]) -> Result<Vec<RocPoint>> {
    let count = |class| items.iter().filter(|(_, l)| *l == class).count();
    let (benign_total, porn_total) = (count(ClassLabel::Benign), count(ClassLabel::Porn));
    if benign_total == 0 || porn_total == 0 {
        return Err(Error::invalid("ROC needs at least one benign and one porn item"));
    }
    ROC_THRESHOLDS
        .map(|t| {
            let threshold = f64::from(t);
            let mut accepted = [0usize; 2];
            for (score, label) in items {
                if classify_frame(score, threshold)? == ClassLabel::Benign {
                    accepted[label.index()] += 1;
                }
            }
            Ok(RocPoint {
                threshold,
                benign_as_benign_rate: accepted[0] as f64 / benign_total as f64,
                porn_as_benign_rate: accepted[1] as f64 / porn_total as f64,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn pair(b: f64) -> ScorePair {
        ScorePair::from_benign(b).unwrap()
    }

    #[test]
    fn frame_decisions() {
        assert_eq!(classify_frame(&pair(0.5), 50.0).unwrap(), ClassLabel::Benign);
        assert_eq!(classify_frame(&pair(0.4), 50.0).unwrap(), ClassLabel::Porn);
        assert_eq!(classify_frame(&pair(0.0), 0.0).unwrap(), ClassLabel::Benign);
        assert!(classify_frame(&pair(0.5), 100.5).is_err());
        assert!(classify_frame(&pair(0.5), -1.0).is_err());
    }

    #[test]
    fn separated_scores() {
        let items = vec![
            (pair(0.9), ClassLabel::Benign),
            (pair(0.9), ClassLabel::Benign),
            (pair(0.1), ClassLabel::Porn),
        ];
        let roc = roc_sweep(&items).unwrap();
        assert_eq!(roc.len(), 101);
        assert_eq!((roc[0].benign_as_benign_rate, roc[0].porn_as_benign_rate), (1.0, 1.0));
        assert_eq!((roc[50].benign_as_benign_rate, roc[50].porn_as_benign_rate), (1.0, 0.0));
        assert_eq!(
            (roc[100].benign_as_benign_rate, roc[100].porn_as_benign_rate),
            (0.0, 0.0)
        );
    }

    #[test]
    fn single_class_rejected() {
        assert!(roc_sweep(&[(pair(0.3), ClassLabel::Porn)]).is_err());
    }
}
