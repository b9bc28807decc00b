use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::score::ClassLabel;

/// Per-class and balanced accuracy of one fold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldResult {
    pub fold: usize,
    pub benign_accuracy: f64,
    pub porn_accuracy: f64,
    pub balanced_accuracy: f64,
}

impl FoldResult {
    /// Scores `(truth, predicted)` pairs; both classes must be present.
    pub fn from_predictions(fold: usize, pairs: &[(ClassLabel, ClassLabel)]) -> Result<Self> {
        let mut total = [0usize; 2];
        let mut correct = [0usize; 2];
        for &(truth, pred) in pairs {
            total[truth.index()] += 1;
            if truth == pred {
                correct[truth.index()] += 1;
            }
        }
        if total.contains(&0) {
            return Err(Error::invalid(alloc::format!("fold {fold} lacks one of the classes")));
        }
        let benign_accuracy = correct[0] as f64 / total[0] as f64;
        let porn_accuracy = correct[1] as f64 / total[1] as f64;
        Ok(Self {
            fold,
            benign_accuracy,
            porn_accuracy,
            balanced_accuracy: (benign_accuracy + porn_accuracy) / 2.0,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossValSummary {
    pub folds: Vec<FoldResult>,
    pub mean: f64,
    /// Population standard deviation (divides by the fold count).
    pub std: f64,
}

/// `per_fold[f]` holds the `(truth, predicted)` video labels of fold `f`.
pub fn crossval_evaluate(per_fold: &[Vec<(ClassLabel, ClassLabel)>]) -> Result<CrossValSummary> {
    if per_fold.len() < 2 {
        return Err(Error::invalid("cross-validation needs at least 2 folds"));
    }
    let folds = per_fold
        .iter()
        .enumerate()
        .map(|(f, pairs)| FoldResult::from_predictions(f, pairs))
        .collect::<Result<Vec<_>>>()?;
    let k = folds.len() as f64;
    let mean = folds.iter().map(|f| f.balanced_accuracy).sum::<f64>() / k;
    let var = folds
        .iter()
        .map(|f| (f.balanced_accuracy - mean) * (f.balanced_accuracy - mean))
        .sum::<f64>()
        / k;
    Ok(CrossValSummary {
        folds,
        mean,
        std: libm::sqrt(var),
    })
}
