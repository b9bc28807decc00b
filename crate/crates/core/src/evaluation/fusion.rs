use core::str::FromStr;

use crate::error::{Error, Result};
use crate::score::ScorePair;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FusionKind {
    /// Weighted average, equal weights by default.
    Average,
    /// Per-class maximum, renormalized.
    Max,
}

impl FusionKind {
    pub fn fuse(self, a: &ScorePair, b: &ScorePair) -> ScorePair {
        match self {
            FusionKind::Average => fuse_average(a, b, 0.5).expect("0.5 is a valid weight"),
            FusionKind::Max => fuse_max(a, b),
        }
    }
}

impl FromStr for FusionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "avg" | "average" => Ok(FusionKind::Average),
            "max" => Ok(FusionKind::Max),
            other => Err(Error::invalid(alloc::format!(
                "unknown fusion {other:?}, expected avg or max"
            ))),
        }
    }
}

/// `w*a + (1-w)*b` per class.
pub fn fuse_average(a: &ScorePair, b: &ScorePair, w: f64) -> Result<ScorePair> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::invalid(alloc::format!("fusion weight {w} outside [0,1]")));
    }
    if w == 1.0 {
        return Ok(*a);
    }
    if w == 0.0 {
        return Ok(*b);
    }
    let mix = |x: f64, y: f64| y + w * (x - y);
    Ok(ScorePair::new_unchecked(
        mix(a.benign(), b.benign()),
        mix(a.porn(), b.porn()),
    ))
}

/// Per-class maximum of the two pairs, rescaled to sum to one.
pub fn fuse_max(a: &ScorePair, b: &ScorePair) -> ScorePair {
    if a == b {
        return *a;
    }
    let benign = a.benign().max(b.benign());
    let porn = a.porn().max(b.porn());
    let total = benign + porn;
    ScorePair::new_unchecked(benign / total, porn / total)
}
