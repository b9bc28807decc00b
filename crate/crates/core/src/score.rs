//! Two-class labels and normalized class confidences.

use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// Tolerance on `benign + porn == 1`.
pub const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassLabel {
    Benign,
    Porn,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 2] = [ClassLabel::Benign, ClassLabel::Porn];

    /// Output neuron index: benign is 0, porn is 1.
    pub fn index(self) -> usize {
        match self {
            ClassLabel::Benign => 0,
            ClassLabel::Porn => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Benign => "benign",
            ClassLabel::Porn => "porn",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "benign" => Ok(ClassLabel::Benign),
            "porn" => Ok(ClassLabel::Porn),
            other => Err(Error::invalid(alloc::format!(
                "unknown label {other:?}, expected benign or porn"
            ))),
        }
    }
}

/// Normalized confidences for the two classes; they sum to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScorePair {
    benign: f64,
    porn: f64,
}

impl ScorePair {
    pub fn new(benign: f64, porn: f64) -> Result<Self> {
        let in_range = |v: f64| v.is_finite() && (0.0..=1.0).contains(&v);
        if !in_range(benign) || !in_range(porn) {
            return Err(Error::invalid(alloc::format!(
                "scores must lie in [0,1], got ({benign}, {porn})"
            )));
        }
        if (benign + porn - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::invalid(alloc::format!(
                "scores must sum to 1, got {benign} + {porn}"
            )));
        }
        Ok(Self { benign, porn })
    }

    /// Builds a pair from the benign score alone.
    pub fn from_benign(benign: f64) -> Result<Self> {
        Self::new(benign, 1.0 - benign)
    }

    pub fn benign(&self) -> f64 {
        self.benign
    }

    pub fn porn(&self) -> f64 {
        self.porn
    }

    pub fn get(&self, label: ClassLabel) -> f64 {
        match label {
            ClassLabel::Benign => self.benign,
            ClassLabel::Porn => self.porn,
        }
    }

    pub(crate) fn new_unchecked(benign: f64, porn: f64) -> Self {
        Self { benign, porn }
    }
}
