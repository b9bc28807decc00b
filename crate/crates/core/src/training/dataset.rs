use crate::data::{crop_window, TRAIN_WINDOWS};
use crate::error::Result;
use crate::score::ClassLabel;
use crate::tensor::Tensor;

/// Indexed labelled samples.
pub trait Dataset: Sync {
    fn len(&self) -> usize;

    fn sample(&self, index: usize) -> Result<(Tensor, ClassLabel)>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Dataset for [(Tensor, ClassLabel)] {
    fn len(&self) -> usize {
        <[_]>::len(self)
    }

    fn sample(&self, index: usize) -> Result<(Tensor, ClassLabel)> {
        Ok(self[index].clone())
    }
}

/// Expands preprocessed square frames into their ten training windows.
/// Sample `i` is window `i % 10` of frame `i / 10`.
pub struct WindowDataset<'a> {
    frames: &'a [(Tensor, ClassLabel)],
    crop: usize,
}

impl<'a> WindowDataset<'a> {
    pub fn new(frames: &'a [(Tensor, ClassLabel)], crop: usize) -> Self {
        Self { frames, crop }
    }
}

impl Dataset for WindowDataset<'_> {
    fn len(&self) -> usize {
        self.frames.len() * TRAIN_WINDOWS
    }

    fn sample(&self, index: usize) -> Result<(Tensor, ClassLabel)> {
        let (img, label) = &self.frames[index / TRAIN_WINDOWS];
        Ok((crop_window(img, self.crop, index % TRAIN_WINDOWS)?, *label))
    }
}
